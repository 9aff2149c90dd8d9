#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "triqmc/gauge.hpp"
#include "triqmc/lattice.hpp"
#include "triqmc/rng.hpp"

namespace triqmc {

// Fully packed dimer coverings of the dual honeycomb: one occupied link per
// dual vertex. occ[l] flags link l; link l crosses shell-1 bond links[l].bond.
using DimerOcc = std::vector<uint8_t>;

bool cover_valid(const DimerOcc& occ, const Lattice& lat);
ElectricField cover_field(const DimerOcc& occ, const Lattice& lat);
WindingNumbers cover_flux(const DimerOcc& occ, const Lattice& lat);

// all perfect matchings of a bipartite graph, edges (a, b) with a < na,
// b < nb; backtracking over the lowest-index uncovered a vertex.
// Each matching is the sorted list of chosen edge indices.
std::vector<std::vector<int>> enumerate_matchings(
    int na, int nb, const std::vector<std::array<int, 2>>& edges);

struct CoverEnumeration {
    std::vector<DimerOcc> covers;
    // (Fx, Fy) -> indices into covers
    std::map<std::array<int, 2>, std::vector<int>> by_sector;
};

CoverEnumeration enumerate_covers(const Lattice& lat);  // pre: 2N <= 24

// permanent of the A-B biadjacency matrix by Ryser's inclusion-exclusion;
// equals the matching count (exact in double for the sizes allowed here)
double matching_count_ryser(int na, int nb, const std::vector<std::array<int, 2>>& edges);
double matching_count_ryser(const Lattice& lat);

enum class SectorPolicy { Free, Fixed };

// Worm update over coverings. A worm removes the dimer of a random A vertex,
// then the B-side defect hops: pick one of its 3 links uniformly, occupy it,
// and expel the dimer previously covering that A vertex; closing on the tail
// restores full packing. Forward and reverse paths have equal proposal
// probability (1/N times (1/3)^length), so the stationary distribution is
// uniform. Fixed policy rejects closures that changed (Fx, Fy), which
// restricts the same chain to one sector.
class WormSampler {
  public:
    WormSampler(const Lattice& lat, Rng rng, SectorPolicy pol, const DimerOcc& init);

    // one worm; returns its length (0 when a sector-changing worm was undone)
    long step();

    const DimerOcc& occ() const { return occ_; }
    WindingNumbers flux() const { return {fx_, fy_}; }
    bool valid() const;
    long long accepted() const { return accepted_; }
    long long attempted() const { return attempted_; }
    Rng& rng() { return rng_; }

  private:
    void toggle(int l);

    const Lattice& lat_;
    Rng rng_;
    SectorPolicy pol_;
    DimerOcc occ_;
    std::vector<int> match_a_, match_b_;      // dual vertex -> covering link
    std::vector<std::array<int, 3>> links_b_; // B vertex -> incident links
    std::vector<int8_t> cut_;                 // 0 none, 1 x cut, 2 y cut
    int fx_ = 0, fy_ = 0;
    long long accepted_ = 0, attempted_ = 0;
    DimerOcc occ_snap_;
    std::vector<int> ma_snap_, mb_snap_;
};

// distance-binned order-parameter correlators with jackknife errors over bins
struct RkCorrTable {
    std::vector<double> dist;            // 0..Lx/2 along a1
    std::vector<double> ce, ce_err;      // |<psi_E* psi_E>|
    std::vector<double> cr, cr_err;      // |<psi_R* psi_R>|
};

RkCorrTable rk_correlators(const std::vector<std::vector<cplx>>& ce_bins,
                           const std::vector<std::vector<cplx>>& cr_bins);

struct RkRunResult {
    RkCorrTable corr;
    double mean_worm_len = 0;
    long long accepted = 0, attempted = 0;
    std::map<std::array<int, 2>, long> sector_counts;  // visited (Fx, Fy)
};

// full sampling pass: worms_per_meas worms between measurements, nmeas
// measurements split into nbins bins. Fixed policy locks the sector of f.
RkRunResult rk_run(const Lattice& lat, SectorPolicy pol, double f, uint64_t seed,
                   long ntherm_worms, long nmeas, int worms_per_meas, int nbins);

}  // namespace triqmc
