#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "triqmc/binning.hpp"
#include "triqmc/gauge.hpp"
#include "triqmc/lattice.hpp"
#include "triqmc/model.hpp"
#include "triqmc/rng.hpp"

namespace triqmc {

// Stochastic series expansion for H = sum_b U_b Sz Sz - Omega sum_i Sx.
// Operator decomposition (all matrix elements nonnegative):
//   site diagonal     Omega/2
//   site off-diagonal Omega/2 (S+ + S-)
//   bond diagonal     U_b (1/4 - Sz Sz), nonzero only on antiparallel bonds
// Energy estimators: standard -<n>/beta + C with C = N Omega/2 + sum_b U_b/4,
// and the mixed form E_cl(sigma0) - n_offdiag/beta, which is classical
// sample-by-sample when Omega = 0.
//
// Slot encoding: -1 identity; 2i site diag; 2i+1 site off-diag; 2N+b bond b.
class SseChain {
  public:
    SseChain(const Lattice& lat, const CouplingTable& tbl, double beta, Rng rng);

    void set_state(const SpinConfig& cfg);
    const SpinConfig& state() const { return sigma0_; }

    // lock the topological sector to the current state's (Fx, Fy); cluster
    // updates that change the cut fluxes or put a charge on a cut-adjacent
    // triangle are undone (exact detailed balance on the restricted ensemble)
    void lock_sector();
    void unlock_sector();
    bool sector_locked() const { return lock_; }
    std::array<int, 2> sector() const { return {lock_fx_, lock_fy_}; }

    void sweep(bool grow_cutoff);
    void thermalize(int nsweeps) {
        // diagonal-only passes first, until the operator string stops
        // growing: a prepared state is then anchored everywhere before the
        // first cluster update can coin-flip sites that carry no operators
        int stable = 0;
        for (int i = 0; i < 10000 && stable < 3; ++i) {
            int m0 = cutoff();
            diagonal_update(true);
            stable = cutoff() == m0 ? stable + 1 : 0;
        }
        for (int i = 0; i < nsweeps; ++i) sweep(true);
    }

    double beta() const { return beta_; }
    int n() const { return n_; }
    int cutoff() const { return (int)ops_.size(); }
    int op_at(int p) const { return ops_[p]; }
    long n_offdiag() const { return n_off_; }
    long long sweeps_done() const { return sweeps_done_; }
    const Lattice& lattice() const { return lat_; }
    const CouplingTable& couplings() const { return tbl_; }

    double energy_shift() const { return shift_; }              // C above
    double energy_sse() const { return -n_ / beta_ + shift_; }  // per string sample
    double energy_mixed() const;

    // consistency: propagating sigma0 through the string returns sigma0,
    // bond operators sit on antiparallel spins, n and n_offdiag match
    bool valid() const;

    void save(std::ostream& os) const;
    void load(std::istream& is);

    Rng& rng() { return rng_; }

  private:
    void diagonal_update(bool grow);
    void cluster_update();
    void symmetry_move();
    void grow_cutoff(int m_new);
    bool in_sector(const SpinConfig& cfg) const;
    int count_cut_violations(const SpinConfig& cfg) const;

    const Lattice& lat_;
    CouplingTable tbl_;
    double beta_;
    Rng rng_;

    struct OpBond {
        int i, j;
        double w;  // U/2
    };
    std::vector<OpBond> opbonds_;
    double w_site_total_ = 0, w_tot_ = 0, shift_ = 0;
    std::vector<double> class_w_;  // site class + one per shell with U>0
    std::vector<int> class_shell_offset_, class_shell_count_;

    SpinConfig sigma0_;
    std::vector<int> ops_;
    int n_ = 0;
    long n_off_ = 0;
    long long sweeps_done_ = 0;

    bool lock_ = false;
    int lock_fx_ = 0, lock_fy_ = 0;

    // sites whose flip can alter a cut flux or a cut-adjacent triangle
    std::vector<uint8_t> cut_site_;

    // scratch
    SpinConfig prop_;
    std::vector<int> X_, cid_, vfirst_, vlast_, stack_, toggled_;
    std::vector<uint8_t> flip_;
    std::vector<int> cls_beg_, cls_item_, perm_, ops_new_;
};

struct GtauConfig {
    bool enabled = false;
    bool density = true;      // s~ = n - 1/2 channel
    bool electric = true;     // E on the a1-bond link of each up triangle
    std::vector<std::array<int, 2>> momenta;  // (m, n) grid points
    int ntau = 50;            // quadratic grid on [0, beta/2], tau=0 included
    int nref = 64;            // reference slots per measurement
    int every = 5;            // measure every k-th sweep
};

struct GtauChannel {
    std::string obs;  // "density" | "electric"
    int m, n;
    std::vector<std::vector<double>> bins;  // connected G(q, tau_k) per bin
};

struct GtauArchive {
    double beta = 0;
    std::vector<double> taus;
    std::vector<GtauChannel> channels;
};

struct MeasureConfig {
    bool energy = true;
    bool flux = false;
    bool named_sq = false;          // S at K, M, M'
    bool sgrid = false;
    bool psir = false;
    bool corr = false;              // C_E, C_R along a1
    bool violation = false;
    std::vector<Vec2> extra_q;      // additional S(q) scalars, s_q0, s_q1, ...
    int psir_every = 1;
    GtauConfig gtau;
};

struct SseRunResult {
    std::map<std::string, BinnedSeries> scalars;
    // vector observables: mean, error, and raw bins for jackknife consumers
    std::map<std::string, std::vector<double>> vec_mean, vec_err;
    std::map<std::string, std::vector<std::vector<double>>> vec_bins;
    std::vector<std::array<double, 2>> psir_samples;
    GtauArchive gtau;
    bool equilibrated = true;
};

// nmeas must divide into nbins evenly; measurements once per sweep
SseRunResult sse_run(SseChain& chain, long ntherm, long nmeas, int nbins,
                     const MeasureConfig& mc);

}  // namespace triqmc
