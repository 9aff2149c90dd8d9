#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "triqmc/lattice.hpp"
#include "triqmc/model.hpp"

namespace triqmc {

using cplx = std::complex<double>;

// E per dual link: +2 if the crossed bond is frustrated (equal spins), else -1
using ElectricField = std::vector<int8_t>;

struct WindingNumbers {
    int Fx = 0, Fy = 0;
    double f(const Lattice& lat) const { return (double)Fx / lat.Lx; }
};

struct DimerCoverResult {
    std::vector<uint8_t> occ;      // per link, E > 0
    bool ok = false;               // perfect matching of the dual honeycomb
    std::vector<int> bad_vertices; // dual vertices not covered exactly once (A: t, B: N+t)
};

struct HeightField {
    std::vector<int> h;   // per hexagonal plaquette == per triangular site, h[0] = 0
    int off_x = 0;        // height gain around the x winding loop, equals Fx
    int off_y = 0;        // around the y loop, equals -Fy
    bool ok = false;      // all adjacency rules consistent (valid cover)
};

std::vector<uint8_t> frustrated_bonds(const SpinConfig& cfg, const Lattice& lat);
ElectricField electric_field(const SpinConfig& cfg, const Lattice& lat);

// div E with A->B orientation: +sum of links at A(t), -sum at B(t).
// Zero exactly when the triangle has one frustrated bond.
std::vector<int> divergence(const ElectricField& e, const Lattice& lat);
bool charge_free(const SpinConfig& cfg, const Lattice& lat);
int count_violating_triangles(const SpinConfig& cfg, const Lattice& lat);

// fluxes through the fixed cuts: C_x = a1 bonds of row y=0, C_y = a2 bonds of column x=0
WindingNumbers winding_flux(const ElectricField& e, const Lattice& lat);
WindingNumbers winding_flux(const SpinConfig& cfg, const Lattice& lat);

DimerCoverResult dimer_cover(const ElectricField& e, const Lattice& lat);

// Height rules, turning clockwise around an A (up-triangle) dual site:
// +1 across an empty link, -2 across an occupied one. Signs per step
// direction were fixed once against the flux conventions: crossing the link
// of bond (r, r+a1) while stepping +a1 counts -1 empty / +2 occupied, the
// a2 and a1-a2 steps count +1 / -2.
HeightField height_field(const std::vector<uint8_t>& occ, const Lattice& lat);

// order parameters
cplx psi_R(const SpinConfig& cfg, const Lattice& lat);                 // (3/N) sum s~ w^(x+2y)
cplx psi_E_at(const ElectricField& e, const Lattice& lat, int t);      // per A site
cplx psi_E(const ElectricField& e, const Lattice& lat);                // average

// S(Q) with the n-1/2 convention, Eq-normalized by 1/N.
// Grid output indexed m + Lx*n.
std::vector<double> structure_factor_grid(const SpinConfig& cfg, const Lattice& lat);
double structure_factor_at(const SpinConfig& cfg, const Lattice& lat, Vec2 q);

// two-point functions of the local order-parameter fields along a1,
// min-image distance d = 0..Lx/2; complex before any envelope is taken
std::vector<cplx> corr_E_a1(const ElectricField& e, const Lattice& lat);
std::vector<cplx> corr_R_a1(const SpinConfig& cfg, const Lattice& lat);

// ordering vector of the tilted states: K at f=0, and for 0 < f <= 2 the
// half-cell reciprocal row ((2-f)/6, 1/2) in reduced coordinates, reaching
// M' at f=2; symmetry partners via negation and qx reflection
Vec2 q_of_f(double f);
std::vector<Vec2> q_of_f_orbit(double f);

// sector reference states
SpinConfig clock_config(const Lattice& lat);    // n=1 on the (x+2y)%3==0 sublattice
SpinConfig stripe_config(const Lattice& lat);   // n=y%2, saturated f=2
// column word with nv vertical-dimer columns, f = (3 nv - Lx)/Lx;
// requires Lx-nv even (winding parity of periodic spin states) and 2|Ly
SpinConfig vd_word_config(const Lattice& lat, int nv);
// reference for a requested f; throws if unreachable by a periodic spin state
SpinConfig sector_reference(const Lattice& lat, double f);
bool sector_reachable(const Lattice& lat, double f);

// inverse dictionary: spins from a cover, fixed by cfg[0]=1; nullopt if the
// cover's loop holonomies are spin-inconsistent
std::optional<SpinConfig> spins_from_cover(const std::vector<uint8_t>& occ, const Lattice& lat);

}  // namespace triqmc
