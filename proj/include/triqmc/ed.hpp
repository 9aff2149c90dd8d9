#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "triqmc/lattice.hpp"
#include "triqmc/model.hpp"

namespace triqmc {

// Full dense spectrum of H = sum_b U_b Sz Sz - Omega sum_i Sx on N <= 14 sites.
// Basis state b: bit i = n_i. Eigenvectors stored column-major, dim x dim.
struct DenseSpectrum {
    int nsites = 0;
    size_t dim = 0;
    std::vector<double> evals;  // ascending
    std::vector<double> evecs;

    double ground_energy() const { return evals.front(); }

    // diagonal of exp(-beta(H-E0)) in the Sz basis, unnormalized
    std::vector<double> thermal_diag(double beta) const;

    double partition_shifted(double beta) const;  // Z * exp(beta E0)
    double thermal_energy(double beta) const;

    // thermal value of a diagonal observable given per-basis-state values
    double thermal_diag_expectation(double beta,
                                    const std::function<double(uint64_t)>& obs) const;
};

struct EdBond {
    int i, j;
    double U;
};

// low-level: arbitrary small spin system (enables 1- and 2-site closed forms)
DenseSpectrum ed_solve(int nsites, const std::vector<EdBond>& bonds, double omega);

// lattice model wrapper, all shells with nonzero U
DenseSpectrum ed_solve(const Lattice& lat, const CouplingTable& t);

// per-basis-state helpers for observables
double basis_structure_factor(uint64_t b, const Lattice& lat, Vec2 q);

}  // namespace triqmc
