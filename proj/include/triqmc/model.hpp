#pragma once

#include <cstdint>
#include <vector>

#include "triqmc/lattice.hpp"

namespace triqmc {

using SpinConfig = std::vector<uint8_t>;  // n_i in {0,1}; S^z = n - 1/2

enum class Profile { Explicit, VdW, Dressed };

struct ModelParams {
    double omega = 0.0;       // Rabi frequency, units of U1
    Profile profile = Profile::Explicit;
    double u[3] = {1.0, 0.0, 0.0};  // Explicit shell couplings
    double c6 = 1.0;          // VdW / Dressed
    double spacing = 1.0;
    double dressed_omega = 0.0, dressed_delta = 0.0;
    int trunc_shell = 3;      // interactions kept up to this shell
};

struct CouplingTable {
    double U[3] = {0, 0, 0};  // per shell, zero beyond trunc
    double omega = 0.0;
    double delta_half() const { return 3.0 * (U[0] + U[1] + U[2]); }
    double sum_U() const { return U[0] + U[1] + U[2]; }
};

// Shell couplings from the interaction profile evaluated at r = a, sqrt3 a, 2a.
// Dressed uses the soft-core form U(r) = U0 / (1 + (r/Rc)^6) with
// U0 = 2 delta_d (omega_d / (2 delta_d))^4 and Rc = (c6 / (2 delta_d))^(1/6).
CouplingTable coupling_table(const ModelParams& p);

// Z2-symmetric detuning delta = (1/2) sum_j U_ij = 3 (U1+U2+U3)
double half_filling_detuning(const CouplingTable& t);

// spin form: sum over stored bonds of U_shell (n_i-1/2)(n_j-1/2)
double classical_energy(const SpinConfig& cfg, const CouplingTable& t, const Lattice& lat);

// occupation form: sum U n_i n_j - delta sum n_i; differs from the spin form
// by the constant -(3/4) N sum_U exactly when delta = delta_half
double rydberg_energy(const SpinConfig& cfg, const CouplingTable& t, const Lattice& lat,
                      double delta);

}  // namespace triqmc
