#include "triqmc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace triqmc {

CouplingTable coupling_table(const ModelParams& p) {
    CouplingTable t;
    t.omega = p.omega;
    const double r[3] = {p.spacing, std::sqrt(3.0) * p.spacing, 2.0 * p.spacing};
    switch (p.profile) {
        case Profile::Explicit:
            for (int k = 0; k < 3; ++k) t.U[k] = p.u[k];
            break;
        case Profile::VdW:
            if (p.c6 == 0.0 || p.spacing <= 0.0)
                throw std::invalid_argument("coupling_table: bad VdW parameters");
            for (int k = 0; k < 3; ++k) t.U[k] = p.c6 / std::pow(r[k], 6);
            break;
        case Profile::Dressed: {
            if (p.dressed_delta <= 0.0 || p.c6 <= 0.0)
                throw std::invalid_argument("coupling_table: bad dressed parameters");
            double q = p.dressed_omega / (2.0 * p.dressed_delta);
            double u0 = 2.0 * p.dressed_delta * q * q * q * q;
            double rc6 = p.c6 / (2.0 * p.dressed_delta);
            for (int k = 0; k < 3; ++k) t.U[k] = u0 / (1.0 + std::pow(r[k], 6) / rc6);
            break;
        }
    }
    for (int k = p.trunc_shell; k < 3; ++k) t.U[k] = 0.0;
    if (t.U[0] <= 0.0) throw std::invalid_argument("coupling_table: U1 must be positive");
    return t;
}

double half_filling_detuning(const CouplingTable& t) { return t.delta_half(); }

double classical_energy(const SpinConfig& cfg, const CouplingTable& t, const Lattice& lat) {
    if ((int)cfg.size() != lat.N) throw std::invalid_argument("classical_energy: size mismatch");
    double e = 0;
    for (int sh = 0; sh < 3; ++sh) {
        if (t.U[sh] == 0.0) continue;
        double s = 0;
        for (const Bond& b : lat.bonds[sh]) s += (cfg[b.i] == cfg[b.j]) ? 0.25 : -0.25;
        e += t.U[sh] * s;
    }
    return e;
}

double rydberg_energy(const SpinConfig& cfg, const CouplingTable& t, const Lattice& lat,
                      double delta) {
    if ((int)cfg.size() != lat.N) throw std::invalid_argument("rydberg_energy: size mismatch");
    double e = 0;
    for (int sh = 0; sh < 3; ++sh) {
        if (t.U[sh] == 0.0) continue;
        double s = 0;
        for (const Bond& b : lat.bonds[sh]) s += cfg[b.i] * cfg[b.j];
        e += t.U[sh] * s;
    }
    for (int i = 0; i < lat.N; ++i) e -= delta * cfg[i];
    return e;
}

}  // namespace triqmc
