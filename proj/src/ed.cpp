#include "triqmc/ed.hpp"

#include <lapacke.h>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace triqmc {

DenseSpectrum ed_solve(int nsites, const std::vector<EdBond>& bonds, double omega) {
    if (nsites < 1 || nsites > 14) throw std::invalid_argument("ed_solve: 1 <= N <= 14");
    DenseSpectrum s;
    s.nsites = nsites;
    s.dim = 1ull << nsites;
    const size_t D = s.dim;
    s.evecs.assign(D * D, 0.0);
    s.evals.assign(D, 0.0);

    // diagonal: sum U Sz Sz; off-diagonal: -Omega/2 per single flip
    for (uint64_t b = 0; b < D; ++b) {
        double e = 0;
        for (const EdBond& bd : bonds) {
            bool eq = ((b >> bd.i) & 1) == ((b >> bd.j) & 1);
            e += bd.U * (eq ? 0.25 : -0.25);
        }
        s.evecs[b + D * b] = e;
    }
    if (omega != 0.0)
        for (uint64_t b = 0; b < D; ++b)
            for (int i = 0; i < nsites; ++i) {
                uint64_t b2 = b ^ (1ull << i);
                s.evecs[b2 + D * b] = -0.5 * omega;
            }

    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', (lapack_int)D, s.evecs.data(),
                              (lapack_int)D, s.evals.data());
    if (info != 0) throw std::runtime_error("ed_solve: dsyevd failed");
    return s;
}

DenseSpectrum ed_solve(const Lattice& lat, const CouplingTable& t) {
    std::vector<EdBond> bonds;
    for (int sh = 0; sh < 3; ++sh) {
        if (t.U[sh] == 0.0) continue;
        for (const Bond& b : lat.bonds[sh]) bonds.push_back({b.i, b.j, t.U[sh]});
    }
    return ed_solve(lat.N, bonds, t.omega);
}

std::vector<double> DenseSpectrum::thermal_diag(double beta) const {
    const size_t D = dim;
    const double e0 = evals.front();
    std::vector<double> rho(D, 0.0);
    for (size_t k = 0; k < D; ++k) {
        double w = std::exp(-beta * (evals[k] - e0));
        if (w < 1e-300) continue;
        const double* v = &evecs[D * k];
        for (size_t b = 0; b < D; ++b) rho[b] += v[b] * v[b] * w;
    }
    return rho;
}

double DenseSpectrum::partition_shifted(double beta) const {
    double z = 0;
    const double e0 = evals.front();
    for (double e : evals) z += std::exp(-beta * (e - e0));
    return z;
}

double DenseSpectrum::thermal_energy(double beta) const {
    double z = 0, s = 0;
    const double e0 = evals.front();
    for (double e : evals) {
        double w = std::exp(-beta * (e - e0));
        z += w;
        s += e * w;
    }
    return s / z;
}

double DenseSpectrum::thermal_diag_expectation(double beta,
                                               const std::function<double(uint64_t)>& obs) const {
    std::vector<double> rho = thermal_diag(beta);
    double z = 0, s = 0;
    for (size_t b = 0; b < dim; ++b) {
        z += rho[b];
        s += rho[b] * obs(b);
    }
    return s / z;
}

double basis_structure_factor(uint64_t b, const Lattice& lat, Vec2 q) {
    std::complex<double> a = 0;
    for (int i = 0; i < lat.N; ++i) {
        Vec2 r = lat.pos(i);
        double sz = ((b >> i) & 1) ? 0.5 : -0.5;
        a += sz * std::polar(1.0, q.x * r.x + q.y * r.y);
    }
    return std::norm(a) / lat.N;
}

}  // namespace triqmc
