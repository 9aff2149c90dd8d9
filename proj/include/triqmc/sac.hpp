#pragma once

#include <cstdint>
#include <vector>

#include "triqmc/rng.hpp"

namespace triqmc {

// Analytic continuation of a bosonic correlator G(tau) to a nonnegative
// spectral density B(omega) on [0, omega_max], with
//   G(tau) = int dw K(tau, w) B(w),
//   K(tau, w) = (exp(-tau w) + exp(-(beta-tau) w)) / (pi (1 + exp(-beta w))).
// K(0, w) = 1/pi identically, so the tau = 0 point fixes the total weight
// sum a_i = pi G(0) and carries no shape information; it is excluded from
// the chi^2 fit.

double sac_kernel(double tau, double omega, double beta);

struct SacInput {
    double beta = 0;
    std::vector<double> taus;               // ascending, taus[0] == 0
    std::vector<double> gbar;               // bin-averaged G(tau)
    std::vector<std::vector<double>> cov;   // covariance of the mean, full tau set
};

// mean and covariance-of-mean from per-bin G(tau) rows
SacInput sac_input_from_bins(double beta, const std::vector<double>& taus,
                             const std::vector<std::vector<double>>& bins);

struct SacConfig {
    int n_delta = 500;          // equal-amplitude delta functions
    int grid_size = 4000;       // fine omega grid resolution
    double omega_max = 0;       // 0: 10x bandwidth guess from the G decay
    double theta0 = 0;          // 0: from the initial chi^2
    double anneal_ratio = 1.25; // geometric theta decrease per stage
    int sweeps_per_stage = 200;
    int max_stages = 80;
    double a_criterion = 0.5;   // <chi^2>(theta*) = chi2_min + a sqrt(2 chi2_min)
    double eig_floor = 1e-12;   // covariance eigenvalue floor, relative to max
    int avg_sweeps = 2000;      // accumulation sweeps at theta*
    int out_bins = 500;
    uint64_t seed = 1;
};

struct SacResult {
    std::vector<double> omega;  // output bin centers
    std::vector<double> B;      // spectral density, integrates to pi G(0)
    std::vector<double> S;      // B / (1 + exp(-beta omega))
    std::vector<double> g_fit;  // reconstructed G on the input tau grid
    double a_total = 0;
    double chi2_min = 0;        // lowest chi^2 seen during the anneal
    double chi2_star = 0;       // stage average at theta*
    double theta_star = 0;
    double chi2_per_dof = 0;
    bool converged = false;     // anneal reached a chi^2 plateau
    bool fit_ok = false;        // chi2_per_dof <= 2
};

SacResult sac_run(const SacInput& in, const SacConfig& cfg);

// chi^2 of an explicit spectrum {omega_i, amplitude a_each} against the
// input, in the same floored-eigenvalue metric sac_run uses
double sac_chi2(const SacInput& in, const SacConfig& cfg,
                const std::vector<double>& omegas, double a_each);

}  // namespace triqmc
