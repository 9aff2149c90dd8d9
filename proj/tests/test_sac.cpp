#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "triqmc/analysis.hpp"
#include "triqmc/sac.hpp"

using namespace triqmc;

static std::vector<double> quad_tau_grid(double beta, int ntau) {
    std::vector<double> t(ntau);
    for (int k = 0; k < ntau; ++k) {
        double x = (double)k / (ntau - 1);
        t[k] = beta / 2.0 * x * x;
    }
    return t;
}

// exact G(tau) of a sum of delta functions sum_i a_i delta(w - w_i)
static std::vector<double> delta_gtau(double beta, const std::vector<double>& taus,
                                      const std::vector<double>& w,
                                      const std::vector<double>& amp) {
    std::vector<double> g(taus.size(), 0.0);
    for (size_t t = 0; t < taus.size(); ++t)
        for (size_t i = 0; i < w.size(); ++i) g[t] += amp[i] * sac_kernel(taus[t], w[i], beta);
    return g;
}

static SacInput diag_input(double beta, const std::vector<double>& taus,
                           std::vector<double> gbar, double sigma, uint64_t noise_seed) {
    SacInput in;
    in.beta = beta;
    in.taus = taus;
    if (noise_seed) {
        std::mt19937_64 gen(noise_seed);
        std::normal_distribution<double> n(0.0, sigma);
        for (size_t j = 1; j < gbar.size(); ++j) gbar[j] += n(gen);
    }
    in.gbar = std::move(gbar);
    size_t nt = taus.size();
    in.cov.assign(nt, std::vector<double>(nt, 0.0));
    for (size_t j = 0; j < nt; ++j) in.cov[j][j] = sigma * sigma;
    return in;
}

static double mass_in(const SacResult& r, double lo, double hi) {
    double dw = r.omega[1] - r.omega[0], m = 0;
    for (size_t b = 0; b < r.omega.size(); ++b)
        if (r.omega[b] >= lo && r.omega[b] <= hi) m += r.B[b] * dw;
    return m;
}

TEST_CASE("kernel is flat at tau = 0 and symmetric about beta/2") {
    for (double beta : {2.0, 16.0})
        for (double w : {0.0, 0.3, 2.0, 9.0}) {
            CHECK(sac_kernel(0.0, w, beta) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
            CHECK(sac_kernel(beta, w, beta) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
            for (double tau : {0.1, 0.5, 0.9})
                CHECK(sac_kernel(tau, w, beta) ==
                      doctest::Approx(sac_kernel(beta - tau, w, beta)).epsilon(1e-13));
        }
    // omega = 0 is exactly 1/pi at every tau
    CHECK(sac_kernel(3.7, 0.0, 8.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-15));
    // deep decay: the backward exponential is negligible
    CHECK(sac_kernel(1.0, 5.0, 8.0) * M_PI == doctest::Approx(std::exp(-5.0)).epsilon(1e-10));
}

TEST_CASE("bin statistics reduce to the covariance of the mean") {
    std::vector<double> taus = {0.0, 1.0, 2.0};
    std::vector<std::vector<double>> bins = {{1, 2, 3}, {3, 2, 1}, {2, 2, 2}, {2, 2, 2}};
    SacInput in = sac_input_from_bins(4.0, taus, bins);
    CHECK(in.beta == 4.0);
    CHECK(in.gbar == std::vector<double>{2, 2, 2});
    CHECK(in.cov[0][0] == doctest::Approx(1.0 / 6).epsilon(1e-14));
    CHECK(in.cov[1][1] == doctest::Approx(0.0));
    CHECK(in.cov[2][2] == doctest::Approx(1.0 / 6).epsilon(1e-14));
    CHECK(in.cov[0][2] == doctest::Approx(-1.0 / 6).epsilon(1e-14));
    CHECK(in.cov[2][0] == in.cov[0][2]);
    CHECK_THROWS(sac_input_from_bins(4.0, taus, {bins[0]}));  // one bin has no variance
}

TEST_CASE("explicit-spectrum chi2 matches the direct diagonal sum") {
    double beta = 8.0;
    auto taus = quad_tau_grid(beta, 12);
    std::vector<double> w = {0.8, 2.2}, amp = {1.9, 1.3};
    std::vector<double> g = delta_gtau(beta, taus, w, amp);
    SacInput in = diag_input(beta, taus, g, 1e-4, 0);
    // shift two interior points off the model by known amounts
    in.gbar[3] += 2e-4;
    in.gbar[7] -= 1e-4;

    SacConfig cfg;
    double a_each = (amp[0] + amp[1]) / 2;  // not the true weights: residuals stay
    double direct = 0;
    for (size_t j = 1; j < taus.size(); ++j) {
        double m = a_each * (sac_kernel(taus[j], w[0], beta) + sac_kernel(taus[j], w[1], beta));
        double r = m - in.gbar[j];
        direct += r * r / (1e-4 * 1e-4);
    }
    CHECK(sac_chi2(in, cfg, w, a_each) == doctest::Approx(direct).epsilon(1e-8));

    // equal-amplitude spectrum reproducing the true weights exactly: only the
    // injected shifts remain, chi2 = 2^2 + 1^2
    std::vector<double> exact;
    for (int k = 0; k < 19; ++k) exact.push_back(w[0]);
    for (int k = 0; k < 13; ++k) exact.push_back(w[1]);
    CHECK(sac_chi2(in, cfg, exact, 0.1) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("the tau = 0 point carries no shape information") {
    double beta = 8.0;
    auto taus = quad_tau_grid(beta, 12);
    std::vector<double> g = delta_gtau(beta, taus, {1.5}, {M_PI});
    SacInput in = diag_input(beta, taus, g, 1e-5, 0);
    SacConfig cfg;
    double c0 = sac_chi2(in, cfg, {1.5}, M_PI);
    in.gbar[0] += 0.37;  // perturbing G(0) must leave the fit metric untouched
    CHECK(sac_chi2(in, cfg, {1.5}, M_PI) == c0);

    in.gbar[0] = -1.0;
    CHECK_THROWS(sac_chi2(in, cfg, {1.5}, M_PI));
    SacInput bad = in;
    bad.gbar[0] = 1.0;
    bad.taus[0] = 0.1;
    CHECK_THROWS(sac_chi2(bad, cfg, {1.5}, M_PI));
}

static SacConfig small_cfg(uint64_t seed) {
    SacConfig cfg;
    cfg.n_delta = 100;
    cfg.grid_size = 1000;
    cfg.omega_max = 6.0;
    cfg.theta0 = 10.0;
    cfg.anneal_ratio = 1.4;
    cfg.sweeps_per_stage = 80;
    cfg.max_stages = 60;
    cfg.avg_sweeps = 600;
    cfg.out_bins = 100;
    cfg.seed = seed;
    return cfg;
}

TEST_CASE("a single sharp mode is recovered at the right frequency") {
    double beta = 8.0, w0 = 1.5;
    auto taus = quad_tau_grid(beta, 25);
    std::vector<double> g = delta_gtau(beta, taus, {w0}, {M_PI});  // G(0) = 1
    SacInput in = diag_input(beta, taus, g, 1e-5, 77);
    SacConfig cfg = small_cfg(3);
    SacResult r = sac_run(in, cfg);

    CHECK(r.a_total == doctest::Approx(M_PI * in.gbar[0]).epsilon(1e-12));
    double dw = r.omega[1] - r.omega[0], total = 0;
    for (double b : r.B) total += b * dw;
    CHECK(total == doctest::Approx(r.a_total).epsilon(1e-9));

    CHECK(spectrum_peak(r.omega, r.B) == doctest::Approx(w0).epsilon(0.08));
    CHECK(spectrum_peak(r.omega, r.B, true) == doctest::Approx(w0).epsilon(0.10));
    CHECK(mass_in(r, w0 - 0.5, w0 + 0.5) > 0.75 * r.a_total);
    CHECK(r.converged);
    CHECK(r.fit_ok);
    CHECK(r.chi2_per_dof < 2.0);
    CHECK(r.theta_star < cfg.theta0);
    for (size_t b = 0; b < r.B.size(); ++b) {
        CHECK(r.B[b] >= 0.0);
        CHECK(r.S[b] ==
              doctest::Approx(r.B[b] / (1 + std::exp(-beta * r.omega[b]))).epsilon(1e-12));
    }
    // the reconstruction tracks the data on the full tau grid
    REQUIRE(r.g_fit.size() == taus.size());
    CHECK(r.g_fit[0] == doctest::Approx(in.gbar[0]).epsilon(0.01));
    for (size_t t = 1; t < taus.size(); ++t)
        CHECK(r.g_fit[t] == doctest::Approx(in.gbar[t]).epsilon(0.02).scale(1e-4));
}

TEST_CASE("two separated modes split the spectral weight correctly") {
    double beta = 8.0;
    auto taus = quad_tau_grid(beta, 25);
    // noise above the omega-grid discretization floor, so chi2_min ~ dof
    std::vector<double> g = delta_gtau(beta, taus, {1.0, 3.0}, {0.65 * M_PI, 0.35 * M_PI});
    SacInput in = diag_input(beta, taus, g, 1e-4, 101);
    SacResult r = sac_run(in, small_cfg(5));

    double m_lo = mass_in(r, 0.5, 1.5), m_hi = mass_in(r, 2.5, 3.5);
    CHECK(m_lo == doctest::Approx(0.65 * M_PI).epsilon(0.25));
    CHECK(m_hi == doctest::Approx(0.35 * M_PI).epsilon(0.35));
    CHECK(m_lo + m_hi > 0.8 * r.a_total);
    CHECK(m_lo > m_hi);
    CHECK(r.converged);
    CHECK(r.fit_ok);
}

TEST_CASE("the infinite-theta prior is flat on the frequency window") {
    double beta = 8.0;
    auto taus = quad_tau_grid(beta, 25);
    std::vector<double> g = delta_gtau(beta, taus, {1.5}, {M_PI});
    SacInput in = diag_input(beta, taus, g, 1e-5, 55);
    SacConfig cfg = small_cfg(9);
    cfg.theta0 = 1e14;  // acceptance is 1: the entropic (uniform) measure
    cfg.max_stages = 1;
    cfg.sweeps_per_stage = 500;
    cfg.avg_sweeps = 1500;
    SacResult r = sac_run(in, cfg);

    double dw = r.omega[1] - r.omega[0], mean = 0, var = 0;
    for (size_t b = 0; b < r.B.size(); ++b) mean += r.omega[b] * r.B[b] * dw;
    mean /= r.a_total;
    for (size_t b = 0; b < r.B.size(); ++b)
        var += (r.omega[b] - mean) * (r.omega[b] - mean) * r.B[b] * dw;
    var /= r.a_total;
    // uniform on [0, 6]: mean 3, variance 3
    CHECK(mean == doctest::Approx(3.0).epsilon(0.2));
    CHECK(var > 1.8);
}
