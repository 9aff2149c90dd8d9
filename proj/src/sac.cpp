#include "triqmc/sac.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace triqmc {

double sac_kernel(double tau, double omega, double beta) {
    return (std::exp(-tau * omega) + std::exp(-(beta - tau) * omega)) /
           (M_PI * (1.0 + std::exp(-beta * omega)));
}

SacInput sac_input_from_bins(double beta, const std::vector<double>& taus,
                             const std::vector<std::vector<double>>& bins) {
    size_t nb = bins.size(), nt = taus.size();
    if (nb < 2) throw std::invalid_argument("sac_input_from_bins: need >= 2 bins");
    SacInput in;
    in.beta = beta;
    in.taus = taus;
    in.gbar.assign(nt, 0.0);
    for (const auto& b : bins)
        for (size_t i = 0; i < nt; ++i) in.gbar[i] += b[i];
    for (auto& g : in.gbar) g /= nb;
    in.cov.assign(nt, std::vector<double>(nt, 0.0));
    for (const auto& b : bins)
        for (size_t i = 0; i < nt; ++i)
            for (size_t j = 0; j <= i; ++j)
                in.cov[i][j] += (b[i] - in.gbar[i]) * (b[j] - in.gbar[j]);
    for (size_t i = 0; i < nt; ++i)
        for (size_t j = 0; j <= i; ++j)
            in.cov[j][i] = in.cov[i][j] /= nb * (nb - 1.0);
    return in;
}

namespace {

// fit-space setup: tau = 0 dropped, covariance rotated to its eigenbasis
// with a relative floor on the eigenvalues
struct Problem {
    int nf = 0;             // fitted tau points
    std::vector<double> tf; // their taus
    std::vector<double> lam_inv;
    std::vector<double> V;  // col-major eigenvectors, nf x nf
    std::vector<double> d;  // rotated data
    double a_total = 0;

    Problem(const SacInput& in, double eig_floor) {
        int nt = (int)in.taus.size();
        if (nt < 3 || in.taus[0] != 0.0)
            throw std::invalid_argument("sac: tau grid must start at 0");
        if (in.gbar[0] <= 0) throw std::invalid_argument("sac: G(0) <= 0");
        a_total = M_PI * in.gbar[0];
        nf = nt - 1;
        tf.assign(in.taus.begin() + 1, in.taus.end());
        V.resize((size_t)nf * nf);
        for (int j = 0; j < nf; ++j)
            for (int i = 0; i < nf; ++i) V[(size_t)j * nf + i] = in.cov[i + 1][j + 1];
        std::vector<double> lam(nf);
        int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', nf, V.data(), nf, lam.data());
        if (info != 0) throw std::runtime_error("sac: covariance eigensolve failed");
        double floor = std::max(lam[nf - 1], 0.0) * eig_floor;
        if (floor <= 0) throw std::runtime_error("sac: covariance has no positive eigenvalue");
        lam_inv.resize(nf);
        for (int k = 0; k < nf; ++k) lam_inv[k] = 1.0 / std::max(lam[k], floor);
        d.assign(nf, 0.0);
        for (int k = 0; k < nf; ++k)
            for (int i = 0; i < nf; ++i) d[k] += V[(size_t)k * nf + i] * in.gbar[i + 1];
    }

    // rotate a model vector and take chi^2 against d
    double chi2_of_model(const std::vector<double>& m) const {
        double c = 0;
        for (int k = 0; k < nf; ++k) {
            double mk = 0;
            for (int i = 0; i < nf; ++i) mk += V[(size_t)k * nf + i] * m[i];
            double r = mk - d[k];
            c += r * r * lam_inv[k];
        }
        return c;
    }
};

double guess_omega_max(const SacInput& in) {
    // slope of log G over the early decay sets the bandwidth scale
    double best = 0;
    int nt = (int)in.taus.size();
    for (int i = 1; i + 1 < nt; ++i) {
        if (in.taus[i + 1] > in.beta / 4 && i > 1) break;
        if (in.gbar[i] > 0 && in.gbar[i + 1] > 0 && in.gbar[i] > in.gbar[i + 1]) {
            double s = std::log(in.gbar[i] / in.gbar[i + 1]) /
                       (in.taus[i + 1] - in.taus[i]);
            best = std::max(best, s);
        }
    }
    return 10.0 * std::max(best, 1.0 / in.beta);
}

}  // namespace

double sac_chi2(const SacInput& in, const SacConfig& cfg,
                const std::vector<double>& omegas, double a_each) {
    Problem pb(in, cfg.eig_floor);
    std::vector<double> m(pb.nf, 0.0);
    for (double w : omegas)
        for (int i = 0; i < pb.nf; ++i) m[i] += a_each * sac_kernel(pb.tf[i], w, in.beta);
    return pb.chi2_of_model(m);
}

SacResult sac_run(const SacInput& in, const SacConfig& cfg) {
    Problem pb(in, cfg.eig_floor);
    const int nf = pb.nf, nd = cfg.n_delta, M = cfg.grid_size;
    const double beta = in.beta;
    const double wmax = cfg.omega_max > 0 ? cfg.omega_max : guess_omega_max(in);
    const double a = pb.a_total / nd;
    Rng rng(cfg.seed);

    // rotated kernel column per grid point, layout g*nf + k
    std::vector<double> kt((size_t)M * nf);
    {
        std::vector<double> kappa(nf);
        for (int g = 0; g < M; ++g) {
            double w = wmax * g / (M - 1);
            for (int i = 0; i < nf; ++i) kappa[i] = sac_kernel(pb.tf[i], w, beta);
            for (int k = 0; k < nf; ++k) {
                double s = 0;
                for (int i = 0; i < nf; ++i) s += pb.V[(size_t)k * nf + i] * kappa[i];
                kt[(size_t)g * nf + k] = s;
            }
        }
    }

    std::vector<int> gpos(nd);
    for (int i = 0; i < nd; ++i) gpos[i] = (int)(((i + 0.5) * M) / nd);
    std::vector<double> R(nf);
    double chi2 = 0;
    auto resync = [&]() {
        std::fill(R.begin(), R.end(), 0.0);
        for (int i = 0; i < nd; ++i) {
            const double* col = &kt[(size_t)gpos[i] * nf];
            for (int k = 0; k < nf; ++k) R[k] += a * col[k];
        }
        chi2 = 0;
        for (int k = 0; k < nf; ++k) {
            R[k] -= pb.d[k];
            chi2 += R[k] * R[k] * pb.lam_inv[k];
        }
    };
    resync();

    double chi2_min = chi2;
    double theta = cfg.theta0 > 0 ? cfg.theta0 : std::max(1.0, chi2);
    int window = std::max(2, M / 10);
    std::vector<double> dR(nf);

    long acc = 0, tries = 0;
    auto try_single = [&](double th) {
        int i = (int)rng.below(nd);
        int g0 = gpos[i];
        int g1 = g0 + (int)rng.below(2 * window + 1) - window;
        if (g1 < 0 || g1 >= M || g1 == g0) return;
        ++tries;
        const double* c0 = &kt[(size_t)g0 * nf];
        const double* c1 = &kt[(size_t)g1 * nf];
        double dchi = 0;
        for (int k = 0; k < nf; ++k) {
            double dr = a * (c1[k] - c0[k]);
            dR[k] = dr;
            dchi += (2 * R[k] + dr) * dr * pb.lam_inv[k];
        }
        if (dchi <= 0 || rng.u01() < std::exp(-dchi / (2 * th))) {
            for (int k = 0; k < nf; ++k) R[k] += dR[k];
            chi2 += dchi;
            gpos[i] = g1;
            ++acc;
            if (chi2 < chi2_min) chi2_min = chi2;
        }
    };
    auto try_pair = [&](double th) {
        int i = (int)rng.below(nd), j = (int)rng.below(nd);
        if (i == j) return;
        int s = (int)rng.below(window) + 1;
        if (rng.coin()) s = -s;
        int gi = gpos[i] + s, gj = gpos[j] - s;
        if (gi < 0 || gi >= M || gj < 0 || gj >= M) return;
        ++tries;
        const double* ci0 = &kt[(size_t)gpos[i] * nf];
        const double* cj0 = &kt[(size_t)gpos[j] * nf];
        const double* ci1 = &kt[(size_t)gi * nf];
        const double* cj1 = &kt[(size_t)gj * nf];
        double dchi = 0;
        for (int k = 0; k < nf; ++k) {
            double dr = a * (ci1[k] - ci0[k] + cj1[k] - cj0[k]);
            dR[k] = dr;
            dchi += (2 * R[k] + dr) * dr * pb.lam_inv[k];
        }
        if (dchi <= 0 || rng.u01() < std::exp(-dchi / (2 * th))) {
            for (int k = 0; k < nf; ++k) R[k] += dR[k];
            chi2 += dchi;
            gpos[i] = gi;
            gpos[j] = gj;
            ++acc;
            if (chi2 < chi2_min) chi2_min = chi2;
        }
    };
    auto sweep = [&](double th) {
        for (int m = 0; m < nd; ++m) try_single(th);
        for (int m = 0; m < nd / 2; ++m) try_pair(th);
    };
    auto run_stage = [&](double th, int nsweeps) {
        resync();
        acc = tries = 0;
        double avg = 0;
        for (int s = 0; s < nsweeps; ++s) {
            sweep(th);
            avg += chi2;
        }
        double rate = tries ? (double)acc / tries : 0.0;
        if (rate > 0.6)
            window = std::min(M, window * 4 / 3 + 1);
        else if (rate < 0.4)
            window = std::max(2, window * 3 / 4);
        return avg / nsweeps;
    };

    std::vector<double> thetas, stage_avg, min_after;
    for (int st = 0; st < cfg.max_stages; ++st) {
        double av = run_stage(theta, cfg.sweeps_per_stage);
        thetas.push_back(theta);
        stage_avg.push_back(av);
        min_after.push_back(chi2_min);
        theta /= cfg.anneal_ratio;
    }

    SacResult out;
    out.chi2_min = chi2_min;
    // plateau check: the running minimum must stop improving well before the
    // final stage
    int cut = (int)(0.8 * cfg.max_stages);
    out.converged = min_after[cut] <= chi2_min * 1.01 + 0.01;

    double target = chi2_min + cfg.a_criterion * std::sqrt(2.0 * chi2_min);
    int star = cfg.max_stages - 1;
    for (int st = 0; st < cfg.max_stages; ++st)
        if (stage_avg[st] <= target) {
            star = st;
            break;
        }
    out.theta_star = thetas[star];

    // re-equilibrate at theta* and accumulate the averaged spectrum
    run_stage(out.theta_star, 2 * cfg.sweeps_per_stage);
    std::vector<double> occ(M, 0.0);
    double avg2 = 0;
    for (int s = 0; s < cfg.avg_sweeps; ++s) {
        sweep(out.theta_star);
        avg2 += chi2;
        for (int i = 0; i < nd; ++i) occ[gpos[i]] += 1.0;
    }
    out.chi2_star = avg2 / cfg.avg_sweeps;
    for (auto& o : occ) o *= a / cfg.avg_sweeps;  // weight per grid point

    out.a_total = pb.a_total;
    double dw_out = wmax / cfg.out_bins;
    out.omega.resize(cfg.out_bins);
    out.B.assign(cfg.out_bins, 0.0);
    out.S.assign(cfg.out_bins, 0.0);
    for (int b = 0; b < cfg.out_bins; ++b) out.omega[b] = (b + 0.5) * dw_out;
    for (int g = 0; g < M; ++g) {
        int b = std::min(cfg.out_bins - 1, (int)((size_t)g * cfg.out_bins / M));
        out.B[b] += occ[g] / dw_out;
    }
    for (int b = 0; b < cfg.out_bins; ++b)
        out.S[b] = out.B[b] / (1.0 + std::exp(-beta * out.omega[b]));

    // fidelity of the averaged spectrum on the full tau grid
    out.g_fit.assign(in.taus.size(), 0.0);
    std::vector<double> m(nf, 0.0);
    for (int g = 0; g < M; ++g) {
        if (occ[g] == 0) continue;
        double w = wmax * g / (M - 1);
        for (size_t t = 0; t < in.taus.size(); ++t)
            out.g_fit[t] += occ[g] * sac_kernel(in.taus[t], w, beta);
        for (int i = 0; i < nf; ++i) m[i] += occ[g] * sac_kernel(pb.tf[i], w, beta);
    }
    out.chi2_per_dof = pb.chi2_of_model(m) / nf;
    out.fit_ok = out.chi2_per_dof <= 2.0;
    return out;
}

}  // namespace triqmc
