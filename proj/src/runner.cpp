#include "triqmc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>

#include "triqmc/analysis.hpp"
#include "triqmc/ed.hpp"
#include "triqmc/io.hpp"
#include "triqmc/util.hpp"

namespace triqmc {

namespace {

// run `n` jobs on up to `nthreads` workers; worker exceptions rethrow here
void parallel_for(int nthreads, size_t n, const std::function<void(size_t)>& job) {
    int nt = (int)std::min<size_t>(std::max(1, nthreads), n);
    if (nt <= 1) {
        for (size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errs(nt);
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (size_t i; (i = next.fetch_add(1)) < n;) job(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

void apply_param(Manifest& m, const std::string& key, double v) {
    if (key == "omega") m.model.omega = v;
    else if (key == "u1") m.model.u[0] = v;
    else if (key == "u2") m.model.u[1] = v;
    else if (key == "u3") m.model.u[2] = v;
    else if (key == "beta") m.beta = v;
    else if (key == "sector") {
        m.sector_fixed = true;
        m.sector_f = v;
    } else {
        throw std::invalid_argument("not a scannable key: " + key);
    }
}

}  // namespace

RunOutput run_single(const Manifest& m, uint64_t stream_id, const std::string& dir,
                     bool write_files) {
    Lattice lat(m.lx, m.ly);
    CouplingTable tbl = coupling_table(m.model);
    double beta = m.beta_or_auto();
    SseChain chain(lat, tbl, beta, Rng::stream(m.seed, stream_id));
    if (m.sector_fixed) {
        chain.set_state(sector_reference(lat, m.sector_f));
        chain.lock_sector();
    }

    RunOutput out;
    out.res = sse_run(chain, m.therm, m.sweeps, m.bins, m.measure);
    out.energy = out.res.scalars.at("energy").mean();
    out.energy_err = out.res.scalars.at("energy").error();
    out.dir = dir;
    if (!write_files) return out;

    make_dirs(dir);
    Provenance p{m.hash(), m.seed, str_f("stream=%llu", (unsigned long long)stream_id)};
    write_scalar_bins(dir + "/bins.csv", p, out.res.scalars);
    write_scalar_summary(dir + "/summary.csv", p, out.res.scalars);

    if (m.measure.sgrid) {
        const auto& sm = out.res.vec_mean.at("sgrid");
        const auto& se = out.res.vec_err.at("sgrid");
        std::vector<std::vector<double>> rows;
        for (int n = 0; n < lat.Ly; ++n)
            for (int mm = 0; mm < lat.Lx; ++mm) {
                Vec2 q = lat.q_of(mm, n);
                size_t idx = mm + (size_t)lat.Lx * n;
                rows.push_back({(double)mm, (double)n, q.x, q.y, sm[idx], se[idx]});
            }
        write_csv(dir + "/sgrid.csv", p, {"m", "n", "qx", "qy", "s", "err"}, rows);
    }
    if (m.measure.corr) {
        auto to_cplx = [&](const char* re, const char* im) {
            const auto& rb = out.res.vec_bins.at(re);
            const auto& ib = out.res.vec_bins.at(im);
            std::vector<std::vector<cplx>> bins(rb.size());
            for (size_t b = 0; b < rb.size(); ++b)
                for (size_t k = 0; k < rb[b].size(); ++k)
                    bins[b].push_back({rb[b][k], ib[b][k]});
            return bins;
        };
        RkCorrTable t =
            rk_correlators(to_cplx("corr_E_re", "corr_E_im"), to_cplx("corr_R_re", "corr_R_im"));
        const auto& er = out.res.vec_mean.at("corr_E_re");
        const auto& ei = out.res.vec_mean.at("corr_E_im");
        const auto& rr = out.res.vec_mean.at("corr_R_re");
        const auto& ri = out.res.vec_mean.at("corr_R_im");
        std::vector<std::vector<double>> rows;
        for (size_t d = 0; d < t.dist.size(); ++d)
            rows.push_back({t.dist[d], t.ce[d], t.ce_err[d], t.cr[d], t.cr_err[d], er[d],
                            ei[d], rr[d], ri[d]});
        write_csv(dir + "/corr.csv", p,
                  {"dist", "e_abs", "e_err", "r_abs", "r_err", "e_re", "e_im", "r_re", "r_im"},
                  rows);
    }
    if (m.measure.psir) {
        std::vector<std::vector<double>> rows;
        for (const auto& s : out.res.psir_samples) rows.push_back({s[0], s[1]});
        write_csv(dir + "/psir.csv", p, {"re", "im"}, rows);
    }
    if (m.measure.gtau.enabled) write_gtau_archive(dir + "/gtau.arch", p, out.res.gtau);
    save_checkpoint(dir + "/checkpoint.chk", p, chain);
    return out;
}

void run_scan(const Manifest& m) {
    if (m.scan_key.empty()) throw std::invalid_argument("scan: manifest has no scan_key");
    size_t n = m.scan_values.size();
    std::vector<Manifest> pts(n, m);
    std::vector<std::string> dirs(n);
    for (size_t i = 0; i < n; ++i) {
        apply_param(pts[i], m.scan_key, m.scan_values[i]);
        if (!m.tie_key.empty())
            apply_param(pts[i], m.tie_key, m.tie_ratio * m.scan_values[i]);
        dirs[i] = m.outdir + str_f("/point_%03zu", i);
    }
    std::vector<RunOutput> res(n);
    parallel_for(m.threads, n, [&](size_t i) { res[i] = run_single(pts[i], i, dirs[i], true); });

    std::vector<std::string> cols = {"value"};
    for (const auto& [k, s] : res[0].res.scalars) {
        cols.push_back(k + "_mean");
        cols.push_back(k + "_err");
    }
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> row = {m.scan_values[i]};
        for (const auto& [k, s] : res[i].res.scalars) {
            row.push_back(s.mean());
            row.push_back(s.error());
        }
        rows.push_back(std::move(row));
    }
    make_dirs(m.outdir);
    Provenance p{m.hash(), m.seed, "scan_key=" + m.scan_key};
    write_csv(m.outdir + "/scan.csv", p, cols, rows);
}

void run_sac(const Manifest& m) {
    if (m.sac_archive.empty()) throw std::invalid_argument("sac: manifest has no sac_archive");
    GtauArchive g = read_gtau_archive(m.sac_archive);
    if (g.channels.empty()) throw std::runtime_error("sac: archive has no channels");
    Lattice lat(m.lx, m.ly);

    struct Chan {
        SacResult r;
        bool ok = false;
        std::string err;
    };
    std::vector<Chan> out(g.channels.size());
    parallel_for(m.threads, g.channels.size(), [&](size_t i) {
        try {
            SacInput in = sac_input_from_bins(g.beta, g.taus, g.channels[i].bins);
            SacConfig cfg = m.sac;
            cfg.seed = m.sac.seed + i;
            out[i].r = sac_run(in, cfg);
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].err = e.what();
        }
    });

    make_dirs(m.outdir);
    Provenance p{m.hash(), m.seed, "archive=" + m.sac_archive};
    std::vector<std::vector<double>> peaks;
    for (size_t i = 0; i < g.channels.size(); ++i) {
        const auto& ch = g.channels[i];
        if (!out[i].ok) {
            peaks.push_back({(double)i, ch.obs == "density" ? 1.0 : 0.0, (double)ch.m,
                             (double)ch.n, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
            continue;
        }
        const SacResult& r = out[i].r;
        std::vector<std::vector<double>> rows;
        for (size_t b = 0; b < r.omega.size(); ++b)
            rows.push_back({r.omega[b], r.B[b], r.S[b]});
        write_csv(m.outdir + str_f("/sac_%s_m%d_n%d.csv", ch.obs.c_str(), ch.m, ch.n), p,
                  {"omega", "B", "S"}, rows);
        Vec2 q = lat.q_of(ch.m, ch.n);
        peaks.push_back({(double)i, ch.obs == "density" ? 1.0 : 0.0, (double)ch.m,
                         (double)ch.n, q.x, q.y, lat.q_dist(q, lat.K()),
                         lat.q_dist(q, lat.Mp()), spectrum_peak(r.omega, r.S, false),
                         spectrum_peak(r.omega, r.S, true), r.a_total, r.chi2_min,
                         r.chi2_star, r.theta_star, r.chi2_per_dof, r.converged ? 1.0 : 0.0,
                         r.fit_ok ? 1.0 : 0.0});
    }
    write_csv(m.outdir + "/sac_peaks.csv", p,
              {"channel", "density", "m", "n", "qx", "qy", "dist_K", "dist_Mp", "peak_mode",
               "peak_moment", "a_total", "chi2_min", "chi2_star", "theta_star",
               "chi2_per_dof", "converged", "fit_ok"},
              peaks);
    for (size_t i = 0; i < out.size(); ++i)
        if (!out[i].ok)
            throw std::runtime_error(str_f("sac channel %zu failed: %s", i,
                                           out[i].err.c_str()));
}

void oracle_ed(const Manifest& m) {
    Lattice lat(m.lx, m.ly);
    CouplingTable tbl = coupling_table(m.model);
    DenseSpectrum sp = ed_solve(lat, tbl);

    std::vector<double> betas;
    if (m.scan_key == "beta")
        betas = m.scan_values;
    else
        betas.push_back(m.beta_or_auto());

    std::vector<std::vector<double>> rows;
    for (double beta : betas) {
        auto sK = [&](uint64_t b) { return basis_structure_factor(b, lat, lat.K()); };
        auto sM = [&](uint64_t b) { return basis_structure_factor(b, lat, lat.M()); };
        auto sMp = [&](uint64_t b) { return basis_structure_factor(b, lat, lat.Mp()); };
        rows.push_back({beta, sp.thermal_energy(beta), sp.ground_energy(),
                        sp.thermal_diag_expectation(beta, sK),
                        sp.thermal_diag_expectation(beta, sM),
                        sp.thermal_diag_expectation(beta, sMp)});
    }
    make_dirs(m.outdir);
    Provenance p{m.hash(), m.seed, str_f("ed %dx%d", m.lx, m.ly)};
    write_csv(m.outdir + "/ed.csv", p,
              {"beta", "e_thermal", "e_ground", "s_K", "s_M", "s_Mp"}, rows);
}

RkRunResult oracle_rk(const Manifest& m, bool write_files) {
    Lattice lat(m.lx, m.ly);
    SectorPolicy pol = m.sector_fixed ? SectorPolicy::Fixed : SectorPolicy::Free;
    RkRunResult r =
        rk_run(lat, pol, m.sector_f, m.seed, m.therm, m.sweeps, m.rk_worms, m.bins);
    if (!write_files) return r;

    make_dirs(m.outdir);
    Provenance p{m.hash(), m.seed,
                 str_f("rk %dx%d policy=%s", m.lx, m.ly, m.sector_fixed ? "fixed" : "free")};
    std::vector<std::vector<double>> rows;
    for (size_t d = 0; d < r.corr.dist.size(); ++d)
        rows.push_back({r.corr.dist[d], r.corr.ce[d], r.corr.ce_err[d], r.corr.cr[d],
                        r.corr.cr_err[d]});
    write_csv(m.outdir + "/rk_corr.csv", p, {"dist", "e_abs", "e_err", "r_abs", "r_err"},
              rows);

    double rmin = 2.0, rmax = lat.Lx / 4.0;
    PowerLawFit fe = fit_power_law(r.corr.dist, r.corr.ce, r.corr.ce_err, rmin, rmax);
    PowerLawFit fr = fit_power_law(r.corr.dist, r.corr.cr, r.corr.cr_err, rmin, rmax);
    write_csv(m.outdir + "/rk_fits.csv", p,
              {"channel", "exponent", "exponent_err", "amplitude", "chi2", "npoints", "ok"},
              {{0, fe.exponent, fe.exponent_err, fe.amplitude, fe.chi2, (double)fe.npoints,
                fe.ok ? 1.0 : 0.0},
               {1, fr.exponent, fr.exponent_err, fr.amplitude, fr.chi2, (double)fr.npoints,
                fr.ok ? 1.0 : 0.0}});

    std::vector<std::vector<double>> srows;
    for (const auto& [fx_fy, cnt] : r.sector_counts)
        srows.push_back({(double)fx_fy[0], (double)fx_fy[1], (double)cnt});
    write_csv(m.outdir + "/rk_sectors.csv", p, {"fx", "fy", "count"}, srows);
    write_csv(m.outdir + "/rk_stats.csv", p, {"mean_worm_len", "accepted", "attempted"},
              {{r.mean_worm_len, (double)r.accepted, (double)r.attempted}});
    return r;
}

}  // namespace triqmc
