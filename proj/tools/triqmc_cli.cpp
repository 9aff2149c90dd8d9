#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "triqmc/analysis.hpp"
#include "triqmc/io.hpp"
#include "triqmc/manifest.hpp"
#include "triqmc/runner.hpp"
#include "triqmc/util.hpp"

using namespace triqmc;

namespace {

struct CommonOpts {
    std::string manifest_path;
    long long seed = -1;
    std::string outdir;
    int threads = 0;
    std::string sector;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool manifest_required = true) {
    auto* mo = cmd->add_option("--manifest", o.manifest_path, "manifest file");
    if (manifest_required) mo->required();
    cmd->add_option("--seed", o.seed, "override manifest seed");
    cmd->add_option("--out", o.outdir, "override output directory");
    cmd->add_option("--threads", o.threads, "override worker thread count");
    cmd->add_option("--sector", o.sector, "override sector: 'free' or a flux density f");
}

Manifest load(const CommonOpts& o) {
    Manifest m = parse_manifest_file(o.manifest_path);
    if (o.seed >= 0) m.seed = (uint64_t)o.seed;
    if (!o.outdir.empty()) m.outdir = o.outdir;
    if (o.threads > 0) m.threads = o.threads;
    if (!o.sector.empty()) {
        if (o.sector == "free") {
            m.sector_fixed = false;
        } else {
            m.sector_fixed = true;
            m.sector_f = std::stod(o.sector);
        }
    }
    return m;
}

int cmd_analyze_powerlaw(const std::string& in, const std::string& col_r,
                         const std::string& col_c, const std::string& col_e, double rmin,
                         double rmax) {
    CsvTable t = read_csv(in);
    auto r = t.col(col_r);
    auto c = t.col(col_c);
    std::vector<double> e;
    if (!col_e.empty() && t.has(col_e)) e = t.col(col_e);
    if (rmax <= 0) {
        double top = 0;
        for (double v : r) top = std::max(top, v);
        rmax = top / 2.0;
    }
    PowerLawFit f = fit_power_law(r, c, e, rmin, rmax);
    if (!f.ok) {
        std::fprintf(stderr, "powerlaw: fit failed (fewer than 2 usable points)\n");
        return 1;
    }
    std::printf("exponent %.6g +- %.2g  amplitude %.6g  chi2 %.4g  npoints %d  window [%g, %g]\n",
                f.exponent, f.exponent_err, f.amplitude, f.chi2, f.npoints, rmin, rmax);
    return 0;
}

int cmd_analyze_curvature(const std::string& in, const std::string& col_q,
                          const std::string& col_w, const std::string& col_e, double window) {
    CsvTable t = read_csv(in);
    auto q = t.col(col_q);
    auto w = t.col(col_w);
    std::vector<double> e;
    if (!col_e.empty() && t.has(col_e)) e = t.col(col_e);
    CurvatureFit f = fit_curvature(q, w, e, window);
    if (!f.ok) {
        std::fprintf(stderr, "curvature: no points inside window %g\n", window);
        return 1;
    }
    std::printf("c2 %.6g +- %.2g  rms_residual %.4g  npoints %d\n", f.c2, f.c2_err,
                f.residual, f.npoints);
    return 0;
}

int cmd_analyze_histogram(const std::string& in, int nbins, const std::string& outdir) {
    CsvTable t = read_csv(in);
    auto re = t.col("re");
    auto im = t.col("im");
    std::vector<std::array<double, 2>> samples(re.size());
    for (size_t i = 0; i < re.size(); ++i) samples[i] = {re[i], im[i]};
    PsiHistogram h = histogram_order_parameter(samples, nbins);
    std::printf("samples %zu  anisotropy %.4f  angular_maxima %d  mean_abs %.6g\n",
                samples.size(), h.anisotropy, h.angular_maxima, h.mean_abs);
    if (!outdir.empty()) {
        make_dirs(outdir);
        Provenance p{fnv1a(in.data(), in.size()), 0, "histogram of " + in};
        std::vector<std::vector<double>> rows;
        double cell = 2 * h.extent / h.nbins;
        for (int y = 0; y < h.nbins; ++y)
            for (int x = 0; x < h.nbins; ++x)
                rows.push_back({-h.extent + (x + 0.5) * cell, -h.extent + (y + 0.5) * cell,
                                h.density[(size_t)y * h.nbins + x]});
        write_csv(outdir + "/psir_hist.csv", p, {"re", "im", "density"}, rows);
    }
    return 0;
}

int cmd_analyze_multicritical(const std::string& in) {
    // columns: L, x, y, line (0 = clock-stripe points, 1 = stripe-intermediate)
    CsvTable t = read_csv(in);
    auto L = t.col("L");
    auto x = t.col("x");
    auto y = t.col("y");
    auto ln = t.col("line");
    std::vector<int> Ls;
    std::vector<LinePoints> a, b;
    for (size_t i = 0; i < L.size(); ++i) {
        int Li = (int)L[i];
        size_t s = 0;
        for (; s < Ls.size(); ++s)
            if (Ls[s] == Li) break;
        if (s == Ls.size()) {
            Ls.push_back(Li);
            a.emplace_back();
            b.emplace_back();
        }
        LinePoints& dst = ln[i] == 0 ? a[s] : b[s];
        dst.x.push_back(x[i]);
        dst.y.push_back(y[i]);
    }
    MulticriticalResult r = locate_multicritical(Ls, a, b);
    if (!r.ok) {
        std::fprintf(stderr, "multicritical: degenerate boundary lines\n");
        return 1;
    }
    for (size_t s = 0; s < Ls.size(); ++s)
        std::printf("L %d  crossing (%.6g, %.6g)\n", Ls[s], r.per_size[s][0],
                    r.per_size[s][1]);
    std::printf("extrapolated u2c %.6g  u3c %.6g\n", r.u2c, r.u3c);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triangular-lattice gauge QMC toolkit"};
    app.require_subcommand(1);

    CommonOpts run_o, scan_o, sac_o, ed_o, rk_o;
    auto* run = app.add_subcommand("run", "single chain from a manifest");
    add_common(run, run_o);
    auto* scan = app.add_subcommand("scan", "parameter scan from a manifest");
    add_common(scan, scan_o);
    auto* sac = app.add_subcommand("sac", "continue an imaginary-time archive to spectra");
    add_common(sac, sac_o);

    auto* oracle = app.add_subcommand("oracle", "reference computations");
    oracle->require_subcommand(1);
    auto* oed = oracle->add_subcommand("ed", "dense-spectrum reference tables");
    add_common(oed, ed_o);
    auto* ork = oracle->add_subcommand("rk", "dimer-cover sampling reference");
    add_common(ork, rk_o);

    auto* an = app.add_subcommand("analyze", "post-processing fits");
    an->require_subcommand(1);

    std::string pl_in, pl_r = "dist", pl_c = "e_abs", pl_e = "e_err";
    double pl_rmin = 2, pl_rmax = 0;
    auto* pl = an->add_subcommand("powerlaw", "log-log power-law fit of a correlator table");
    pl->add_option("--in", pl_in, "correlator csv")->required();
    pl->add_option("--col-r", pl_r, "distance column");
    pl->add_option("--col-c", pl_c, "value column");
    pl->add_option("--col-err", pl_e, "error column ('' for unweighted)");
    pl->add_option("--rmin", pl_rmin, "fit window lower edge");
    pl->add_option("--rmax", pl_rmax, "fit window upper edge (0: half the max distance)");

    std::string cv_in, cv_q = "dist_K", cv_w = "peak_mode", cv_e;
    double cv_window = 1.6;
    auto* cv = an->add_subcommand("curvature", "quadratic dispersion fit around a point");
    cv->add_option("--in", cv_in, "peaks csv")->required();
    cv->add_option("--col-q", cv_q, "momentum distance column");
    cv->add_option("--col-w", cv_w, "frequency column");
    cv->add_option("--col-err", cv_e, "error column");
    cv->add_option("--window", cv_window, "max |q - q0|");

    std::string hg_in, hg_out;
    int hg_bins = 64;
    auto* hg = an->add_subcommand("histogram", "order-parameter histogram and anisotropy");
    hg->add_option("--in", hg_in, "psir samples csv")->required();
    hg->add_option("--bins", hg_bins, "2d bins per axis");
    hg->add_option("--out", hg_out, "directory for the binned density table");

    std::string mc_in;
    auto* mc = an->add_subcommand("multicritical", "boundary-line intersection + 1/L limit");
    mc->add_option("--in", mc_in, "boundary points csv (L,x,y,line)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            Manifest m = load(run_o);
            RunOutput out = run_single(m, 0, m.outdir, true);
            std::printf("energy %.8g +- %.2g  (equilibrated %d)  -> %s\n", out.energy,
                        out.energy_err, out.res.equilibrated ? 1 : 0, out.dir.c_str());
        } else if (scan->parsed()) {
            Manifest m = load(scan_o);
            run_scan(m);
            std::printf("scan of %s over %zu points -> %s/scan.csv\n", m.scan_key.c_str(),
                        m.scan_values.size(), m.outdir.c_str());
        } else if (sac->parsed()) {
            Manifest m = load(sac_o);
            run_sac(m);
            std::printf("spectra -> %s\n", m.outdir.c_str());
        } else if (oed->parsed()) {
            Manifest m = load(ed_o);
            oracle_ed(m);
            std::printf("ed tables -> %s/ed.csv\n", m.outdir.c_str());
        } else if (ork->parsed()) {
            Manifest m = load(rk_o);
            RkRunResult r = oracle_rk(m, true);
            std::printf("covers sampled, mean worm length %.1f, accept %.3f -> %s\n",
                        r.mean_worm_len,
                        r.attempted ? (double)r.accepted / r.attempted : 0.0,
                        m.outdir.c_str());
        } else if (pl->parsed()) {
            return cmd_analyze_powerlaw(pl_in, pl_r, pl_c, pl_e, pl_rmin, pl_rmax);
        } else if (cv->parsed()) {
            return cmd_analyze_curvature(cv_in, cv_q, cv_w, cv_e, cv_window);
        } else if (hg->parsed()) {
            return cmd_analyze_histogram(hg_in, hg_bins, hg_out);
        } else if (mc->parsed()) {
            return cmd_analyze_multicritical(mc_in);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
