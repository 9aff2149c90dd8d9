#include "triqmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace triqmc {

LineFit fit_line_wls(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& yerr) {
    LineFit f;
    size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (yerr.size() == n && yerr[i] > 0) w = 1.0 / (yerr[i] * yerr[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    double det = sw * sxx - sx * sx;
    if (det <= 0) return f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.slope_err = std::sqrt(sw / det);
    f.intercept_err = std::sqrt(sxx / det);
    for (size_t i = 0; i < n; ++i) {
        double w = (yerr.size() == n && yerr[i] > 0) ? 1.0 / (yerr[i] * yerr[i]) : 1.0;
        double r = y[i] - f.slope * x[i] - f.intercept;
        f.chi2 += w * r * r;
    }
    f.npoints = (int)n;
    f.ok = true;
    return f;
}

Crossing find_crossing(const std::vector<double>& x, const std::vector<double>& d,
                       const std::vector<double>& derr) {
    Crossing c;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        if (d[i] == 0) {
            c = {x[i], 0.0, true};
            return c;
        }
        if (d[i] * d[i + 1] < 0) {
            double t = d[i] / (d[i] - d[i + 1]);
            c.x = x[i] + t * (x[i + 1] - x[i]);
            if (derr.size() == x.size()) {
                // first-order propagation through the interpolation
                double den = d[i] - d[i + 1];
                double dtd0 = -d[i + 1] / (den * den);
                double dtd1 = d[i] / (den * den);
                double dx = x[i + 1] - x[i];
                c.err = std::hypot(dtd0 * derr[i], dtd1 * derr[i + 1]) * std::fabs(dx);
            }
            c.found = true;
            return c;
        }
    }
    if (!x.empty() && d.back() == 0) c = {x.back(), 0.0, true};
    return c;
}

MulticriticalResult locate_multicritical(const std::vector<int>& Ls,
                                         const std::vector<LinePoints>& boundary_a,
                                         const std::vector<LinePoints>& boundary_b) {
    MulticriticalResult res;
    size_t ns = Ls.size();
    if (ns < 1 || boundary_a.size() != ns || boundary_b.size() != ns) return res;
    std::vector<double> u2s, u3s;
    for (size_t s = 0; s < ns; ++s) {
        LineFit fa = fit_line_wls(boundary_a[s].x, boundary_a[s].y, {});
        LineFit fb = fit_line_wls(boundary_b[s].x, boundary_b[s].y, {});
        if (!fa.ok || !fb.ok || fa.slope == fb.slope) return res;
        double xc = (fb.intercept - fa.intercept) / (fa.slope - fb.slope);
        double yc = fa.slope * xc + fa.intercept;
        res.inv_L.push_back(1.0 / Ls[s]);
        res.per_size.push_back({xc, yc});
        u2s.push_back(xc);
        u3s.push_back(yc);
    }
    if (ns == 1) {
        res.u2c = u2s[0];
        res.u3c = u3s[0];
    } else {
        LineFit e2 = fit_line_wls(res.inv_L, u2s, {});
        LineFit e3 = fit_line_wls(res.inv_L, u3s, {});
        if (!e2.ok || !e3.ok) return res;
        res.u2c = e2.intercept;
        res.u3c = e3.intercept;
    }
    res.ok = true;
    return res;
}

PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& c,
                          const std::vector<double>& cerr, double rmin, double rmax) {
    std::vector<double> lx, ly, le;
    for (size_t i = 0; i < r.size(); ++i) {
        if (r[i] < rmin || r[i] > rmax || c[i] <= 0) continue;
        lx.push_back(std::log(r[i]));
        ly.push_back(std::log(c[i]));
        le.push_back(cerr.size() == r.size() && cerr[i] > 0 ? cerr[i] / c[i] : 0.0);
    }
    PowerLawFit f;
    LineFit lf = fit_line_wls(lx, ly, le);
    if (!lf.ok) return f;
    f.amplitude = std::exp(lf.intercept);
    f.exponent = -lf.slope;
    f.exponent_err = lf.slope_err;
    f.chi2 = lf.chi2;
    f.npoints = lf.npoints;
    f.ok = true;
    return f;
}

CurvatureFit fit_curvature(const std::vector<double>& qdist, const std::vector<double>& omega,
                           const std::vector<double>& omega_err, double window) {
    CurvatureFit f;
    double sxx = 0, sxy = 0;
    std::vector<size_t> used;
    for (size_t i = 0; i < qdist.size(); ++i) {
        if (std::fabs(qdist[i]) > window) continue;
        double x = qdist[i] * qdist[i] / 2.0;
        double w = omega_err.size() == qdist.size() && omega_err[i] > 0
                       ? 1.0 / (omega_err[i] * omega_err[i])
                       : 1.0;
        sxx += w * x * x;
        sxy += w * x * omega[i];
        used.push_back(i);
    }
    if (used.size() < 1 || sxx <= 0) return f;
    f.c2 = sxy / sxx;
    f.c2_err = std::sqrt(1.0 / sxx);
    double ss = 0;
    for (size_t i : used) {
        double d = omega[i] - f.c2 * qdist[i] * qdist[i] / 2.0;
        ss += d * d;
    }
    f.residual = std::sqrt(ss / used.size());
    f.npoints = (int)used.size();
    f.ok = true;
    return f;
}

double spectrum_peak(const std::vector<double>& omega, const std::vector<double>& s,
                     bool first_moment) {
    if (omega.empty()) return 0;
    if (first_moment) {
        double m0 = 0, m1 = 0;
        for (size_t i = 0; i < omega.size(); ++i) {
            m0 += s[i];
            m1 += s[i] * omega[i];
        }
        return m0 > 0 ? m1 / m0 : 0.0;
    }
    size_t best = 0;
    for (size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[best]) best = i;
    return omega[best];
}

PsiHistogram histogram_order_parameter(const std::vector<std::array<double, 2>>& samples,
                                       int nbins) {
    PsiHistogram h;
    h.nbins = nbins;
    if (samples.empty() || nbins < 2) return h;
    double rmax = 0;
    for (const auto& s : samples) rmax = std::max(rmax, std::hypot(s[0], s[1]));
    h.extent = rmax > 0 ? 1.05 * rmax : 1.0;
    h.density.assign((size_t)nbins * nbins, 0.0);
    h.angular.assign(72, 0.0);

    std::complex<double> z6 = 0;
    double wsum = 0, rsum = 0;
    double cell = 2 * h.extent / nbins;
    for (const auto& s : samples) {
        int ix = (int)((s[0] + h.extent) / cell);
        int iy = (int)((s[1] + h.extent) / cell);
        ix = std::clamp(ix, 0, nbins - 1);
        iy = std::clamp(iy, 0, nbins - 1);
        h.density[(size_t)iy * nbins + ix] += 1.0;
        double rr = std::hypot(s[0], s[1]);
        rsum += rr;
        if (rr > 0) {
            double th = std::atan2(s[1], s[0]);
            z6 += rr * std::polar(1.0, 6.0 * th);
            wsum += rr;
            int ab = (int)((th + M_PI) / (2 * M_PI) * 72);
            h.angular[std::clamp(ab, 0, 71)] += rr;
        }
    }
    double norm = samples.size() * cell * cell;
    for (auto& d : h.density) d /= norm;
    h.mean_abs = rsum / samples.size();
    h.anisotropy = wsum > 0 ? std::abs(z6) / wsum : 0.0;

    // circular +-2 bin smoothing, then count peaks clearly above the mean
    std::vector<double> sm(72, 0.0);
    for (int i = 0; i < 72; ++i)
        for (int k = -2; k <= 2; ++k) sm[i] += h.angular[(i + k + 72) % 72] / 5.0;
    double mean = 0;
    for (double v : sm) mean += v / 72.0;
    for (int i = 0; i < 72; ++i) {
        double l = sm[(i + 71) % 72], rgt = sm[(i + 1) % 72];
        if (sm[i] >= l && sm[i] > rgt && sm[i] > 1.5 * mean) ++h.angular_maxima;
    }
    return h;
}

}  // namespace triqmc
