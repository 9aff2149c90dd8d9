#pragma once

#include <array>
#include <vector>

namespace triqmc {

struct LineFit {
    double slope = 0, intercept = 0;
    double slope_err = 0, intercept_err = 0;
    double chi2 = 0;
    int npoints = 0;
    bool ok = false;
};

// weighted least squares y = slope x + intercept; weights 1/err^2 (unit
// weights where err is empty or zero)
LineFit fit_line_wls(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& yerr);

struct Crossing {
    double x = 0, err = 0;
    bool found = false;
};

// zero of d(x) by linear interpolation across the first sign-changing pair
Crossing find_crossing(const std::vector<double>& x, const std::vector<double>& d,
                       const std::vector<double>& derr);

// sampled points of a phase-boundary line in the coupling plane
struct LinePoints {
    std::vector<double> x, y;
};

struct MulticriticalResult {
    std::vector<double> inv_L;
    std::vector<std::array<double, 2>> per_size;  // line intersection per L
    double u2c = 0, u3c = 0;                      // 1/L -> 0 extrapolation
    bool ok = false;
};

// per size: intersect the two boundary lines (least-squares lines through
// the sampled points); then extrapolate both coordinates linearly in 1/L.
// Exact for synthetic data lying on straight lines.
MulticriticalResult locate_multicritical(const std::vector<int>& Ls,
                                         const std::vector<LinePoints>& boundary_a,
                                         const std::vector<LinePoints>& boundary_b);

struct PowerLawFit {
    double amplitude = 0, exponent = 0, exponent_err = 0;
    double chi2 = 0;
    int npoints = 0;
    bool ok = false;
};

// C(r) ~ amplitude * r^(-exponent), weighted log-log least squares over
// rmin <= r <= rmax; points with c <= 0 are skipped
PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& c,
                          const std::vector<double>& cerr, double rmin, double rmax);

struct CurvatureFit {
    double c2 = 0, c2_err = 0;
    double residual = 0;  // rms of omega - c2 q^2 / 2
    int npoints = 0;
    bool ok = false;
};

// omega(q) = c2 q^2 / 2 through the origin, |q| <= window
CurvatureFit fit_curvature(const std::vector<double>& qdist, const std::vector<double>& omega,
                           const std::vector<double>& omega_err, double window);

// peak position of a spectrum: mode by default, first moment optionally
double spectrum_peak(const std::vector<double>& omega, const std::vector<double>& s,
                     bool first_moment = false);

struct PsiHistogram {
    int nbins = 0;
    double extent = 0;             // square [-extent, extent]^2
    std::vector<double> density;   // nbins x nbins, row-major, integrates to 1
    std::vector<double> angular;   // 72-bin |psi|-weighted angle density
    double anisotropy = 0;         // |<e^{i 6 theta}>| weighted by |psi|
    double mean_abs = 0;
    int angular_maxima = 0;        // smoothed peaks above 1.5x the angular mean
};

PsiHistogram histogram_order_parameter(const std::vector<std::array<double, 2>>& samples,
                                       int nbins);

}  // namespace triqmc
