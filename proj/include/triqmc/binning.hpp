#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace triqmc {

// Per-bin means of a scalar observable. Error is the plain bin-variance
// estimate sigma = sqrt((<O^2>_b - <O>_b^2)/(N_b - 1)).
struct BinnedSeries {
    std::vector<double> bins;

    double mean() const {
        double s = 0;
        for (double b : bins) s += b;
        return bins.empty() ? 0.0 : s / bins.size();
    }

    double error() const {
        size_t nb = bins.size();
        if (nb < 2) return 0.0;
        double m = mean(), s2 = 0;
        for (double b : bins) s2 += (b - m) * (b - m);
        return std::sqrt(s2 / nb / (nb - 1));
    }

    // >5 sigma drift between first and second half flags non-equilibration
    bool equilibrated() const {
        size_t nb = bins.size();
        if (nb < 4) return true;
        size_t h = nb / 2;
        double m1 = 0, m2 = 0;
        for (size_t i = 0; i < h; ++i) m1 += bins[i];
        for (size_t i = h; i < nb; ++i) m2 += bins[i];
        m1 /= h;
        m2 /= (nb - h);
        // sigma of a half mean is error()*sqrt(2), so the difference carries 2*error()
        double e = error();
        if (e == 0.0) return m1 == m2;
        return std::fabs(m1 - m2) <= 5.0 * 2.0 * e;
    }
};

// Streams samples into a fixed number of equal-size bins.
class BinAccumulator {
  public:
    BinAccumulator() = default;
    BinAccumulator(size_t nbins, size_t samples_per_bin)
        : per_bin_(samples_per_bin), sum_(0), count_(0) {
        if (per_bin_ == 0) throw std::invalid_argument("BinAccumulator: empty bins");
        series_.bins.reserve(nbins);
    }

    void push(double x) {
        sum_ += x;
        if (++count_ == per_bin_) {
            series_.bins.push_back(sum_ / per_bin_);
            sum_ = 0;
            count_ = 0;
        }
    }

    const BinnedSeries& series() const { return series_; }

    // checkpoint support: expose partial-bin state
    double partial_sum() const { return sum_; }
    size_t partial_count() const { return count_; }
    void restore(std::vector<double> bins, double sum, size_t count) {
        series_.bins = std::move(bins);
        sum_ = sum;
        count_ = count;
    }

  private:
    size_t per_bin_ = 1;
    double sum_ = 0;
    size_t count_ = 0;
    BinnedSeries series_;
};

// Same idea for vector-valued observables (correlators, S(q) grids, G(q,tau)).
class VectorBinAccumulator {
  public:
    VectorBinAccumulator() = default;
    VectorBinAccumulator(size_t dim, size_t samples_per_bin)
        : dim_(dim), per_bin_(samples_per_bin), sum_(dim, 0.0) {}

    void push(const std::vector<double>& x) {
        for (size_t i = 0; i < dim_; ++i) sum_[i] += x[i];
        if (++count_ == per_bin_) {
            std::vector<double> b(dim_);
            for (size_t i = 0; i < dim_; ++i) {
                b[i] = sum_[i] / per_bin_;
                sum_[i] = 0;
            }
            bins_.push_back(std::move(b));
            count_ = 0;
        }
    }

    size_t dim() const { return dim_; }
    const std::vector<std::vector<double>>& bins() const { return bins_; }

    std::vector<double> mean() const {
        std::vector<double> m(dim_, 0.0);
        for (const auto& b : bins_)
            for (size_t i = 0; i < dim_; ++i) m[i] += b[i];
        if (!bins_.empty())
            for (double& v : m) v /= bins_.size();
        return m;
    }

    std::vector<double> error() const {
        std::vector<double> m = mean(), e(dim_, 0.0);
        size_t nb = bins_.size();
        if (nb < 2) return e;
        for (const auto& b : bins_)
            for (size_t i = 0; i < dim_; ++i) e[i] += (b[i] - m[i]) * (b[i] - m[i]);
        for (double& v : e) v = std::sqrt(v / nb / (nb - 1));
        return e;
    }

  private:
    size_t dim_ = 0;
    size_t per_bin_ = 1;
    size_t count_ = 0;
    std::vector<double> sum_;
    std::vector<std::vector<double>> bins_;
};

}  // namespace triqmc
