#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "chromanoise/errors.hpp"

namespace chromanoise {

/// Neumaier-compensated accumulator. Summation order still matters for the
/// compensation term, so callers that need reproducible results must feed
/// values in a fixed order.
class CompensatedSum {
public:
    void add(double value) {
        double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sample_mean(std::span<const double> values) {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value() / static_cast<double>(values.size());
}

/// Unbiased sample variance, sum((x - mean)^2) / (n - 1). Identical inputs
/// return exactly 0 (the rounded mean of n equal values can sit one ulp off,
/// which would otherwise leave ~1e-34 of dust where the math says zero).
inline double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw Error(ErrorKind::DegeneratePatch,
                    "sample_variance requires at least two samples");
    }
    CompensatedSum total;
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        total.add(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) return 0.0;
    const double mean = total.value() / static_cast<double>(n);
    CompensatedSum s;
    for (double v : values) {
        const double d = v - mean;
        s.add(d * d);
    }
    return s.value() / static_cast<double>(n - 1);
}

/// Unbiased sample covariance with the same n-1 normalization as
/// sample_variance, so cov(x, x) == var(x).
inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size()) {
        throw Error(ErrorKind::DegeneratePatch,
                    "sample_covariance requires equal-length sequences");
    }
    if (n < 2) {
        throw Error(ErrorKind::DegeneratePatch,
                    "sample_covariance requires at least two samples");
    }
    const double mean_a = sample_mean(a);
    const double mean_b = sample_mean(b);
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) {
        s.add((a[i] - mean_a) * (b[i] - mean_b));
    }
    return s.value() / static_cast<double>(n - 1);
}

/// Pearson correlation coefficient over two equal-length sequences.
inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    const double var_a = sample_variance(a);
    const double var_b = sample_variance(b);
    if (var_a <= 0.0 || var_b <= 0.0) {
        throw Error(ErrorKind::UndefinedCorrelation,
                    "correlation undefined for a zero-variance sequence");
    }
    return sample_covariance(a, b) / std::sqrt(var_a * var_b);
}

}  // namespace chromanoise
