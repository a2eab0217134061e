#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpscan {

/// A data value violates a contract (non-finite sample, negative count, ...).
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested configuration is unusable (empty admissible range, |phi|>=1, ...).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The data is valid but carries no usable signal for the statistic
/// (all values equal, zero residual variance, ...).
class degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An observed univariate series X_1..X_n. Indices are 1-based throughout
/// the public interface.
class time_series {
public:
    explicit time_series(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2)
            throw input_error("time_series: need at least 2 observations");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw input_error("time_series: non-finite value at sample " +
                                  std::to_string(i + 1));
    }

    std::span<const double> values() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i) - 1]; }

private:
    std::vector<double> values_;
};

/// Throws unless every value is a nonnegative integer (Poisson-model contract).
inline void require_counts(std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0) || x[i] != std::floor(x[i]))
            throw input_error("count data: negative or non-integer value at sample " +
                              std::to_string(i + 1));
    }
}

namespace detail {

// Neumaier-compensated accumulator. Keeps prefix sums accurate to ~1e-16
// relative even across 1e7 accumulations.
struct kahan_sum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + carry; }
};

} // namespace detail

/// Cumulative sums of values and squares; s[0] = q[0] = 0, s[t] = sum of the
/// first t values. All segment statistics downstream are O(1) lookups.
struct prefix_sums {
    std::vector<double> s;
    std::vector<double> q;
    int n = 0;
};

inline prefix_sums build_prefix(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    prefix_sums ps;
    ps.n = n;
    ps.s.resize(n + 1);
    ps.q.resize(n + 1);
    ps.s[0] = 0.0;
    ps.q[0] = 0.0;
    detail::kahan_sum s, q;
    for (int t = 0; t < n; ++t) {
        const double v = x[t];
        if (!std::isfinite(v))
            throw input_error("build_prefix: non-finite value at sample " +
                              std::to_string(t + 1));
        s.add(v);
        q.add(v * v);
        ps.s[t + 1] = s.value();
        ps.q[t + 1] = q.value();
    }
    return ps;
}

inline prefix_sums build_prefix(const time_series& ts) { return build_prefix(ts.values()); }

/// Sum of X_s..X_t, 1-based inclusive.
inline double segment_sum(const prefix_sums& ps, int s, int t) {
    if (s < 1 || t > ps.n || s > t)
        throw std::out_of_range("segment_sum: require 1 <= s <= t <= n");
    return ps.s[t] - ps.s[s - 1];
}

inline double segment_mean(const prefix_sums& ps, int s, int t) {
    return segment_sum(ps, s, t) / (t - s + 1);
}

/// Signed CUSUM C*_tau = sqrt(tau(n-tau)/n) (mean of X_1..tau - mean of X_tau+1..n).
inline double cusum_signed(const prefix_sums& ps, int tau) {
    const int n = ps.n;
    if (tau < 1 || tau > n - 1)
        throw std::out_of_range("cusum: tau must lie in 1..n-1");
    const double m1 = ps.s[tau] / tau;
    const double m2 = (ps.s[n] - ps.s[tau]) / (n - tau);
    const double scale = std::sqrt(static_cast<double>(tau) * (n - tau) / n);
    return scale * (m1 - m2);
}

inline double cusum(const prefix_sums& ps, int tau) { return std::fabs(cusum_signed(ps, tau)); }

/// C_tau and C*_tau for every tau in 1..n-1; index tau-1 holds tau.
struct cusum_curve_result {
    std::vector<double> c;
    std::vector<double> c_signed;
};

inline cusum_curve_result cusum_curve(const time_series& ts) {
    const prefix_sums ps = build_prefix(ts);
    const int n = ps.n;
    cusum_curve_result out;
    out.c.resize(n - 1);
    out.c_signed.resize(n - 1);
    for (int tau = 1; tau < n; ++tau) {
        const double v = cusum_signed(ps, tau);
        out.c_signed[tau - 1] = v;
        out.c[tau - 1] = std::fabs(v);
    }
    return out;
}

} // namespace cpscan
