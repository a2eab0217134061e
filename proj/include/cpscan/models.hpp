#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cpscan/series.hpp"

namespace cpscan {

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

struct gauss_mean_known_var {
    double sigma = 1.0;
};
struct gauss_mean_unknown_var {};
struct poisson_mean {};
struct gauss_var_known_mean {
    double mu = 0.0;
};
struct gauss_mean_and_var {};
struct gauss_slope_known_var {
    double sigma = 1.0;
};
struct ar1_mean_known {
    double phi = 0.0;  // lag-1 autocorrelation; marginal variance fixed to 1
};

using model_spec = std::variant<gauss_mean_known_var, gauss_mean_unknown_var, poisson_mean,
                                gauss_var_known_mean, gauss_mean_and_var, gauss_slope_known_var,
                                ar1_mean_known>;

inline std::string model_name(const model_spec& m) {
    struct visitor {
        std::string operator()(const gauss_mean_known_var&) const { return "mean-known-var"; }
        std::string operator()(const gauss_mean_unknown_var&) const { return "mean-unknown-var"; }
        std::string operator()(const poisson_mean&) const { return "poisson"; }
        std::string operator()(const gauss_var_known_mean&) const { return "var-known-mean"; }
        std::string operator()(const gauss_mean_and_var&) const { return "mean-and-var"; }
        std::string operator()(const gauss_slope_known_var&) const { return "slope"; }
        std::string operator()(const ar1_mean_known&) const { return "ar1-mean"; }
    };
    return std::visit(visitor{}, m);
}

/// True for models whose change parameter is a location shift, i.e. where a
/// before/after difference of sample means estimates the change size.
inline bool is_mean_type(const model_spec& m) {
    return std::holds_alternative<gauss_mean_known_var>(m) ||
           std::holds_alternative<gauss_mean_unknown_var>(m) ||
           std::holds_alternative<poisson_mean>(m) || std::holds_alternative<ar1_mean_known>(m);
}

// ---------------------------------------------------------------------------
// LR curve container
// ---------------------------------------------------------------------------

/// LR_tau over the admissible tau range. Degenerate-infinite values (a
/// segment fits exactly) are carried as flags rather than floating-point
/// infinities so downstream argmax logic stays total.
struct lr_curve {
    model_spec model;
    int minseg = 1;
    int tau_lo = 0;
    std::vector<double> values;
    std::vector<char> infinite;

    int tau_hi() const { return tau_lo + static_cast<int>(values.size()) - 1; }
    int size() const { return static_cast<int>(values.size()); }

    double at(int tau) const {
        check(tau);
        return values[static_cast<std::size_t>(tau - tau_lo)];
    }
    bool is_infinite(int tau) const {
        check(tau);
        return infinite[static_cast<std::size_t>(tau - tau_lo)] != 0;
    }

private:
    void check(int tau) const {
        if (tau < tau_lo || tau > tau_hi())
            throw std::out_of_range("lr_curve: tau " + std::to_string(tau) +
                                    " outside [" + std::to_string(tau_lo) + "," +
                                    std::to_string(tau_hi()) + "]");
    }
};

namespace detail {

// Floating-point artifacts may push an LR a hair below zero; anything worse
// than -1e-9 indicates a real bug.
inline double clamp_lr(double v) {
    if (v < -1e-9)
        throw std::logic_error("LR value " + std::to_string(v) +
                               " below -1e-9; internal inconsistency");
    return v < 0.0 ? 0.0 : v;
}

inline void check_minseg(int n, int minseg) {
    if (minseg < 1 || 2 * minseg > n)
        throw config_error("minseg " + std::to_string(minseg) +
                           " leaves no admissible change-point for n = " + std::to_string(n));
}

inline lr_curve make_curve(const model_spec& m, int minseg, int tau_lo, int tau_hi) {
    if (tau_hi < tau_lo)
        throw config_error("empty admissible change-point range");
    lr_curve c;
    c.model = m;
    c.minseg = minseg;
    c.tau_lo = tau_lo;
    c.values.assign(static_cast<std::size_t>(tau_hi - tau_lo + 1), 0.0);
    c.infinite.assign(c.values.size(), 0);
    return c;
}

inline std::vector<double> centered_copy(std::span<const double> x, double center) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - center;
    return out;
}

// Compensated suffix sums: s[t] = sum of x_{t+1..n}, q[t] likewise for
// squares (1-based t, s[n] = 0). Tail-segment statistics computed from these
// avoid the cancellation of differencing two nearly equal prefix sums.
struct suffix_sums {
    std::vector<double> s;
    std::vector<double> q;
};

inline suffix_sums build_suffix(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    suffix_sums out;
    out.s.assign(n + 1, 0.0);
    out.q.assign(n + 1, 0.0);
    kahan_sum s, q;
    for (int t = n - 1; t >= 0; --t) {
        const double v = x[static_cast<std::size_t>(t)];
        s.add(v);
        q.add(v * v);
        out.s[t] = s.value();
        out.q[t] = q.value();
    }
    return out;
}

inline double u_log_u(double u) { return u == 0.0 ? 0.0 : u * std::log(u); }

} // namespace detail

// ---------------------------------------------------------------------------
// Change in mean, known variance: LR_tau = C_tau^2 / sigma^2
// ---------------------------------------------------------------------------

inline lr_curve lr_mean_known_var(const time_series& ts, double sigma, int minseg = 1) {
    if (!(sigma > 0.0)) throw config_error("lr_mean_known_var: sigma must be > 0");
    const int n = ts.size();
    detail::check_minseg(n, minseg);
    lr_curve out = detail::make_curve(gauss_mean_known_var{sigma}, minseg, minseg, n - minseg);
    const prefix_sums ps = build_prefix(ts);
    const double inv_var = 1.0 / (sigma * sigma);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double c = cusum_signed(ps, tau);
        out.values[tau - out.tau_lo] = c * c * inv_var;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Change in mean, unknown variance: LR_tau = n log(S^2 / (S^2 - C_tau^2))
// ---------------------------------------------------------------------------

inline lr_curve lr_mean_unknown_var(const time_series& ts, int minseg = 1) {
    const int n = ts.size();
    if (n < 3) throw config_error("lr_mean_unknown_var: need n >= 3");
    detail::check_minseg(n, minseg);
    // The statistic is invariant to translation; centering keeps S^2 free of
    // cancellation for data with a large common mean.
    const prefix_sums ps0 = build_prefix(ts);
    const std::vector<double> centered = detail::centered_copy(ts.values(), ps0.s[n] / n);
    const prefix_sums ps = build_prefix(centered);
    const double s2 = std::max(ps.q[n] - ps.s[n] * ps.s[n] / n, 0.0);
    if (s2 <= 0.0)
        throw degenerate_error("lr_mean_unknown_var: all values equal (S^2 = 0)");
    lr_curve out = detail::make_curve(gauss_mean_unknown_var{}, minseg, minseg, n - minseg);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double c = cusum_signed(ps, tau);
        const double resid = s2 - c * c;
        const std::size_t k = static_cast<std::size_t>(tau - out.tau_lo);
        if (resid <= 1e-12 * s2)
            out.infinite[k] = 1;
        else
            out.values[k] = detail::clamp_lr(n * std::log(s2 / resid));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Change in mean for Poisson counts
// ---------------------------------------------------------------------------

inline lr_curve lr_poisson(const time_series& ts, int minseg = 1) {
    const int n = ts.size();
    require_counts(ts.values());
    detail::check_minseg(n, minseg);
    const prefix_sums ps = build_prefix(ts);
    const double mean_all = ps.s[n] / n;
    lr_curve out = detail::make_curve(poisson_mean{}, minseg, minseg, n - minseg);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double m1 = ps.s[tau] / tau;
        const double m2 = (ps.s[n] - ps.s[tau]) / (n - tau);
        const double lr = 2.0 * (tau * detail::u_log_u(m1) + (n - tau) * detail::u_log_u(m2) -
                                 n * detail::u_log_u(mean_all));
        out.values[tau - out.tau_lo] = detail::clamp_lr(lr);
    }
    return out;
}

/// Variance-stabilising transform for Poisson counts: X -> 2 sqrt(X + 3/8).
inline time_series anscombe_transform(const time_series& ts) {
    std::vector<double> out(ts.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = ts.values()[i];
        if (v < 0.0)
            throw input_error("anscombe_transform: negative value at sample " +
                              std::to_string(i + 1));
        out[i] = 2.0 * std::sqrt(v + 0.375);
    }
    return time_series(std::move(out));
}

// ---------------------------------------------------------------------------
// Change in variance, known mean
// ---------------------------------------------------------------------------

inline lr_curve lr_variance_known_mean(const time_series& ts, double mu, int minseg = 1) {
    const int n = ts.size();
    detail::check_minseg(n, minseg);
    const std::vector<double> centered = detail::centered_copy(ts.values(), mu);
    const prefix_sums ps = build_prefix(centered);
    const detail::suffix_sums tail = detail::build_suffix(centered);
    const double total = ps.q[n] / n;
    if (total <= 0.0)
        throw degenerate_error("lr_variance_known_mean: total S^2 = 0 (data identical to mu)");
    lr_curve out = detail::make_curve(gauss_var_known_mean{mu}, minseg, minseg, n - minseg);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double v1 = ps.q[tau] / tau;
        const double v2 = tail.q[tau] / (n - tau);
        const std::size_t k = static_cast<std::size_t>(tau - out.tau_lo);
        if (v1 <= 1e-300 || v2 <= 1e-300) {
            out.infinite[k] = 1;
            continue;
        }
        const double lr = n * std::log(total) - tau * std::log(v1) - (n - tau) * std::log(v2);
        out.values[k] = detail::clamp_lr(lr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Change in mean and variance
// ---------------------------------------------------------------------------

inline lr_curve lr_mean_and_variance(const time_series& ts, int minseg = 2) {
    const int n = ts.size();
    if (n < 4) throw config_error("lr_mean_and_variance: need n >= 4");
    if (minseg < 2)
        throw config_error("lr_mean_and_variance: minimum segment length must be >= 2");
    detail::check_minseg(n, minseg);
    const prefix_sums ps0 = build_prefix(ts);
    const std::vector<double> centered = detail::centered_copy(ts.values(), ps0.s[n] / n);
    const prefix_sums ps = build_prefix(centered);
    const detail::suffix_sums tail = detail::build_suffix(centered);
    const double vtot = std::max(ps.q[n] / n - (ps.s[n] / n) * (ps.s[n] / n), 0.0);
    if (vtot <= 0.0)
        throw degenerate_error("lr_mean_and_variance: zero total variance");
    // Segments whose computed variance is this small (relative to the whole
    // series) are treated as exact fits: identical values up to rounding.
    const double zero_var = 1e-12 * vtot;
    lr_curve out = detail::make_curve(gauss_mean_and_var{}, minseg, minseg, n - minseg);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double m1 = ps.s[tau] / tau;
        const double m2 = tail.s[tau] / (n - tau);
        const double v1 = ps.q[tau] / tau - m1 * m1;
        const double v2 = tail.q[tau] / (n - tau) - m2 * m2;
        const std::size_t k = static_cast<std::size_t>(tau - out.tau_lo);
        if (v1 <= zero_var || v2 <= zero_var) {
            out.infinite[k] = 1;
            continue;
        }
        const double lr = n * std::log(vtot) - tau * std::log(v1) - (n - tau) * std::log(v2);
        out.values[k] = detail::clamp_lr(lr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Change in slope, known variance
// ---------------------------------------------------------------------------

// LR_tau is the squared projection of the data on the hinge column
// (i - tau)_+ orthogonalised against {1, i}. The hinge differs from the line
// (i - tau) only on i <= tau, so whichever of the two supports is shorter is
// used for the running sums; this bounds the cancellation in the Gram terms.
inline lr_curve lr_slope(const time_series& ts, double sigma, int minseg = 1) {
    if (!(sigma > 0.0)) throw config_error("lr_slope: sigma must be > 0");
    const int n = ts.size();
    if (n < 4) throw input_error("lr_slope: need n >= 4 (design rank)");
    detail::check_minseg(n, minseg);
    const int tau_lo = std::max(2, minseg);
    const int tau_hi = std::min(n - 1, n - minseg);
    lr_curve out = detail::make_curve(gauss_slope_known_var{sigma}, minseg, tau_lo, tau_hi);

    // Compensated prefix sums of X and i*X.
    std::vector<double> sx(n + 1, 0.0), six(n + 1, 0.0);
    detail::kahan_sum ax, aix;
    for (int i = 1; i <= n; ++i) {
        const double v = ts.values()[i - 1];
        ax.add(v);
        aix.add(static_cast<double>(i) * v);
        sx[i] = ax.value();
        six[i] = aix.value();
    }
    const double nn = n;
    const double ibar = 0.5 * (nn + 1.0);
    const double zz = nn * (nn * nn - 1.0) / 12.0;  // sum of (i - ibar)^2
    const double zx = six[n] - ibar * sx[n];
    const double inv_var = 1.0 / (sigma * sigma);

    for (int tau = tau_lo; tau <= tau_hi; ++tau) {
        double sh, sh2, sih, shx;
        if (n - tau <= tau - 1) {
            // h_i = (i - tau)_+, support i = tau+1..n
            const double m = nn - tau;
            sh = m * (m + 1.0) / 2.0;
            sh2 = m * (m + 1.0) * (2.0 * m + 1.0) / 6.0;
            sih = sh2 + tau * sh;
            shx = (six[n] - six[tau]) - tau * (sx[n] - sx[tau]);
        } else {
            // g_i = (tau - i)_+ has the same residual; support i = 1..tau-1
            const double k = tau - 1.0;
            sh = k * (k + 1.0) / 2.0;
            sh2 = k * (k + 1.0) * (2.0 * k + 1.0) / 6.0;
            sih = tau * sh - sh2;
            shx = tau * sx[tau - 1] - six[tau - 1];
        }
        const double szh = sih - ibar * sh;
        const double hth = sh2 - sh * sh / nn - szh * szh / zz;
        if (hth < 1e-20 * sh2)
            throw input_error("lr_slope: rank-deficient design at tau " + std::to_string(tau));
        const double htx = shx - (sh / nn) * sx[n] - (szh / zz) * zx;
        out.values[tau - tau_lo] = detail::clamp_lr(htx * htx / hth * inv_var);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Change in mean under AR(1) noise, phi known, marginal variance 1
// ---------------------------------------------------------------------------

// Whitening: Y_1 = X_1, Y_t = (X_t - phi X_{t-1}) / sqrt(1 - phi^2). The LR
// is the difference of generalised-least-squares residual sums for a
// constant fit versus a two-level step fit, both in whitened coordinates.
// The step columns u (before) and v (after) sum to the whitened constant, so
// the difference reduces to projection terms and never goes negative.
inline lr_curve lr_ar1_mean(const time_series& ts, double phi, int minseg = 1) {
    if (!(std::fabs(phi) < 1.0))
        throw config_error("lr_ar1_mean: require |phi| < 1");
    const int n = ts.size();
    detail::check_minseg(n, minseg);
    const double c = std::sqrt(1.0 - phi * phi);
    const double g = (1.0 - phi) / c;
    const double pc = phi / c;

    std::vector<double> y(n);
    y[0] = ts.values()[0];
    for (int t = 1; t < n; ++t) y[t] = (ts.values()[t] - phi * ts.values()[t - 1]) / c;
    std::vector<double> sy(n + 1, 0.0);
    detail::kahan_sum acc;
    for (int t = 1; t <= n; ++t) {
        acc.add(y[t - 1]);
        sy[t] = acc.value();
    }

    const double ww = 1.0 + (n - 1) * g * g;
    const double wy = y[0] + g * (sy[n] - y[0]);
    const double null_proj = wy * wy / ww;
    const double uv = -phi / (c * c);

    lr_curve out = detail::make_curve(ar1_mean_known{phi}, minseg, minseg, n - minseg);
    for (int tau = out.tau_lo; tau <= out.tau_hi(); ++tau) {
        const double uu = 1.0 + (tau - 1) * g * g + pc * pc;
        const double vv = 1.0 / (c * c) + (n - tau - 1) * g * g;
        const double uy = y[0] + g * (sy[tau] - y[0]) - pc * y[tau];
        const double vy = y[tau] / c + g * (sy[n] - sy[tau + 1]);
        const double det = uu * vv - uv * uv;
        const double alt_proj = (vv * uy * uy - 2.0 * uv * uy * vy + uu * vy * vy) / det;
        out.values[tau - out.tau_lo] = detail::clamp_lr(alt_proj - null_proj);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline lr_curve compute_curve(const time_series& ts, const model_spec& model, int minseg) {
    struct visitor {
        const time_series& ts;
        int minseg;
        lr_curve operator()(const gauss_mean_known_var& m) const {
            return lr_mean_known_var(ts, m.sigma, minseg);
        }
        lr_curve operator()(const gauss_mean_unknown_var&) const {
            return lr_mean_unknown_var(ts, minseg);
        }
        lr_curve operator()(const poisson_mean&) const { return lr_poisson(ts, minseg); }
        lr_curve operator()(const gauss_var_known_mean& m) const {
            return lr_variance_known_mean(ts, m.mu, minseg);
        }
        lr_curve operator()(const gauss_mean_and_var&) const {
            return lr_mean_and_variance(ts, minseg);
        }
        lr_curve operator()(const gauss_slope_known_var& m) const {
            return lr_slope(ts, m.sigma, minseg);
        }
        lr_curve operator()(const ar1_mean_known& m) const {
            return lr_ar1_mean(ts, m.phi, minseg);
        }
    };
    return std::visit(visitor{ts, minseg}, model);
}

} // namespace cpscan
