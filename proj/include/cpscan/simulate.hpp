#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpscan/rng.hpp"
#include "cpscan/series.hpp"

namespace cpscan {

// ---------------------------------------------------------------------------
// Signal specifications
// ---------------------------------------------------------------------------

/// Piecewise-constant mean: change_points tau_1 < ... < tau_k (1-based, each
/// in 1..n-1), level j applies to i in (tau_{j-1}, tau_j].
struct piecewise_constant {
    std::vector<int> change_points;
    std::vector<double> levels;
};

/// Piecewise-linear mean: f_i = intercept + slope * i + sum of
/// slope_change * (i - tau)_+ over kinks.
struct piecewise_linear {
    double intercept = 0.0;
    double slope = 0.0;
    std::vector<std::pair<int, double>> kinks;  // (tau, slope change)
};

struct signal_spec {
    std::variant<piecewise_constant, piecewise_linear> shape;
    int n = 0;
};

inline std::vector<double> signal_values(const signal_spec& spec) {
    if (spec.n < 2) throw config_error("signal_spec: need n >= 2");
    std::vector<double> f(static_cast<std::size_t>(spec.n));
    if (const auto* pc = std::get_if<piecewise_constant>(&spec.shape)) {
        if (pc->levels.size() != pc->change_points.size() + 1)
            throw config_error("piecewise_constant: need one more level than change-points");
        int prev = 0;
        for (const int cp : pc->change_points) {
            if (cp <= prev || cp >= spec.n)
                throw config_error("piecewise_constant: change-points must be strictly "
                                   "increasing within 1..n-1");
            prev = cp;
        }
        std::size_t seg = 0;
        for (int i = 1; i <= spec.n; ++i) {
            while (seg < pc->change_points.size() && i > pc->change_points[seg]) ++seg;
            f[i - 1] = pc->levels[seg];
        }
        return f;
    }
    const auto& pl = std::get<piecewise_linear>(spec.shape);
    int prev = 0;
    for (const auto& [tau, change] : pl.kinks) {
        (void)change;
        if (tau <= prev || tau >= spec.n)
            throw config_error("piecewise_linear: kinks must be strictly increasing "
                               "within 1..n-1");
        prev = tau;
    }
    for (int i = 1; i <= spec.n; ++i) {
        double v = pl.intercept + pl.slope * i;
        for (const auto& [tau, change] : pl.kinks)
            if (i > tau) v += change * (i - tau);
        f[i - 1] = v;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Noise specifications
// ---------------------------------------------------------------------------

struct iid_gauss {
    double sigma = 1.0;
};
struct ar1_noise {
    double rho = 0.0;
    double sigma = 1.0;  // marginal standard deviation
};
struct student_t_noise {
    int df = 5;
    double scale = 1.0;  // raw scale; variance is scale^2 df/(df-2)
};
struct poisson_counts {};

using noise_spec = std::variant<iid_gauss, ar1_noise, student_t_noise, poisson_counts>;

/// Stationary AR(1) noise: e_1 ~ N(0, sigma^2), e_t = rho e_{t-1} +
/// sigma sqrt(1-rho^2) eta_t, so the marginal variance is sigma^2 throughout.
inline std::vector<double> gen_ar1(int n, double rho, double sigma, rng& gen) {
    if (!(std::fabs(rho) < 1.0)) throw config_error("gen_ar1: require |rho| < 1");
    if (!(sigma > 0.0)) throw config_error("gen_ar1: require sigma > 0");
    std::vector<double> e(static_cast<std::size_t>(n));
    const double innov = sigma * std::sqrt(1.0 - rho * rho);
    e[0] = sigma * gen.normal();
    for (int t = 1; t < n; ++t) e[t] = rho * e[t - 1] + innov * gen.normal();
    return e;
}

inline std::vector<double> gen_ar1(int n, double rho, double sigma, std::uint64_t seed) {
    rng gen(substream_seed(seed, 0));
    return gen_ar1(n, rho, sigma, gen);
}

/// X_i = f_i + eps_i, or Poisson(f_i) draws for count noise.
inline time_series gen_series(const signal_spec& signal, const noise_spec& noise,
                              std::uint64_t seed) {
    std::vector<double> f = signal_values(signal);
    const int n = signal.n;
    rng gen(substream_seed(seed, 0));
    if (std::holds_alternative<poisson_counts>(noise)) {
        if (!std::holds_alternative<piecewise_constant>(signal.shape))
            throw config_error("poisson counts need a piecewise-constant signal");
        for (double level : std::get<piecewise_constant>(signal.shape).levels)
            if (!(level > 0.0))
                throw config_error("poisson counts need strictly positive levels");
        for (int i = 0; i < n; ++i) f[i] = static_cast<double>(gen.poisson(f[i]));
        return time_series(std::move(f));
    }
    if (const auto* ig = std::get_if<iid_gauss>(&noise)) {
        if (!(ig->sigma >= 0.0)) throw config_error("iid_gauss: require sigma >= 0");
        for (int i = 0; i < n; ++i) f[i] += ig->sigma * gen.normal();
        return time_series(std::move(f));
    }
    if (const auto* ar = std::get_if<ar1_noise>(&noise)) {
        const std::vector<double> e = gen_ar1(n, ar->rho, ar->sigma, gen);
        for (int i = 0; i < n; ++i) f[i] += e[i];
        return time_series(std::move(f));
    }
    const auto& st = std::get<student_t_noise>(noise);
    if (st.df < 3) throw config_error("student_t_noise: require df >= 3 (finite variance)");
    if (!(st.scale > 0.0)) throw config_error("student_t_noise: require scale > 0");
    for (int i = 0; i < n; ++i) f[i] += st.scale * gen.student_t(st.df);
    return time_series(std::move(f));
}

// ---------------------------------------------------------------------------
// Robust scale estimation
// ---------------------------------------------------------------------------

struct mad_result {
    double sigma = 0.0;
    bool degenerate = false;  // constant or perfectly linear data
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace detail

/// MAD estimate of the noise scale from first differences:
/// sigma = 1.4826 * median|Z - median(Z)| / sqrt(2), Z_t = X_{t+1} - X_t.
/// The 1.4826 factor (1/Phi^-1(3/4)) makes the MAD consistent for a Gaussian.
inline mad_result mad_sigma(std::span<const double> x) {
    if (x.size() < 3) throw input_error("mad_sigma: need n >= 3");
    std::vector<double> z(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        if (!std::isfinite(x[t]) || !std::isfinite(x[t + 1]))
            throw input_error("mad_sigma: non-finite value at sample " + std::to_string(t + 1));
        z[t] = x[t + 1] - x[t];
    }
    std::vector<double> work = z;
    const double med = detail::median_inplace(work);
    for (std::size_t t = 0; t < z.size(); ++t) z[t] = std::fabs(z[t] - med);
    const double mad = detail::median_inplace(z);
    const double sigma = 1.4826 * mad / std::sqrt(2.0);
    return {sigma, sigma == 0.0};
}

inline mad_result mad_sigma(const time_series& ts) { return mad_sigma(ts.values()); }

// ---------------------------------------------------------------------------
// Threshold inflation for autocorrelated noise
// ---------------------------------------------------------------------------

/// CUSUM-scale inflation sqrt((1+rho)/(1-rho)) for AR(1) noise. LR-scale
/// thresholds inflate by the square of this factor.
inline double ar1_inflation(double rho1) {
    if (!(std::fabs(rho1) < 1.0)) throw config_error("ar1_inflation: require |rho1| < 1");
    return std::sqrt((1.0 + rho1) / (1.0 - rho1));
}

/// General form sqrt(1 + 2 sum rho_h) for autocorrelations rho_1, rho_2, ...;
/// terms below 1e-12 in magnitude truncate the sum.
inline double longrun_inflation(std::span<const double> rho) {
    double total = 0.0;
    for (double r : rho) {
        if (!std::isfinite(r) || std::fabs(r) >= 1.0)
            throw config_error("longrun_inflation: autocorrelations must lie in (-1,1)");
        if (std::fabs(r) < 1e-12) break;
        total += r;
    }
    const double factor = 1.0 + 2.0 * total;
    if (factor <= 0.0) throw config_error("longrun_inflation: nonpositive long-run variance");
    return std::sqrt(factor);
}

// ---------------------------------------------------------------------------
// Scaled Brownian bridge of the CUSUM process
// ---------------------------------------------------------------------------

/// mu(q) drift helper: q(1-q0) below the change, (1-q)q0 above.
inline double bridge_drift(double q, double q0) {
    return q <= q0 ? q * (1.0 - q0) : (1.0 - q) * q0;
}

/// One draw of W~0 on the grid i/n, i = 1..n-1:
///   W~0(t) = (sqrt(n) Delta mu(t) + W0(t)) / sqrt(t(1-t)),
/// where W0 is an exact Brownian bridge (forward increments minus t W(1)).
/// |W~0(i/n)| is distributed as the CUSUM family C_i / sigma.
inline std::vector<double> simulate_scaled_bridge(int n, double delta, double q0,
                                                  std::uint64_t seed) {
    if (n < 2) throw config_error("simulate_scaled_bridge: need n >= 2");
    if (!(q0 > 0.0 && q0 < 1.0))
        throw config_error("simulate_scaled_bridge: q0 must lie in (0,1)");
    rng gen(substream_seed(seed, 0));
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += sd * gen.normal();
        w[i] = acc;
    }
    const double w1 = w[n - 1];
    std::vector<double> out(static_cast<std::size_t>(n - 1));
    const double drift_scale = std::sqrt(static_cast<double>(n)) * delta;
    for (int i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        const double bridge = w[i - 1] - t * w1;
        out[i - 1] = (drift_scale * bridge_drift(t, q0) + bridge) / std::sqrt(t * (1.0 - t));
    }
    return out;
}

} // namespace cpscan
