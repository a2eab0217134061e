#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "cpscan/detect.hpp"
#include "cpscan/dist.hpp"
#include "cpscan/models.hpp"
#include "cpscan/rng.hpp"

namespace cpscan {

// ---------------------------------------------------------------------------
// Worker pool for independent replicates
// ---------------------------------------------------------------------------

/// Worker count: CPSCAN_THREADS if set, else hardware concurrency (capped).
inline int worker_count() {
    if (const char* env = std::getenv("CPSCAN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 16u));
}

/// Runs body(i) for i in [0, count) across workers. Each index must do
/// independent work keyed only on i (its own RNG substream), which makes the
/// result identical for any worker count.
template <typename Body>
void parallel_replicates(long count, Body&& body) {
    const int workers = std::min<long>(worker_count(), std::max<long>(count, 1));
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const long lo = count * w / workers;
        const long hi = count * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (long i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Threshold rules
// ---------------------------------------------------------------------------

enum class rule_kind { monte_carlo, gumbel, bonferroni, two_log_n, fixed };

struct threshold_rule {
    rule_kind kind = rule_kind::monte_carlo;
    double alpha = 0.05;
    int reps = 10000;          // Monte Carlo replicates B
    std::uint64_t seed = 1;
    double fixed_value = 0.0;  // rule_kind::fixed
};

/// Thresholds from the Gumbel limit of max C_tau / sigma. c_cusum is on the
/// CUSUM scale, c_lr = c_cusum^2 on the LR scale.
struct gumbel_thresholds {
    double c_cusum = 0.0;
    double c_lr = 0.0;
};

inline gumbel_thresholds gumbel_threshold(int n, double alpha) {
    if (n < 16) throw std::domain_error("gumbel_threshold: need n >= 16 for iterated logs");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("gumbel_threshold: alpha must lie in (0,1)");
    const double lln = std::log(std::log(static_cast<double>(n)));
    const double a_n = 1.0 / std::sqrt(2.0 * lln);
    const double b_n = 1.0 / a_n + 0.5 * a_n * std::log(lln);
    const double u = -std::log(0.5 * std::sqrt(std::numbers::pi) * (-std::log1p(-alpha)));
    const double c = b_n + a_n * u;
    return {c, c * c};
}

/// Exact Bonferroni rule: solves (n-1) P(chi2_1 > c) = alpha.
inline double bonferroni_threshold(int n, double alpha) {
    if (n < 2) throw std::domain_error("bonferroni_threshold: need n >= 2");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("bonferroni_threshold: alpha must lie in (0,1]");
    const double p = alpha / (2.0 * (n - 1));
    if (p >= 0.5) return 0.0;
    const double z = normal_quantile(1.0 - p);
    return z * z;
}

inline double two_log_n(int n) {
    if (n < 2) throw std::domain_error("two_log_n: need n >= 2");
    return 2.0 * std::log(static_cast<double>(n));
}

/// Non-centrality of LR at the true change-point: nu = (1/q0 + 1/(1-q0))^-1 n Delta^2.
inline double noncentrality(int n, double q0, double delta) {
    if (!(q0 > 0.0 && q0 < 1.0))
        throw std::domain_error("noncentrality: q0 must lie in (0,1)");
    return n * delta * delta / (1.0 / q0 + 1.0 / (1.0 - q0));
}

/// Lower bound on P(chi2_1(nu) > k); zero when the bound is uninformative.
inline double power_lower_bound(double nu, double k) {
    if (!(nu > k - 1.0)) return 0.0;
    const double num = 1.0 + nu - k;
    return 1.0 - std::exp(-num * num / (4.0 + 8.0 * nu));
}

// ---------------------------------------------------------------------------
// Monte Carlo null calibration
// ---------------------------------------------------------------------------

namespace detail {

/// Simulated data under the model's null hypothesis.
inline std::vector<double> simulate_null(const model_spec& model, int n, rng& gen,
                                         double poisson_null_mean) {
    std::vector<double> x(n);
    if (std::holds_alternative<poisson_mean>(model)) {
        for (auto& v : x) v = static_cast<double>(gen.poisson(poisson_null_mean));
        return x;
    }
    if (const auto* ar = std::get_if<ar1_mean_known>(&model)) {
        const double phi = ar->phi;
        const double innov = std::sqrt(1.0 - phi * phi);
        x[0] = gen.normal();
        for (int t = 1; t < n; ++t) x[t] = phi * x[t - 1] + innov * gen.normal();
        return x;
    }
    double sd = 1.0;
    double mean = 0.0;
    if (const auto* m = std::get_if<gauss_mean_known_var>(&model)) sd = m->sigma;
    if (const auto* m = std::get_if<gauss_slope_known_var>(&model)) sd = m->sigma;
    if (const auto* m = std::get_if<gauss_var_known_mean>(&model)) mean = m->mu;
    for (auto& v : x) v = gen.normal(mean, sd);
    return x;
}

inline double kth_order_statistic(std::vector<double> values, double alpha) {
    const long b = static_cast<long>(values.size());
    const long k = static_cast<long>(std::ceil(b * (1.0 - alpha)));
    if (k < 1)
        throw config_error("empirical quantile: B(1-alpha) < 1");
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

} // namespace detail

/// Distribution of max LR under the model's null, as B independent draws.
/// Replicate i uses substream_seed(seed, i), so the result is bit-identical
/// for any worker count.
inline std::vector<double> mc_null_max_lr(const model_spec& model, int n, int minseg, int reps,
                                          std::uint64_t seed, double poisson_null_mean = 1.0) {
    if (reps < 1) throw config_error("mc_null_max_lr: need reps >= 1");
    std::vector<double> out(static_cast<std::size_t>(reps));
    parallel_replicates(reps, [&](long i) {
        rng gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
        time_series ts(detail::simulate_null(model, n, gen, poisson_null_mean));
        const curve_max m = max_over_curve(compute_curve(ts, model, minseg));
        out[static_cast<std::size_t>(i)] = m.value;  // +inf when flagged
    });
    return out;
}

/// Empirical (1-alpha) null quantile: the ceil(B(1-alpha))-th order statistic
/// of B simulated max-LR values (conservative side).
inline double mc_null_quantile(const model_spec& model, int n, int minseg, double alpha, int reps,
                               std::uint64_t seed, double poisson_null_mean = 1.0) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw config_error("mc_null_quantile: alpha must lie in (0,1)");
    if (reps * (1.0 - alpha) < 1.0)
        throw config_error("mc_null_quantile: B(1-alpha) < 1");
    return detail::kth_order_statistic(
        mc_null_max_lr(model, n, minseg, reps, seed, poisson_null_mean), alpha);
}

/// Resolves a threshold rule to a scalar LR cutoff. The Gumbel rule is only
/// defined for minseg = 1 (the limit law covers the full tau range).
inline double resolve_threshold(const threshold_rule& rule, const model_spec& model, int n,
                                int minseg, double poisson_null_mean = 1.0) {
    switch (rule.kind) {
        case rule_kind::monte_carlo:
            if (rule.reps < 100)
                throw config_error("monte-carlo rule: need at least 100 replicates");
            return mc_null_quantile(model, n, minseg, rule.alpha, rule.reps, rule.seed,
                                    poisson_null_mean);
        case rule_kind::gumbel:
            if (minseg != 1)
                throw config_error("gumbel rule is defined only for minseg = 1");
            return gumbel_threshold(n, rule.alpha).c_lr;
        case rule_kind::bonferroni:
            return bonferroni_threshold(n, rule.alpha);
        case rule_kind::two_log_n:
            return two_log_n(n);
        case rule_kind::fixed:
            if (rule.fixed_value < 0.0)
                throw config_error("fixed threshold must be >= 0");
            return rule.fixed_value;
    }
    throw config_error("unknown threshold rule");
}

} // namespace cpscan
