#pragma once

#include <limits>
#include <optional>

#include "cpscan/models.hpp"

namespace cpscan {

struct detection_config {
    model_spec model;
    int minseg = 1;
    double threshold = 0.0;  // resolved LR-scale cutoff c >= 0
};

struct detection_result {
    bool detected = false;
    double max_lr = 0.0;       // +inf when the maximiser carries the infinite flag
    bool max_infinite = false;
    int tau_hat = 0;
    std::optional<double> delta_hat;  // mean-type models only
    double threshold = 0.0;
};

struct curve_max {
    int tau = 0;
    double value = 0.0;
    bool infinite = false;
};

/// Argmax over the curve. Infinite flags dominate finite values; ties break
/// to the smallest tau, so repeated runs agree exactly.
inline curve_max max_over_curve(const lr_curve& curve) {
    curve_max best;
    best.tau = curve.tau_lo;
    best.value = -1.0;
    for (int tau = curve.tau_lo; tau <= curve.tau_hi(); ++tau) {
        const std::size_t k = static_cast<std::size_t>(tau - curve.tau_lo);
        if (curve.infinite[k]) {
            best = {tau, std::numeric_limits<double>::infinity(), true};
            break;  // smallest flagged tau wins outright
        }
        if (curve.values[k] > best.value) best = {tau, curve.values[k], false};
    }
    return best;
}

/// Difference of sample means after/before tau.
inline double estimate_delta(const time_series& ts, int tau) {
    const int n = ts.size();
    if (tau < 1 || tau > n - 1)
        throw std::out_of_range("estimate_delta: tau must lie in 1..n-1");
    const prefix_sums ps = build_prefix(ts);
    return segment_mean(ps, tau + 1, n) - segment_mean(ps, 1, tau);
}

inline detection_result detect(const time_series& ts, const detection_config& config) {
    if (config.threshold < 0.0)
        throw config_error("detect: threshold must be >= 0");
    const lr_curve curve = compute_curve(ts, config.model, config.minseg);
    const curve_max best = max_over_curve(curve);
    detection_result res;
    res.max_lr = best.value;
    res.max_infinite = best.infinite;
    res.tau_hat = best.tau;
    res.detected = best.infinite || best.value > config.threshold;
    res.threshold = config.threshold;
    if (is_mean_type(config.model)) res.delta_hat = estimate_delta(ts, best.tau);
    return res;
}

} // namespace cpscan
