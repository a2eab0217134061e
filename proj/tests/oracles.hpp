#pragma once

// Test-only reference implementations. Everything here recomputes the
// statistics from their defining formulas with direct per-tau loops (and
// dense linear algebra for the regression models) so the O(n) production
// code is checked against an independent route.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double mean_of(const std::vector<double>& x, int s, int t) {  // 1-based inclusive
    double sum = 0.0;
    for (int i = s; i <= t; ++i) sum += x[static_cast<std::size_t>(i - 1)];
    return sum / (t - s + 1);
}

inline double cusum(const std::vector<double>& x, int tau) {
    const int n = static_cast<int>(x.size());
    const double d = mean_of(x, 1, tau) - mean_of(x, tau + 1, n);
    return std::sqrt(static_cast<double>(tau) * (n - tau) / n) * std::fabs(d);
}

inline double lr_mean_known_var(const std::vector<double>& x, double sigma, int tau) {
    const double c = cusum(x, tau);
    return c * c / (sigma * sigma);
}

struct maybe_lr {
    double value = 0.0;
    bool infinite = false;
};

inline maybe_lr lr_mean_unknown_var(const std::vector<double>& x, int tau) {
    const int n = static_cast<int>(x.size());
    const double xbar = mean_of(x, 1, n);
    double s2 = 0.0;
    for (double v : x) s2 += (v - xbar) * (v - xbar);
    const double c = cusum(x, tau);
    const double resid = s2 - c * c;
    if (resid <= 1e-12 * s2) return {0.0, true};
    return {n * std::log(s2 / resid), false};
}

inline double lr_poisson(const std::vector<double>& x, int tau) {
    const int n = static_cast<int>(x.size());
    const auto ulogu = [](double u) { return u == 0.0 ? 0.0 : u * std::log(u); };
    const double m1 = mean_of(x, 1, tau);
    const double m2 = mean_of(x, tau + 1, n);
    const double m = mean_of(x, 1, n);
    return 2.0 * (tau * ulogu(m1) + (n - tau) * ulogu(m2) - n * ulogu(m));
}

inline maybe_lr lr_var_known_mean(const std::vector<double>& x, double mu, int tau) {
    const int n = static_cast<int>(x.size());
    const auto seg = [&](int s, int t) {
        double q = 0.0;
        for (int i = s; i <= t; ++i) {
            const double v = x[static_cast<std::size_t>(i - 1)] - mu;
            q += v * v;
        }
        return q / (t - s + 1);
    };
    const double v1 = seg(1, tau), v2 = seg(tau + 1, n), vn = seg(1, n);
    if (v1 <= 1e-300 || v2 <= 1e-300) return {0.0, true};
    return {n * std::log(vn) - tau * std::log(v1) - (n - tau) * std::log(v2), false};
}

inline maybe_lr lr_mean_and_var(const std::vector<double>& x, int tau) {
    const int n = static_cast<int>(x.size());
    const auto seg_var = [&](int s, int t) {
        const double m = mean_of(x, s, t);
        double q = 0.0;
        for (int i = s; i <= t; ++i) {
            const double v = x[static_cast<std::size_t>(i - 1)] - m;
            q += v * v;
        }
        return q / (t - s + 1);
    };
    const double v1 = seg_var(1, tau), v2 = seg_var(tau + 1, n), vn = seg_var(1, n);
    if (v1 <= 1e-12 * vn || v2 <= 1e-12 * vn) return {0.0, true};
    return {n * std::log(vn) - tau * std::log(v1) - (n - tau) * std::log(v2), false};
}

/// RSS difference of least-squares fits {1,i} vs {1,i,(i-tau)_+}, per tau.
inline std::vector<double> lr_slope_curve(const std::vector<double>& x, double sigma) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = x[static_cast<std::size_t>(i)];
    Eigen::MatrixXd d0(n, 2);
    for (int i = 0; i < n; ++i) {
        d0(i, 0) = 1.0;
        d0(i, 1) = i + 1;
    }
    const Eigen::VectorXd r0 = y - d0 * d0.colPivHouseholderQr().solve(y);
    const double rss0 = r0.squaredNorm();
    std::vector<double> out(static_cast<std::size_t>(n - 1), 0.0);
    for (int tau = 2; tau <= n - 1; ++tau) {
        Eigen::MatrixXd d1(n, 3);
        for (int i = 0; i < n; ++i) {
            d1(i, 0) = 1.0;
            d1(i, 1) = i + 1;
            d1(i, 2) = std::max(0.0, static_cast<double>(i + 1 - tau));
        }
        const Eigen::VectorXd r1 = y - d1 * d1.colPivHouseholderQr().solve(y);
        out[static_cast<std::size_t>(tau - 1)] = (rss0 - r1.squaredNorm()) / (sigma * sigma);
    }
    return out;
}

/// AR(1) likelihood ratio by brute force: dense covariance Sigma_ij =
/// phi^|i-j| (marginal variance 1), generalised least squares through the
/// explicit inverse. Returns LR_tau for tau = 1..n-1.
inline std::vector<double> lr_ar1_curve(const std::vector<double>& x, double phi) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd sigma(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sigma(i, j) = std::pow(phi, std::abs(i - j));
    const Eigen::MatrixXd m = sigma.llt().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = x[static_cast<std::size_t>(i)];
    const Eigen::VectorXd w = m * y;

    // running block sums of m and w
    std::vector<std::vector<double>> p(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            p[i][j] = m(i - 1, j - 1) + p[i - 1][j] + p[i][j - 1] - p[i - 1][j - 1];
    std::vector<double> wp(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) wp[i] = wp[i - 1] + w(i - 1);

    const double a0 = p[n][n];
    const double b0 = wp[n];
    const double null_term = b0 * b0 / a0;
    std::vector<double> out(static_cast<std::size_t>(n - 1));
    for (int tau = 1; tau <= n - 1; ++tau) {
        const double umu = p[tau][tau];
        const double umv = p[tau][n] - p[tau][tau];
        const double vmv = p[n][n] - 2.0 * p[tau][n] + p[tau][tau];
        const double bu = wp[tau];
        const double bv = b0 - bu;
        const double det = umu * vmv - umv * umv;
        const double alt_term = (vmv * bu * bu - 2.0 * umv * bu * bv + umu * bv * bv) / det;
        out[static_cast<std::size_t>(tau - 1)] = alt_term - null_term;
    }
    return out;
}

// --- distribution test helpers -------------------------------------------

inline double ks_to_cdf(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / a.size() -
                                  static_cast<double>(j) / b.size()));
    }
    return d;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

} // namespace oracle
