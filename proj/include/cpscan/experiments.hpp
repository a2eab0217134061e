#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cpscan/calibrate.hpp"
#include "cpscan/csv.hpp"
#include "cpscan/detect.hpp"
#include "cpscan/models.hpp"
#include "cpscan/simulate.hpp"
#include "cpscan/version.hpp"

namespace cpscan {

/// Scripted reproduction request. Unset fields fall back to each
/// experiment's documented defaults; `paper_scale` raises the Monte Carlo
/// counts of the calibration-heavy studies.
struct experiment_request {
    std::string id = "E1";
    std::uint64_t seed = 1;
    std::optional<int> n;
    std::optional<int> reps;       // main replicate count
    std::optional<int> cal_reps;   // threshold-calibration replicates
    std::optional<int> minseg;
    std::optional<int> df;
    std::optional<double> delta;
    std::optional<double> q0;
    std::optional<double> rho;
    std::optional<double> alpha;
    std::optional<double> null_mean;  // Poisson null mean (E10)
    bool raw_t_scale = false;         // E9: keep raw t scale instead of unit variance
    bool paper_scale = false;
};

/// The statistic evaluated on the noiseless mean function. Exact for the
/// expected value of linear-in-data statistics (CUSUM, slope projections);
/// for log-based statistics it is the usual plug-in approximation.
inline lr_curve expected_lr_curve(const signal_spec& signal, const model_spec& model,
                                  int minseg = 1) {
    return compute_curve(time_series(signal_values(signal)), model, minseg);
}

namespace detail {

inline std::uint64_t phase_seed(std::uint64_t master, int phase) {
    return substream_seed(master, 0x0E5EEDull + static_cast<std::uint64_t>(phase));
}

inline std::vector<double> iid_gauss_vector(int n, rng& gen) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = gen.normal();
    return x;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct table_builder {
    result_table table;

    explicit table_builder(std::vector<std::string> columns) { table.columns = std::move(columns); }

    void provenance(const experiment_request& req, const std::string& params) {
        table.note("experiment", req.id);
        table.note("seed", std::to_string(req.seed));
        table.note("params", params);
        table.note("version", cpscan::version);
    }
};

// --- E1: Monte Carlo vs Gumbel vs 2 log n thresholds --------------------

inline result_table exp_thresholds_vs_n(const experiment_request& req) {
    const std::vector<int> ns = req.n ? std::vector<int>{*req.n}
                                      : std::vector<int>{100, 1000, 10000};
    const std::vector<double> alphas = req.alpha ? std::vector<double>{*req.alpha}
                                                 : std::vector<double>{0.05, 0.01, 0.001};
    const int reps = req.cal_reps.value_or(req.reps.value_or(req.paper_scale ? 40000 : 10000));
    table_builder tb({"n", "alpha", "rule", "threshold"});
    const model_spec model = gauss_mean_known_var{1.0};
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        std::vector<double> max_lr =
            mc_null_max_lr(model, n, 1, reps, phase_seed(req.seed, static_cast<int>(k)));
        std::sort(max_lr.begin(), max_lr.end());
        for (double alpha : alphas) {
            const long idx = static_cast<long>(std::ceil(reps * (1.0 - alpha))) - 1;
            tb.table.add_row({static_cast<std::int64_t>(n), alpha, std::string("monte-carlo"),
                              max_lr[static_cast<std::size_t>(idx)]});
            tb.table.add_row({static_cast<std::int64_t>(n), alpha, std::string("gumbel"),
                              gumbel_threshold(n, alpha).c_lr});
        }
        tb.table.add_row({static_cast<std::int64_t>(n), std::string(""),
                          std::string("two-log-n"), two_log_n(n)});
    }
    tb.provenance(req, "reps=" + std::to_string(reps));
    return tb.table;
}

// --- E2: location of false positives under the null ---------------------

inline result_table exp_null_tau_locations(const experiment_request& req) {
    const int n = req.n.value_or(10000);
    const int reps = req.reps.value_or(req.paper_scale ? 40000 : 6000);
    const int cal_reps = req.cal_reps.value_or(req.paper_scale ? 20000 : 5000);
    const double alpha = req.alpha.value_or(0.05);
    const model_spec model = gauss_mean_known_var{1.0};
    const double c = mc_null_quantile(model, n, 1, alpha, cal_reps, phase_seed(req.seed, 0));

    std::vector<int> tau_hat(static_cast<std::size_t>(reps));
    std::vector<double> max_lr(static_cast<std::size_t>(reps));
    const std::uint64_t data_seed = phase_seed(req.seed, 1);
    parallel_replicates(reps, [&](long i) {
        rng gen(substream_seed(data_seed, static_cast<std::uint64_t>(i)));
        time_series ts(iid_gauss_vector(n, gen));
        const curve_max m = max_over_curve(lr_mean_known_var(ts, 1.0, 1));
        tau_hat[static_cast<std::size_t>(i)] = m.tau;
        max_lr[static_cast<std::size_t>(i)] = m.value;
    });

    table_builder tb({"rep", "tau_hat", "tau_frac", "max_lr", "detected"});
    long detected = 0;
    for (int i = 0; i < reps; ++i) {
        const bool det = max_lr[i] > c;
        detected += det;
        tb.table.add_row({static_cast<std::int64_t>(i), static_cast<std::int64_t>(tau_hat[i]),
                          static_cast<double>(tau_hat[i]) / n, max_lr[i],
                          static_cast<std::int64_t>(det)});
    }
    tb.provenance(req, "n=" + std::to_string(n) + " reps=" + std::to_string(reps) +
                           " alpha=" + fmt(alpha) + " threshold=" + fmt(c));
    tb.table.note("detections", std::to_string(detected));
    return tb.table;
}

// --- E3: thresholds under a minimum segment length -----------------------

inline result_table exp_minseg_thresholds(const experiment_request& req) {
    const std::vector<int> ns = req.n ? std::vector<int>{*req.n}
                                      : std::vector<int>{100, 1000, 10000};
    const double alpha = req.alpha.value_or(0.01);
    const int reps = req.cal_reps.value_or(req.reps.value_or(req.paper_scale ? 20000 : 5000));
    const std::vector<double> fracs{0.001, 0.01, 0.025, 0.05, 0.1, 0.2};
    table_builder tb({"n", "minseg_frac", "minseg", "alpha", "threshold"});
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        std::vector<int> minsegs;
        for (double f : fracs)
            minsegs.push_back(std::max(1, static_cast<int>(std::lround(f * n))));
        // One null sweep per n: each replicate's curve serves every minseg.
        std::vector<std::vector<double>> maxima(minsegs.size(),
                                                std::vector<double>(static_cast<std::size_t>(reps)));
        const std::uint64_t seed = phase_seed(req.seed, 10 + static_cast<int>(k));
        parallel_replicates(reps, [&](long i) {
            rng gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
            time_series ts(iid_gauss_vector(n, gen));
            const lr_curve curve = lr_mean_known_var(ts, 1.0, 1);
            for (std::size_t m = 0; m < minsegs.size(); ++m) {
                double best = 0.0;
                for (int tau = minsegs[m]; tau <= n - minsegs[m]; ++tau)
                    best = std::max(best, curve.at(tau));
                maxima[m][static_cast<std::size_t>(i)] = best;
            }
        });
        for (std::size_t m = 0; m < minsegs.size(); ++m) {
            const double c = kth_order_statistic(maxima[m], alpha);
            tb.table.add_row({static_cast<std::int64_t>(n), fracs[m],
                              static_cast<std::int64_t>(minsegs[m]), alpha, c});
        }
    }
    tb.provenance(req, "reps=" + std::to_string(reps) + " alpha=" + fmt(alpha));
    return tb.table;
}

// --- E4: lower bound on power as the change size varies ------------------

inline result_table exp_power_bound(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    const double q0 = req.q0.value_or(0.5);
    const double alpha = req.alpha.value_or(0.01);
    const int cal_reps = req.cal_reps.value_or(10000);
    const double dmax = req.delta.value_or(0.5);
    const double k = mc_null_quantile(gauss_mean_known_var{1.0}, n, 1, alpha, cal_reps,
                                      phase_seed(req.seed, 0));
    table_builder tb({"delta", "nu", "threshold", "power_bound"});
    for (int j = 0; j <= 50; ++j) {
        const double delta = dmax * j / 50.0;
        const double nu = noncentrality(n, q0, delta);
        tb.table.add_row({delta, nu, k, power_lower_bound(nu, k)});
    }
    tb.provenance(req, "n=" + std::to_string(n) + " q0=" + fmt(q0) + " alpha=" + fmt(alpha) +
                           " cal_reps=" + std::to_string(cal_reps) + " threshold=" + fmt(k));
    return tb.table;
}

// --- E5: CUSUM realisations in the presence of a change ------------------

inline result_table exp_cusum_realisations(const experiment_request& req) {
    struct scenario {
        int n;
        double delta;
    };
    const std::vector<scenario> scenarios{{100, 1.0}, {400, 1.0}, {100, 2.0}};
    const double q0 = req.q0.value_or(0.4);
    const int paths = 25;
    const int reps = req.reps.value_or(2000);
    table_builder tb({"kind", "scenario", "n", "delta", "rep", "index", "value"});
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const int n = scenarios[s].n;
        const double delta = scenarios[s].delta;
        const int tau0 = static_cast<int>(std::lround(q0 * n));
        const signal_spec signal{piecewise_constant{{tau0}, {0.0, delta}}, n};
        const auto add = [&](const char* kind, long rep, long index, double value) {
            tb.table.add_row({std::string(kind), static_cast<std::int64_t>(s + 1),
                              static_cast<std::int64_t>(n), delta, static_cast<std::int64_t>(rep),
                              static_cast<std::int64_t>(index), value});
        };
        const cusum_curve_result mean_curve = cusum_curve(time_series(signal_values(signal)));
        for (int tau = 1; tau < n; ++tau) add("mean", 0, tau, mean_curve.c[tau - 1]);

        const std::uint64_t seed = phase_seed(req.seed, 100 + static_cast<int>(s));
        for (int rep = 0; rep < paths; ++rep) {
            const time_series ts =
                gen_series(signal, iid_gauss{1.0}, substream_seed(seed, rep));
            const cusum_curve_result cc = cusum_curve(ts);
            for (int tau = 1; tau < n; ++tau) add("path", rep + 1, tau, cc.c[tau - 1]);
        }
        const std::uint64_t hseed = phase_seed(req.seed, 200 + static_cast<int>(s));
        std::vector<int> hats(static_cast<std::size_t>(reps));
        parallel_replicates(reps, [&](long i) {
            const time_series ts =
                gen_series(signal, iid_gauss{1.0}, substream_seed(hseed, static_cast<std::uint64_t>(i)));
            hats[static_cast<std::size_t>(i)] =
                max_over_curve(lr_mean_known_var(ts, 1.0, 1)).tau;
        });
        for (int i = 0; i < reps; ++i) add("tau_hat", i + 1, 0, hats[i]);
    }
    tb.provenance(req, "q0=" + fmt(q0) + " paths=" + std::to_string(paths) +
                           " reps=" + std::to_string(reps));
    return tb.table;
}

// --- E6: bias of the estimated change size -------------------------------

inline result_table exp_delta_bias(const experiment_request& req) {
    struct scenario {
        int n;
        double delta;
    };
    const std::vector<scenario> scenarios{{100, 0.5}, {400, 0.5}, {100, 1.0}};
    const int reps = req.reps.value_or(10000);
    const int cal_reps = req.cal_reps.value_or(10000);
    const double alpha = req.alpha.value_or(0.05);
    table_builder tb({"kind", "scenario", "n", "delta", "threshold", "power",
                      "mean_abs_delta_hat", "over_pct", "delta_hat", "detected"});

    double thresholds[2] = {
        mc_null_quantile(gauss_mean_known_var{1.0}, 100, 1, alpha, cal_reps,
                         phase_seed(req.seed, 0)),
        mc_null_quantile(gauss_mean_known_var{1.0}, 400, 1, alpha, cal_reps,
                         phase_seed(req.seed, 1))};

    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const int n = scenarios[s].n;
        const double delta = scenarios[s].delta;
        const double c = thresholds[n == 400 ? 1 : 0];
        const int tau0 = n / 2;
        const signal_spec signal{piecewise_constant{{tau0}, {0.0, delta}}, n};
        std::vector<double> delta_hats(static_cast<std::size_t>(reps));
        std::vector<char> detected(static_cast<std::size_t>(reps));
        const std::uint64_t seed = phase_seed(req.seed, 10 + static_cast<int>(s));
        parallel_replicates(reps, [&](long i) {
            const time_series ts =
                gen_series(signal, iid_gauss{1.0}, substream_seed(seed, static_cast<std::uint64_t>(i)));
            const curve_max m = max_over_curve(lr_mean_known_var(ts, 1.0, 1));
            delta_hats[static_cast<std::size_t>(i)] = estimate_delta(ts, m.tau);
            detected[static_cast<std::size_t>(i)] = m.value > c;
        });
        long ndet = 0;
        double sum_abs = 0.0;
        for (int i = 0; i < reps; ++i) {
            if (detected[i]) {
                ++ndet;
                sum_abs += std::fabs(delta_hats[i]);
            }
        }
        const double mean_abs = ndet ? sum_abs / ndet : 0.0;
        const double over_pct = ndet ? (mean_abs / delta - 1.0) * 100.0 : 0.0;
        tb.table.add_row({std::string("summary"), static_cast<std::int64_t>(s + 1),
                          static_cast<std::int64_t>(n), delta, c,
                          static_cast<double>(ndet) / reps, mean_abs, over_pct,
                          std::string(""), std::string("")});
        for (int i = 0; i < reps; ++i)
            tb.table.add_row({std::string("sample"), static_cast<std::int64_t>(s + 1),
                              static_cast<std::int64_t>(n), delta, std::string(""),
                              std::string(""), std::string(""), std::string(""), delta_hats[i],
                              static_cast<std::int64_t>(detected[i] != 0)});
    }
    tb.provenance(req, "reps=" + std::to_string(reps) + " cal_reps=" + std::to_string(cal_reps) +
                           " alpha=" + fmt(alpha));
    return tb.table;
}

// --- E7: a single-change test applied to a multi-change signal -----------

inline result_table exp_single_test_multiple_changes(const experiment_request& req) {
    const int n = req.n.value_or(400);
    if (n < 8) throw config_error("E7: need n >= 8");
    const std::vector<int> cps{n / 4, n / 2, 3 * n / 4};
    const std::vector<double> levels{0.0, 2.0, 0.5, 1.5};
    const signal_spec signal{piecewise_constant{cps, levels}, n};
    const signal_spec sub_signal{piecewise_constant{{cps[0]}, {levels[0], levels[1]}}, cps[1]};
    const model_spec model = gauss_mean_known_var{1.0};

    const time_series data = gen_series(signal, iid_gauss{1.0}, phase_seed(req.seed, 0));
    std::vector<double> sub_values(data.values().begin(), data.values().begin() + cps[1]);
    const time_series sub_data(std::move(sub_values));

    table_builder tb({"kind", "index", "value"});
    const auto add_series = [&](const char* kind, std::span<const double> v, int offset) {
        for (std::size_t i = 0; i < v.size(); ++i)
            tb.table.add_row({std::string(kind), static_cast<std::int64_t>(i + offset), v[i]});
    };
    const auto add_curve = [&](const char* kind, const lr_curve& c) {
        for (int tau = c.tau_lo; tau <= c.tau_hi(); ++tau)
            tb.table.add_row({std::string(kind), static_cast<std::int64_t>(tau), c.at(tau)});
    };
    add_series("data", data.values(), 1);
    add_series("signal", signal_values(signal), 1);
    const lr_curve elr = expected_lr_curve(signal, model, 1);
    add_curve("lr", compute_curve(data, model, 1));
    add_curve("elr", elr);
    add_curve("lr_sub", compute_curve(sub_data, model, 1));
    add_curve("elr_sub", expected_lr_curve(sub_signal, model, 1));

    tb.provenance(req, "n=" + std::to_string(n) + " cps=" + std::to_string(cps[0]) + "," +
                           std::to_string(cps[1]) + "," + std::to_string(cps[2]));
    tb.table.note("expected_lr_argmax", std::to_string(max_over_curve(elr).tau));
    return tb.table;
}

// --- E8: false positives under AR(1) noise -------------------------------

inline result_table exp_ar1_false_positives(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    const int reps = req.reps.value_or(2000);
    const int cal_reps = req.cal_reps.value_or(10000);
    const double alpha = req.alpha.value_or(0.05);
    const std::vector<double> rhos = req.rho
        ? std::vector<double>{*req.rho}
        : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const double c_iid = mc_null_quantile(gauss_mean_known_var{1.0}, n, 1, alpha, cal_reps,
                                          phase_seed(req.seed, 0));
    table_builder tb({"rho", "inflation_cusum", "rate_naive", "rate_inflated"});
    for (std::size_t k = 0; k < rhos.size(); ++k) {
        const double rho = rhos[k];
        const double infl = ar1_inflation(rho);
        const double c_infl = c_iid * infl * infl;  // LR scale squares the CUSUM factor
        const std::uint64_t seed = phase_seed(req.seed, 1 + static_cast<int>(k));
        std::vector<double> maxima(static_cast<std::size_t>(reps));
        parallel_replicates(reps, [&](long i) {
            rng gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
            time_series ts(gen_ar1(n, rho, 1.0, gen));
            maxima[static_cast<std::size_t>(i)] =
                max_over_curve(lr_mean_known_var(ts, 1.0, 1)).value;
        });
        long naive = 0, inflated = 0;
        for (double m : maxima) {
            naive += m > c_iid;
            inflated += m > c_infl;
        }
        tb.table.add_row({rho, infl, static_cast<double>(naive) / reps,
                          static_cast<double>(inflated) / reps});
    }
    tb.provenance(req, "n=" + std::to_string(n) + " reps=" + std::to_string(reps) +
                           " alpha=" + fmt(alpha) + " c_iid=" + fmt(c_iid));
    return tb.table;
}

// --- E9: false positives under heavy-tailed noise ------------------------

inline result_table exp_heavy_tail_false_positives(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    const int reps = req.reps.value_or(5000);
    const int cal_reps = req.cal_reps.value_or(10000);
    const double alpha = req.alpha.value_or(0.05);
    const int df = req.df.value_or(5);
    const int big_minseg = req.minseg.value_or(25);
    // Default scales the t noise to unit variance, matching the Gaussian
    // comparison; --raw-t-scale keeps the raw t distribution.
    const double t_scale = req.raw_t_scale ? 1.0 : std::sqrt((df - 2.0) / df);

    const double c_full = mc_null_quantile(gauss_mean_known_var{1.0}, n, 1, alpha, cal_reps,
                                           phase_seed(req.seed, 0));
    const double c_matched = mc_null_quantile(gauss_mean_known_var{1.0}, n, big_minseg, alpha,
                                              cal_reps, phase_seed(req.seed, 1));

    table_builder tb({"kind", "noise", "minseg", "threshold_kind", "threshold", "rate",
                      "tau_hat"});
    for (int noise_t5 = 1; noise_t5 >= 0; --noise_t5) {
        const std::string noise = noise_t5 ? "t5" : "gauss";
        const std::uint64_t seed = phase_seed(req.seed, 2 + noise_t5);
        std::vector<double> max_full(static_cast<std::size_t>(reps)),
            max_big(static_cast<std::size_t>(reps));
        std::vector<int> tau_full(static_cast<std::size_t>(reps)),
            tau_big(static_cast<std::size_t>(reps));
        parallel_replicates(reps, [&](long i) {
            rng gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
            std::vector<double> x(static_cast<std::size_t>(n));
            for (auto& v : x)
                v = noise_t5 ? t_scale * gen.student_t(df) : gen.normal();
            const lr_curve curve = lr_mean_known_var(time_series(std::move(x)), 1.0, 1);
            const curve_max m1 = max_over_curve(curve);
            max_full[static_cast<std::size_t>(i)] = m1.value;
            tau_full[static_cast<std::size_t>(i)] = m1.tau;
            double best = 0.0;
            int best_tau = big_minseg;
            for (int tau = big_minseg; tau <= n - big_minseg; ++tau)
                if (curve.at(tau) > best) {
                    best = curve.at(tau);
                    best_tau = tau;
                }
            max_big[static_cast<std::size_t>(i)] = best;
            tau_big[static_cast<std::size_t>(i)] = best_tau;
        });
        const auto rate_row = [&](int minseg, const char* kind, double c,
                                  const std::vector<double>& maxima) {
            long det = 0;
            for (double m : maxima) det += m > c;
            tb.table.add_row({std::string("rate"), noise, static_cast<std::int64_t>(minseg),
                              std::string(kind), c, static_cast<double>(det) / reps,
                              std::string("")});
        };
        rate_row(1, "full-range", c_full, max_full);
        rate_row(big_minseg, "full-range", c_full, max_big);
        rate_row(big_minseg, "matched", c_matched, max_big);
        for (int i = 0; i < reps; ++i) {
            if (max_full[i] > c_full)
                tb.table.add_row({std::string("tau_hat"), noise, static_cast<std::int64_t>(1),
                                  std::string("full-range"), std::string(""), std::string(""),
                                  static_cast<std::int64_t>(tau_full[i])});
            if (max_big[i] > c_full)
                tb.table.add_row({std::string("tau_hat"), noise,
                                  static_cast<std::int64_t>(big_minseg),
                                  std::string("full-range"), std::string(""), std::string(""),
                                  static_cast<std::int64_t>(tau_big[i])});
        }
    }
    tb.provenance(req, "n=" + std::to_string(n) + " reps=" + std::to_string(reps) +
                           " df=" + std::to_string(df) + " t_scale=" + fmt(t_scale) +
                           " alpha=" + fmt(alpha));
    return tb.table;
}

// --- E10: Poisson LR versus Gaussian-on-Anscombe -------------------------

inline result_table exp_poisson_vs_gaussian(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    const int datasets = req.reps.value_or(1000);
    const int cal_reps = req.cal_reps.value_or(10000);
    const double alpha = req.alpha.value_or(0.05);
    const double null_mean = req.null_mean.value_or(0.1);
    const int tau0 = n / 2;

    const auto both_maxima = [&](const time_series& counts) {
        const double mp = max_over_curve(lr_poisson(counts, 1)).value;
        const double mg =
            max_over_curve(lr_mean_known_var(anscombe_transform(counts), 1.0, 1)).value;
        return std::pair<double, double>{mp, mg};
    };

    // Both tests are calibrated on the same Poisson null draws.
    std::vector<double> null_p(static_cast<std::size_t>(cal_reps)),
        null_g(static_cast<std::size_t>(cal_reps));
    const std::uint64_t cal_seed = phase_seed(req.seed, 0);
    parallel_replicates(cal_reps, [&](long i) {
        rng gen(substream_seed(cal_seed, static_cast<std::uint64_t>(i)));
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = static_cast<double>(gen.poisson(null_mean));
        const auto [mp, mg] = both_maxima(time_series(std::move(x)));
        null_p[static_cast<std::size_t>(i)] = mp;
        null_g[static_cast<std::size_t>(i)] = mg;
    });
    const double cp = kth_order_statistic(null_p, alpha);
    const double cg = kth_order_statistic(null_g, alpha);

    table_builder tb({"section", "index", "value_poisson", "value_gauss"});

    {
        rng gen(phase_seed(req.seed, 1));
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = static_cast<double>(gen.poisson(null_mean));
        const time_series ts(std::move(x));
        const lr_curve lp = lr_poisson(ts, 1);
        const lr_curve lg = lr_mean_known_var(anscombe_transform(ts), 1.0, 1);
        for (int tau = 1; tau < n; ++tau)
            tb.table.add_row({std::string("null_curve"), static_cast<std::int64_t>(tau),
                              lp.at(tau), lg.at(tau)});
    }

    const signal_spec alt{piecewise_constant{{tau0}, {0.075, 0.125}}, n};
    std::vector<double> alt_p(static_cast<std::size_t>(datasets)),
        alt_g(static_cast<std::size_t>(datasets));
    const std::uint64_t alt_seed = phase_seed(req.seed, 2);
    parallel_replicates(datasets, [&](long i) {
        const time_series ts =
            gen_series(alt, poisson_counts{}, substream_seed(alt_seed, static_cast<std::uint64_t>(i)));
        const auto [mp, mg] = both_maxima(ts);
        alt_p[static_cast<std::size_t>(i)] = mp;
        alt_g[static_cast<std::size_t>(i)] = mg;
    });
    long det_p = 0, det_g = 0;
    for (int i = 0; i < datasets; ++i) {
        det_p += alt_p[i] > cp;
        det_g += alt_g[i] > cg;
        tb.table.add_row({std::string("scatter"), static_cast<std::int64_t>(i + 1), alt_p[i],
                          alt_g[i]});
    }
    tb.table.add_row({std::string("power"), static_cast<std::int64_t>(0),
                      static_cast<double>(det_p) / datasets,
                      static_cast<double>(det_g) / datasets});
    tb.provenance(req, "n=" + std::to_string(n) + " datasets=" + std::to_string(datasets) +
                           " cal_reps=" + std::to_string(cal_reps) + " null_mean=" +
                           fmt(null_mean) + " alpha=" + fmt(alpha));
    tb.table.note("threshold_poisson", fmt(cp));
    tb.table.note("threshold_gauss", fmt(cg));
    return tb.table;
}

// --- E11: null behaviour of the mean-and-variance statistic --------------

inline result_table exp_meanvar_null(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    const int reps = req.reps.value_or(5000);
    const int cal_reps = req.cal_reps.value_or(5000);
    const double alpha = req.alpha.value_or(0.05);
    const int minseg = std::max(2, req.minseg.value_or(2));
    const model_spec model = gauss_mean_and_var{};
    const double c =
        mc_null_quantile(model, n, minseg, alpha, cal_reps, phase_seed(req.seed, 0));

    const int mid = n / 2;
    std::vector<double> lr_edge(static_cast<std::size_t>(reps)),
        lr_mid(static_cast<std::size_t>(reps));
    std::vector<int> hats(static_cast<std::size_t>(reps));
    std::vector<double> maxima(static_cast<std::size_t>(reps));
    const std::uint64_t seed = phase_seed(req.seed, 1);
    parallel_replicates(reps, [&](long i) {
        rng gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
        time_series ts(iid_gauss_vector(n, gen));
        const lr_curve curve = lr_mean_and_variance(ts, minseg);
        lr_edge[static_cast<std::size_t>(i)] =
            curve.is_infinite(minseg) ? std::numeric_limits<double>::infinity()
                                      : curve.at(minseg);
        lr_mid[static_cast<std::size_t>(i)] =
            curve.is_infinite(mid) ? std::numeric_limits<double>::infinity() : curve.at(mid);
        const curve_max m = max_over_curve(curve);
        hats[static_cast<std::size_t>(i)] = m.tau;
        maxima[static_cast<std::size_t>(i)] = m.value;
    });

    table_builder tb({"section", "label", "index", "a", "b"});
    const auto qq_rows = [&](const char* label, std::vector<double> values) {
        std::sort(values.begin(), values.end());
        for (int j = 1; j <= 199; ++j) {
            const double p = j / 200.0;
            const double emp = values[static_cast<std::size_t>(
                std::min<long>(static_cast<long>(std::ceil(p * reps)) - 1, reps - 1))];
            tb.table.add_row({std::string("qq"), std::string(label),
                              static_cast<std::int64_t>(j), emp, chi2_2_quantile(p)});
        }
    };
    qq_rows("edge", lr_edge);
    qq_rows("mid", lr_mid);

    long det = 0, boundary = 0;
    for (int i = 0; i < reps; ++i) {
        const bool d = maxima[i] > c;
        det += d;
        if (d && (hats[i] <= minseg || hats[i] >= n - minseg)) ++boundary;
        tb.table.add_row({std::string("tau_hat"), std::string(""),
                          static_cast<std::int64_t>(i + 1),
                          static_cast<double>(hats[i]), static_cast<double>(d)});
    }
    tb.provenance(req, "n=" + std::to_string(n) + " reps=" + std::to_string(reps) +
                           " minseg=" + std::to_string(minseg) + " alpha=" + fmt(alpha) +
                           " threshold=" + fmt(c));
    tb.table.note("detections", std::to_string(det));
    tb.table.note("boundary_fraction_detected",
                  fmt(det ? static_cast<double>(boundary) / det : 0.0));
    return tb.table;
}

// --- E12: exact AR(1) likelihood ratio versus plain CUSUM ----------------

inline result_table exp_ar1_lr_vs_cusum(const experiment_request& req) {
    const int n = req.n.value_or(80);
    const int tau0 = req.n ? n / 4 : 20;
    const double delta = req.delta.value_or(2.0);
    const int reps = req.reps.value_or(2000);
    const int cal_reps = req.cal_reps.value_or(5000);
    const double alpha = req.alpha.value_or(0.01);
    const std::vector<double> rhos = req.rho
        ? std::vector<double>{*req.rho}
        : std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    table_builder tb({"rho", "threshold_lr", "threshold_cusum", "power_lr", "power_cusum",
                      "mae_lr", "mae_cusum"});
    for (std::size_t k = 0; k < rhos.size(); ++k) {
        const double rho = rhos[k];
        // Null calibration for both statistics on shared AR(1) draws.
        std::vector<double> null_lr(static_cast<std::size_t>(cal_reps)),
            null_cu(static_cast<std::size_t>(cal_reps));
        const std::uint64_t cal_seed = phase_seed(req.seed, 1000 + static_cast<int>(k));
        parallel_replicates(cal_reps, [&](long i) {
            rng gen(substream_seed(cal_seed, static_cast<std::uint64_t>(i)));
            time_series ts(gen_ar1(n, rho, 1.0, gen));
            null_lr[static_cast<std::size_t>(i)] =
                max_over_curve(lr_ar1_mean(ts, rho, 1)).value;
            null_cu[static_cast<std::size_t>(i)] =
                max_over_curve(lr_mean_known_var(ts, 1.0, 1)).value;
        });
        const double c_lr = kth_order_statistic(null_lr, alpha);
        const double c_cu = kth_order_statistic(null_cu, alpha);

        std::vector<char> det_lr(static_cast<std::size_t>(reps)),
            det_cu(static_cast<std::size_t>(reps));
        std::vector<int> err_lr(static_cast<std::size_t>(reps)),
            err_cu(static_cast<std::size_t>(reps));
        const std::uint64_t alt_seed = phase_seed(req.seed, 2000 + static_cast<int>(k));
        parallel_replicates(reps, [&](long i) {
            rng gen(substream_seed(alt_seed, static_cast<std::uint64_t>(i)));
            std::vector<double> x = gen_ar1(n, rho, 1.0, gen);
            for (int t = tau0; t < n; ++t) x[t] += delta;
            time_series ts(std::move(x));
            const curve_max m1 = max_over_curve(lr_ar1_mean(ts, rho, 1));
            const curve_max m2 = max_over_curve(lr_mean_known_var(ts, 1.0, 1));
            det_lr[static_cast<std::size_t>(i)] = m1.value > c_lr;
            det_cu[static_cast<std::size_t>(i)] = m2.value > c_cu;
            err_lr[static_cast<std::size_t>(i)] = std::abs(m1.tau - tau0);
            err_cu[static_cast<std::size_t>(i)] = std::abs(m2.tau - tau0);
        });
        double p_lr = 0.0, p_cu = 0.0, mae_lr = 0.0, mae_cu = 0.0;
        for (int i = 0; i < reps; ++i) {
            p_lr += det_lr[i];
            p_cu += det_cu[i];
            mae_lr += err_lr[i];
            mae_cu += err_cu[i];
        }
        tb.table.add_row({rho, c_lr, c_cu, p_lr / reps, p_cu / reps, mae_lr / reps,
                          mae_cu / reps});
    }
    tb.provenance(req, "n=" + std::to_string(n) + " tau0=" + std::to_string(tau0) +
                           " delta=" + fmt(delta) + " reps=" + std::to_string(reps) +
                           " cal_reps=" + std::to_string(cal_reps) + " alpha=" + fmt(alpha));
    tb.table.note("mae_note", "mean absolute error of tau_hat over all replicates");
    return tb.table;
}

// --- E13: change-in-slope statistic --------------------------------------

inline result_table exp_slope_study(const experiment_request& req) {
    const int n = req.n.value_or(1000);
    if (n < 10) throw config_error("E13: need n >= 10");
    table_builder tb({"section", "series", "index", "value"});
    const auto add_curve = [&](const char* section, const char* series, const lr_curve& c,
                               bool sqrt_values) {
        for (int tau = c.tau_lo; tau <= c.tau_hi(); ++tau)
            tb.table.add_row({std::string(section), std::string(series),
                              static_cast<std::int64_t>(tau),
                              sqrt_values ? std::sqrt(c.at(tau)) : c.at(tau)});
    };
    const auto add_values = [&](const char* section, const char* series,
                                std::span<const double> v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            tb.table.add_row({std::string(section), std::string(series),
                              static_cast<std::int64_t>(i + 1), v[i]});
    };

    // (a) same IID data under the slope and mean statistics
    {
        rng gen(phase_seed(req.seed, 0));
        const time_series ts(iid_gauss_vector(n, gen));
        add_curve("iid", "lr_slope", lr_slope(ts, 1.0, 1), false);
        add_curve("iid", "lr_mean", lr_mean_known_var(ts, 1.0, 1), false);
    }

    // (b) one change in slope; (c) two changes bracketing the midpoint
    const auto slope_section = [&](const char* section, const signal_spec& signal, int phase) {
        const time_series data = gen_series(signal, iid_gauss{1.0}, phase_seed(req.seed, phase));
        add_values(section, "data", data.values());
        add_values(section, "signal", signal_values(signal));
        add_curve(section, "abs_v_data", lr_slope(data, 1.0, 1), true);
        const lr_curve noiseless = expected_lr_curve(signal, gauss_slope_known_var{1.0}, 1);
        add_curve(section, "abs_v_mean", noiseless, true);
        tb.table.note(std::string(section) + "_noiseless_argmax",
                      std::to_string(max_over_curve(noiseless).tau));
    };
    slope_section("one", signal_spec{piecewise_linear{0.0, 0.0, {{n / 2, 0.02}}}, n}, 1);
    slope_section("two",
                  signal_spec{piecewise_linear{0.0, 0.0, {{2 * n / 5, 0.02}, {3 * n / 5, 0.02}}}, n},
                  2);

    tb.provenance(req, "n=" + std::to_string(n));
    return tb.table;
}

} // namespace detail

inline result_table run_experiment(const experiment_request& req) {
    if (req.id == "E1") return detail::exp_thresholds_vs_n(req);
    if (req.id == "E2") return detail::exp_null_tau_locations(req);
    if (req.id == "E3") return detail::exp_minseg_thresholds(req);
    if (req.id == "E4") return detail::exp_power_bound(req);
    if (req.id == "E5") return detail::exp_cusum_realisations(req);
    if (req.id == "E6") return detail::exp_delta_bias(req);
    if (req.id == "E7") return detail::exp_single_test_multiple_changes(req);
    if (req.id == "E8") return detail::exp_ar1_false_positives(req);
    if (req.id == "E9") return detail::exp_heavy_tail_false_positives(req);
    if (req.id == "E10") return detail::exp_poisson_vs_gaussian(req);
    if (req.id == "E11") return detail::exp_meanvar_null(req);
    if (req.id == "E12") return detail::exp_ar1_lr_vs_cusum(req);
    if (req.id == "E13") return detail::exp_slope_study(req);
    throw config_error("unknown experiment id: " + req.id);
}

} // namespace cpscan
