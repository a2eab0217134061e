// cpscan: single change-point detection on univariate series.
//
// Subcommands: detect, calibrate, simulate, experiment, estimate-sigma.
// Exit codes: 0 success, 2 I/O or malformed input, 3 invalid flags,
// 4 degenerate data.

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpscan/cpscan.hpp"

namespace {

struct cli_options {
    std::string input;
    std::string output;
    std::string model = "mean-known-var";
    std::string rule = "two-log-n";
    std::optional<double> sigma;
    std::optional<double> phi;
    std::optional<double> mu;
    std::optional<int> minseg;
    double alpha = 0.05;
    int reps = 10000;
    std::optional<std::uint64_t> seed;
    double fixed_threshold = 0.0;
    double null_mean = 1.0;
    int precision = 6;
};

std::string fmt(double v, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::uint64_t resolve_seed(const cli_options& opt) {
    if (opt.seed) return *opt.seed;
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cout << "seed=" << seed << "\n";
    return seed;
}

cpscan::model_spec parse_model(const cli_options& opt) {
    using namespace cpscan;
    if (opt.model == "mean-known-var") {
        if (!opt.sigma) throw config_error("--sigma is required for model mean-known-var");
        return gauss_mean_known_var{*opt.sigma};
    }
    if (opt.model == "mean-unknown-var") return gauss_mean_unknown_var{};
    if (opt.model == "poisson") return poisson_mean{};
    if (opt.model == "var-known-mean") {
        if (!opt.mu) throw config_error("--mu is required for model var-known-mean");
        return gauss_var_known_mean{*opt.mu};
    }
    if (opt.model == "mean-and-var") return gauss_mean_and_var{};
    if (opt.model == "slope") {
        if (!opt.sigma) throw config_error("--sigma is required for model slope");
        return gauss_slope_known_var{*opt.sigma};
    }
    if (opt.model == "ar1-mean") {
        if (!opt.phi) throw config_error("--phi is required for model ar1-mean");
        return ar1_mean_known{*opt.phi};
    }
    throw config_error("unknown model: " + opt.model);
}

int default_minseg(const cpscan::model_spec& model) {
    return std::holds_alternative<cpscan::gauss_mean_and_var>(model) ? 2 : 1;
}

cpscan::threshold_rule parse_rule(const cli_options& opt, std::uint64_t seed) {
    using namespace cpscan;
    threshold_rule rule;
    rule.alpha = opt.alpha;
    rule.reps = opt.reps;
    rule.seed = seed;
    rule.fixed_value = opt.fixed_threshold;
    if (opt.rule == "mc" || opt.rule == "monte-carlo")
        rule.kind = rule_kind::monte_carlo;
    else if (opt.rule == "gumbel")
        rule.kind = rule_kind::gumbel;
    else if (opt.rule == "bonferroni")
        rule.kind = rule_kind::bonferroni;
    else if (opt.rule == "two-log-n")
        rule.kind = rule_kind::two_log_n;
    else if (opt.rule == "fixed")
        rule.kind = rule_kind::fixed;
    else
        throw config_error("unknown threshold rule: " + opt.rule);
    return rule;
}

int cmd_detect(const cli_options& opt) {
    const cpscan::model_spec model = parse_model(opt);
    const int minseg = opt.minseg.value_or(default_minseg(model));
    const std::uint64_t seed =
        opt.rule == "mc" || opt.rule == "monte-carlo" ? resolve_seed(opt) : opt.seed.value_or(1);
    const cpscan::time_series ts(cpscan::read_column_csv(opt.input));
    const cpscan::threshold_rule rule = parse_rule(opt, seed);
    const double c =
        cpscan::resolve_threshold(rule, model, ts.size(), minseg, opt.null_mean);
    const cpscan::detection_result res = cpscan::detect(ts, {model, minseg, c});
    std::cout << "detected=" << (res.detected ? "true" : "false") << "\n";
    std::cout << "tau_hat=" << res.tau_hat << "\n";
    std::cout << "max_lr=" << (res.max_infinite ? "inf" : fmt(res.max_lr, opt.precision)) << "\n";
    if (res.delta_hat) std::cout << "delta_hat=" << fmt(*res.delta_hat, opt.precision) << "\n";
    std::cout << "threshold=" << fmt(res.threshold, opt.precision) << "\n";
    std::cout << "model=" << cpscan::model_name(model) << "\n";
    return 0;
}

int cmd_calibrate(const cli_options& opt, int n) {
    const cpscan::model_spec model = parse_model(opt);
    const int minseg = opt.minseg.value_or(default_minseg(model));
    const std::uint64_t seed =
        opt.rule == "mc" || opt.rule == "monte-carlo" ? resolve_seed(opt) : opt.seed.value_or(1);
    const cpscan::threshold_rule rule = parse_rule(opt, seed);
    const double c = cpscan::resolve_threshold(rule, model, n, minseg, opt.null_mean);
    std::cout << "threshold=" << fmt(c, opt.precision) << "\n";
    std::cout << "rule=" << opt.rule << "\n";
    std::cout << "model=" << cpscan::model_name(model) << "\n";
    std::cout << "n=" << n << " minseg=" << minseg << " alpha=" << fmt(opt.alpha, opt.precision)
              << "\n";
    return 0;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
    return out;
}

struct simulate_options {
    int n = 100;
    std::string signal = "constant";
    std::string levels = "0";
    std::string cps;
    double intercept = 0.0;
    double slope = 0.0;
    std::string kinks;  // "tau:slope_change,..."
    std::string noise = "gauss";
    double sigma = 1.0;
    double rho = 0.0;
    int df = 5;
    double scale = 1.0;
};

int cmd_simulate(const cli_options& opt, const simulate_options& sim) {
    using namespace cpscan;
    signal_spec signal;
    signal.n = sim.n;
    if (sim.signal == "constant" || sim.signal == "step" || sim.signal == "piecewise-constant") {
        piecewise_constant pc;
        pc.levels = parse_double_list(sim.levels);
        if (!sim.cps.empty()) pc.change_points = parse_int_list(sim.cps);
        if (pc.levels.empty()) pc.levels.push_back(0.0);
        signal.shape = pc;
    } else if (sim.signal == "linear" || sim.signal == "piecewise-linear") {
        piecewise_linear pl;
        pl.intercept = sim.intercept;
        pl.slope = sim.slope;
        if (!sim.kinks.empty()) {
            std::stringstream ss(sim.kinks);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw config_error("--kinks expects tau:slope_change pairs");
                pl.kinks.emplace_back(std::stoi(item.substr(0, colon)),
                                      std::stod(item.substr(colon + 1)));
            }
        }
        signal.shape = pl;
    } else {
        throw config_error("unknown signal type: " + sim.signal);
    }

    noise_spec noise = iid_gauss{sim.sigma};
    if (sim.noise == "gauss")
        noise = iid_gauss{sim.sigma};
    else if (sim.noise == "ar1")
        noise = ar1_noise{sim.rho, sim.sigma};
    else if (sim.noise == "t")
        noise = student_t_noise{sim.df, sim.scale};
    else if (sim.noise == "poisson")
        noise = poisson_counts{};
    else
        throw config_error("unknown noise type: " + sim.noise);

    const std::uint64_t seed = resolve_seed(opt);
    const time_series ts = gen_series(signal, noise, seed);
    if (opt.output.empty()) {
        write_column_csv(std::cout, ts.values());
    } else {
        std::ofstream out(opt.output, std::ios::binary);
        if (!out) throw io_error("cannot open output file: " + opt.output);
        write_column_csv(out, ts.values());
    }
    return 0;
}

int cmd_experiment(const cli_options& opt, cpscan::experiment_request req) {
    req.seed = resolve_seed(opt);
    const cpscan::result_table table = cpscan::run_experiment(req);
    const std::string path = opt.output.empty() ? req.id + ".csv" : opt.output;
    cpscan::write_csv(path, table);
    std::cout << "experiment=" << req.id << " rows=" << table.rows.size() << " output=" << path
              << "\n";
    return 0;
}

int cmd_estimate_sigma(const cli_options& opt) {
    const std::vector<double> values = cpscan::read_column_csv(opt.input);
    const cpscan::mad_result res = cpscan::mad_sigma(values);
    if (res.degenerate)
        std::cerr << "warning: degenerate data (constant or perfectly linear); sigma_hat=0\n";
    std::cout << "sigma_hat=" << fmt(res.sigma, opt.precision) << "\n";
    std::cout << "degenerate=" << (res.degenerate ? "true" : "false") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single change-point detection via likelihood-ratio scan statistics"};
    app.require_subcommand(1);

    cli_options opt;
    simulate_options sim;
    cpscan::experiment_request req;
    int calibrate_n = 1000;

    const auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", opt.model,
                        "mean-known-var | mean-unknown-var | poisson | var-known-mean | "
                        "mean-and-var | slope | ar1-mean");
        cmd->add_option("--sigma", [&](const CLI::results_t& r) {
            opt.sigma = std::stod(r[0]); return true; }, "noise sd (known-variance models)");
        cmd->add_option("--phi", [&](const CLI::results_t& r) {
            opt.phi = std::stod(r[0]); return true; }, "AR(1) lag-1 autocorrelation");
        cmd->add_option("--mu", [&](const CLI::results_t& r) {
            opt.mu = std::stod(r[0]); return true; }, "known mean (variance model)");
        cmd->add_option("--minseg", [&](const CLI::results_t& r) {
            opt.minseg = std::stoi(r[0]); return true; }, "minimum segment length");
    };
    const auto add_rule_flags = [&](CLI::App* cmd) {
        cmd->add_option("--rule", opt.rule, "mc | gumbel | bonferroni | two-log-n | fixed");
        cmd->add_option("--alpha", opt.alpha, "significance level");
        cmd->add_option("--reps", opt.reps, "Monte Carlo replicates");
        cmd->add_option("--threshold", opt.fixed_threshold, "cutoff for --rule fixed");
        cmd->add_option("--null-mean", opt.null_mean, "Poisson null mean for MC calibration");
    };
    const auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", [&](const CLI::results_t& r) {
            opt.seed = std::stoull(r[0]); return true; }, "RNG seed (printed if auto-chosen)");
    };

    CLI::App* detect = app.add_subcommand("detect", "test a series for a single change-point");
    detect->add_option("--input", opt.input, "single-column CSV")->required();
    add_model_flags(detect);
    add_rule_flags(detect);
    add_seed(detect);
    detect->add_option("--precision", opt.precision, "significant digits in output");

    CLI::App* calibrate = app.add_subcommand("calibrate", "resolve a detection threshold");
    calibrate->add_option("--n", calibrate_n, "series length")->required();
    add_model_flags(calibrate);
    add_rule_flags(calibrate);
    add_seed(calibrate);
    calibrate->add_option("--precision", opt.precision, "significant digits in output");

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic series");
    simulate->add_option("--n", sim.n, "series length");
    simulate->add_option("--signal", sim.signal, "constant | step | linear");
    simulate->add_option("--levels", sim.levels, "comma-separated segment levels");
    simulate->add_option("--cps", sim.cps, "comma-separated change-points");
    simulate->add_option("--intercept", sim.intercept, "linear signal intercept");
    simulate->add_option("--slope", sim.slope, "linear signal slope");
    simulate->add_option("--kinks", sim.kinks, "tau:slope_change pairs, comma-separated");
    simulate->add_option("--noise", sim.noise, "gauss | ar1 | t | poisson");
    simulate->add_option("--sigma", sim.sigma, "noise sd");
    simulate->add_option("--rho", sim.rho, "AR(1) autocorrelation");
    simulate->add_option("--df", sim.df, "t degrees of freedom");
    simulate->add_option("--scale", sim.scale, "t scale");
    simulate->add_option("--output", opt.output, "output CSV path (stdout if omitted)");
    add_seed(simulate);

    CLI::App* experiment = app.add_subcommand("experiment", "run a scripted study (E1-E13)");
    experiment->add_option("--id", req.id, "experiment id, E1..E13")->required();
    experiment->add_option("--output", opt.output, "output CSV path (default <id>.csv)");
    experiment->add_option("--n", [&](const CLI::results_t& r) {
        req.n = std::stoi(r[0]); return true; }, "series length override");
    experiment->add_option("--reps", [&](const CLI::results_t& r) {
        req.reps = std::stoi(r[0]); return true; }, "replicate count override");
    experiment->add_option("--cal-reps", [&](const CLI::results_t& r) {
        req.cal_reps = std::stoi(r[0]); return true; }, "calibration replicates override");
    experiment->add_option("--minseg", [&](const CLI::results_t& r) {
        req.minseg = std::stoi(r[0]); return true; }, "minimum segment length override");
    experiment->add_option("--df", [&](const CLI::results_t& r) {
        req.df = std::stoi(r[0]); return true; }, "t degrees of freedom override");
    experiment->add_option("--delta", [&](const CLI::results_t& r) {
        req.delta = std::stod(r[0]); return true; }, "change size override");
    experiment->add_option("--q0", [&](const CLI::results_t& r) {
        req.q0 = std::stod(r[0]); return true; }, "change location fraction override");
    experiment->add_option("--rho", [&](const CLI::results_t& r) {
        req.rho = std::stod(r[0]); return true; }, "autocorrelation override");
    experiment->add_option("--alpha", [&](const CLI::results_t& r) {
        req.alpha = std::stod(r[0]); return true; }, "significance level override");
    experiment->add_option("--null-mean", [&](const CLI::results_t& r) {
        req.null_mean = std::stod(r[0]); return true; }, "Poisson null mean (E10)");
    experiment->add_flag("--raw-t-scale", req.raw_t_scale, "keep raw t scale in E9");
    experiment->add_flag("--paper-scale", req.paper_scale, "paper-scale replicate counts");
    add_seed(experiment);

    CLI::App* estimate = app.add_subcommand("estimate-sigma", "MAD noise-scale estimate");
    estimate->add_option("--input", opt.input, "single-column CSV")->required();
    estimate->add_option("--precision", opt.precision, "significant digits in output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (detect->parsed()) return cmd_detect(opt);
        if (calibrate->parsed()) return cmd_calibrate(opt, calibrate_n);
        if (simulate->parsed()) return cmd_simulate(opt, sim);
        if (experiment->parsed()) return cmd_experiment(opt, req);
        if (estimate->parsed()) return cmd_estimate_sigma(opt);
    } catch (const cpscan::degenerate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const cpscan::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cpscan::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cpscan::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
