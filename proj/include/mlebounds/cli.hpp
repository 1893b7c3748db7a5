#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "mlebounds/report.hpp"

// Subcommand dispatch behind the command-line binary. Kept header-only and
// stream-parameterized so the whole surface is exercisable in-process.
//
// Exit codes: 0 success, 1 invalid or infeasible configuration, 2 numeric
// failure (bad data values, missing roots, divergent integrals).

namespace mleb {
namespace detail {

inline std::vector<double> read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open data file '" + path + "'");
    }
    std::vector<double> xs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const char* b = line.data();
        const char* e = b + line.size();
        double v = 0.0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) {
            throw numeric_error("data file '" + path + "' line "
                                + std::to_string(line_no)
                                + ": cannot parse '" + line + "' as a real");
        }
        if (!std::isfinite(v)) {
            throw numeric_error("data file '" + path + "' line "
                                + std::to_string(line_no)
                                + ": non-finite value");
        }
        xs.push_back(v);
    }
    return xs;
}

inline model_family build_family(const run_config& cfg) {
    return make_family(cfg.family_name, {cfg.theta_lower, cfg.theta_upper},
                       cfg.fparams);
}

inline std::vector<double> load_sample(const run_config& cfg,
                                       const model_family& fam) {
    if (cfg.data_file) {
        std::vector<double> xs = read_data_file(*cfg.data_file);
        for (double x : xs) fam.check_x(x);
        return xs;
    }
    fam.check_theta(*cfg.simulate_from);
    rng g(cfg.master_seed);
    return draw_sample(fam, *cfg.simulate_from, cfg.data_n, g);
}

inline json run_fit(const run_config& cfg) {
    model_family fam = build_family(cfg);
    std::vector<double> xs = load_sample(cfg, fam);
    json j = report_envelope(cfg);
    j["n"] = xs.size();
    if (cfg.simulate_from) {
        j["data_source"] = "simulated";
        j["simulate_from"] = *cfg.simulate_from;
    } else {
        j["data_source"] = "file";
    }
    if (cfg.estimator == estimator_kind::mle) {
        fit_result r = fit_mle(fam, xs);
        j["estimator"] = "mle";
        j["theta_hat"] = r.theta_hat;
        j["at_boundary"] = r.at_boundary;
        return j;
    }
    robust_estimate est = fit_truncated(fam, xs, cfg.delta, cfg.beta,
                                        cfg.center, cfg.theta_star);
    j["estimator"] = "truncated";
    j["delta"] = est.delta;
    j["beta"] = est.beta;
    j["beta_tuned"] = est.beta_tuned;
    j["width_case"] = width_case_name(est.wcase);
    j["theta_hat"] = est.theta_hat;
    j["at_boundary"] = est.at_boundary;
    j["monotone_warning"] = est.monotone_warning;
    j["half_width"] = est.half_width;
    j["band"] = interval_json(est.band);
    j["n_condition_ok"] = est.n_condition_ok;
    return j;
}

inline json run_bounds(const run_config& cfg) {
    model_family fam = build_family(cfg);
    double theta = *cfg.theta_star;
    fam.check_theta(theta);
    std::size_t n = cfg.exp_n;
    bound_params params = make_bound_params(fam, theta);
    width_case wcase = fam.lipschitz_constant_in_x ? width_case::constant_c
                                                   : width_case::general_c;
    json j = report_envelope(cfg);
    j["theta_star"] = theta;
    j["n"] = n;
    j["delta"] = cfg.delta;
    j["fisher"] = params.fisher;
    j["c_mean"] = params.c_mean;
    j["c_sq_mean"] = params.c_sq_mean;
    j["width_case"] = width_case_name(wcase);

    double beta = cfg.beta ? *cfg.beta : tune_beta(params, n, cfg.delta, wcase);
    j["beta"] = beta;
    j["beta_tuned"] = !cfg.beta.has_value();
    j["half_width"] = half_width(params, beta, n, cfg.delta, wcase);
    j["deviation_bound"] = deviation_bound(params, n, cfg.delta, wcase);
    sample_size_result mss = min_sample_size(params, beta, cfg.delta);
    j["min_n"] = mss.n_min;
    j["min_n_satisfiable"] = mss.satisfiable;
    j["n_condition_ok"] = mss.satisfiable && n >= mss.n_min;

    deviation_norm_set set =
        sum_deviation_norms(fam, theta, cfg.regime, n, cfg.p_max);
    tail_class cls = cfg.regime == norm_regime::theta2
                         ? subg_params_for_sum(set)
                         : subgamma_params_for_sum(set);
    j["score_sum_tail"] = tail_class_json(cls);

    if (cfg.x_box) {
        lipschitz_profile profile =
            certify_profile(fam, *cfg.x_box, cfg.regime, n, theta);
        oracle_bound_result ob = oracle_bound(profile, fam, theta, n,
                                              cfg.delta);
        json c;
        c["x_lower"] = cfg.x_box->lo;
        c["x_upper"] = cfg.x_box->hi;
        c["c_H"] = profile.c_H;
        c["c_l"] = profile.c_l;
        c["regime"] = cfg.regime == norm_regime::theta2 ? "theta2" : "theta1";
        c["radius"] = ob.radius;
        c["bias"] = ob.bias;
        c["total"] = ob.total;
        j["classical_oracle"] = c;
    }
    return j;
}

inline json run_tune(const run_config& cfg) {
    model_family fam = build_family(cfg);
    double theta = *cfg.theta_star;
    fam.check_theta(theta);
    std::size_t n = cfg.exp_n;
    bound_params params = make_bound_params(fam, theta);
    width_case wcase = fam.lipschitz_constant_in_x ? width_case::constant_c
                                                   : width_case::general_c;
    double beta = tune_beta(params, n, cfg.delta, wcase);

    json j = report_envelope(cfg);
    j["theta_star"] = theta;
    j["n"] = n;
    j["delta"] = cfg.delta;
    j["width_case"] = width_case_name(wcase);
    j["fisher"] = params.fisher;
    j["c_mean"] = params.c_mean;
    j["c_sq_mean"] = params.c_sq_mean;
    j["beta"] = beta;
    j["half_width"] = half_width(params, beta, n, cfg.delta, wcase);
    j["deviation_bound"] = deviation_bound(params, n, cfg.delta, wcase);
    sample_size_result mss = min_sample_size(params, beta, cfg.delta);
    j["min_n"] = mss.n_min;
    j["min_n_satisfiable"] = mss.satisfiable;
    j["n_condition_ok"] = mss.satisfiable && n >= mss.n_min;
    return j;
}

inline json run_norms(const run_config& cfg) {
    json j = report_envelope(cfg);
    j["regime"] = cfg.regime == norm_regime::theta2 ? "theta2" : "theta1";
    j["p_max"] = cfg.p_max;

    moment_oracle oracle;
    if (cfg.data_file) {
        std::vector<double> xs = detail::read_data_file(*cfg.data_file);
        oracle = empirical_oracle(xs);
        j["source"] = "empirical";
        j["n"] = xs.size();
    } else {
        model_family fam = build_family(cfg);
        fam.check_theta(*cfg.norm_theta);
        oracle = quadrature_oracle(fam, *cfg.norm_theta);
        j["source"] = "quadrature";
        j["theta"] = *cfg.norm_theta;
    }
    norm_result nr = cfg.regime == norm_regime::theta2
                         ? theta2_norm(oracle, cfg.p_max)
                         : theta1_norm(oracle, cfg.p_max);
    j["value"] = nr.value;
    j["achieving_p"] = nr.achieving_p;
    j["truncated"] = nr.truncated;
    j["high_variance"] = nr.high_variance;
    return j;
}

inline json run_simulate_cmd(const run_config& cfg) {
    experiment_config ec;
    if (cfg.has_family) ec.family = build_family(cfg);
    if (cfg.theta_star) ec.theta_star = *cfg.theta_star;
    ec.n = cfg.exp_n;
    ec.trials = cfg.trials;
    ec.delta = cfg.delta;
    ec.estimator = cfg.estimator;
    ec.beta = cfg.beta;
    ec.master_seed = cfg.master_seed;
    ec.workers = cfg.workers;
    ec.contamination = cfg.contamination;
    ec.noise = cfg.noise;
    ec.noise_scale = cfg.noise_scale;
    ec.tail_grid = cfg.tail_grid;
    ec.tail_t_max = cfg.tail_t_max;

    simulation_report rep;
    switch (cfg.experiment) {
        case experiment_kind::coverage: rep = run_coverage(ec); break;
        case experiment_kind::deviation: rep = run_deviation(ec); break;
        case experiment_kind::bias: rep = run_bias(ec); break;
        case experiment_kind::tail_sum: rep = run_tail_sum(ec); break;
        case experiment_kind::contamination:
            rep = run_contamination(ec);
            break;
    }

    json j = report_envelope(cfg);
    json body = simulation_report_json(rep);
    for (auto& [key, value] : body.items()) j[key] = value;
    if (!rep.tail_curve.empty()) {
        write_tail_curve_csv(cfg.out_dir + "/tail_curve.csv", rep.tail_curve);
        j["tail_curve_csv"] = "tail_curve.csv";
    }
    return j;
}

}  // namespace detail

// Runs one validated configuration. JSON lands on `out`; diagnostics on
// `err`. Returns the process exit code.
inline int dispatch(const run_config& cfg, std::ostream& out,
                    std::ostream& err) {
    try {
        json j;
        switch (cfg.command) {
            case command_kind::fit: j = detail::run_fit(cfg); break;
            case command_kind::bounds: j = detail::run_bounds(cfg); break;
            case command_kind::tune: j = detail::run_tune(cfg); break;
            case command_kind::norms: j = detail::run_norms(cfg); break;
            case command_kind::simulate:
                j = detail::run_simulate_cmd(cfg);
                break;
        }
        out << j.dump(2) << '\n';
        return 0;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace mleb
