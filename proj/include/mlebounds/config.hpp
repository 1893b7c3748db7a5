#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mlebounds/simulate.hpp"

// Flat sectioned key-value run configuration.
//
// Files look like
//
//   [family]
//   name = pareto_shape      # comment
//   theta_lower = 1.0
//
// Validation is collected, not short-circuited: a broken config reports
// every problem at once in a single validation_error.

namespace mleb {

enum class command_kind { fit, bounds, tune, norms, simulate };
enum class experiment_kind { coverage, deviation, bias, tail_sum, contamination };

struct run_config {
    command_kind command = command_kind::fit;

    // [run]
    std::string out_dir = ".";
    std::uint64_t master_seed = 0;
    int workers = 1;

    // [family]
    bool has_family = false;
    std::string family_name;
    double theta_lower = 0.0;
    double theta_upper = 0.0;
    family_params fparams;

    // [data] - exactly one source feeds a data-consuming command
    std::optional<std::string> data_file;
    std::optional<double> simulate_from;  // draw data_n points at this theta
    std::size_t data_n = 0;

    // [estimator]
    estimator_kind estimator = estimator_kind::truncated;
    double delta = 0.05;
    std::optional<double> beta;  // empty: "auto" tuning
    interval_mode center = interval_mode::practical;

    // [experiment]
    experiment_kind experiment = experiment_kind::coverage;
    std::optional<double> theta_star;
    std::size_t exp_n = 0;
    std::size_t trials = 0;
    std::optional<contamination_spec> contamination;
    noise_kind noise = noise_kind::gaussian;
    double noise_scale = 1.0;
    std::size_t tail_grid = 20;
    double tail_t_max = 0.0;

    // [norms]
    norm_regime regime = norm_regime::theta2;
    int p_max = 50;
    std::optional<double> norm_theta;

    // [bounds] - optional x-box enabling the classical profile block
    std::optional<interval> x_box;
};

inline std::string command_name(command_kind c) {
    switch (c) {
        case command_kind::fit: return "fit";
        case command_kind::bounds: return "bounds";
        case command_kind::tune: return "tune";
        case command_kind::norms: return "norms";
        case command_kind::simulate: return "simulate";
    }
    return "?";
}

inline std::string experiment_name(experiment_kind e) {
    switch (e) {
        case experiment_kind::coverage: return "coverage";
        case experiment_kind::deviation: return "deviation";
        case experiment_kind::bias: return "bias";
        case experiment_kind::tail_sum: return "tail_sum";
        case experiment_kind::contamination: return "contamination";
    }
    return "?";
}

namespace detail {

struct config_key_doc {
    const char* section;
    const char* key;
    const char* doc;
};

// Single source of truth for the accepted keys: drives unknown-key
// validation and the printed configuration reference.
inline const std::vector<config_key_doc>& config_schema() {
    static const std::vector<config_key_doc> schema = {
        {"run", "command", "fit | bounds | tune | norms | simulate; must match "
                           "the invoked subcommand when both are given"},
        {"run", "out_dir", "directory for CSV curve files (default \".\")"},
        {"run", "master_seed", "unsigned 64-bit seed for every random draw "
                               "(default 0)"},
        {"run", "workers", "worker threads for simulate runs (default 1; "
                           "never changes output bytes)"},
        {"family", "name", "gaussian_variance | pareto_shape | weibull_scale | "
                           "exponential_rate | expfam_poisson | expfam_bernoulli"},
        {"family", "theta_lower", "lower end of the parameter space"},
        {"family", "theta_upper", "upper end of the parameter space"},
        {"family", "x_min", "pareto_shape support threshold (default 1.0)"},
        {"family", "weibull_k", "weibull_scale integer shape (default 2)"},
        {"data", "file", "newline-separated decimal reals, UTF-8, no header"},
        {"data", "simulate_from", "draw the sample at this parameter instead "
                                  "of reading a file"},
        {"data", "n", "sample size when simulate_from is used"},
        {"estimator", "kind", "mle | truncated (default truncated)"},
        {"estimator", "delta", "confidence level, in (0, 1/2) for the "
                               "truncated estimator (default 0.05)"},
        {"estimator", "beta", "truncation level: a positive real, or auto "
                              "(default auto)"},
        {"estimator", "center", "practical | theoretical interval centering "
                                "(default practical)"},
        {"experiment", "kind", "coverage | deviation | bias | tail_sum | "
                               "contamination (default coverage)"},
        {"experiment", "theta_star", "true parameter for experiments and "
                                     "calculator evaluation points"},
        {"experiment", "n", "per-trial sample size / calculator sample size"},
        {"experiment", "trials", "Monte Carlo trial count"},
        {"experiment", "eps", "contamination fraction in [0, 1)"},
        {"experiment", "outlier", "replacement value for contaminated points"},
        {"experiment", "noise", "tail_sum summand law: gaussian | laplace "
                                "(default gaussian)"},
        {"experiment", "noise_scale", "tail_sum summand scale (default 1.0)"},
        {"experiment", "tail_grid", "tail curve grid points (default 20)"},
        {"experiment", "tail_t_max", "largest tail threshold; 0 picks four "
                                     "standard deviations (default 0)"},
        {"norms", "regime", "theta1 | theta2 (default theta2)"},
        {"norms", "p_max", "largest moment order scanned (default 50)"},
        {"norms", "theta", "evaluate the family score norms at this parameter"},
        {"bounds", "x_lower", "lower end of the observation box for the "
                              "certified profile"},
        {"bounds", "x_upper", "upper end of the observation box for the "
                              "certified profile"},
    };
    return schema;
}

inline bool known_config_key(const std::string& sec, const std::string& key) {
    for (const auto& d : config_schema()) {
        if (sec == d.section && key == d.key) return true;
    }
    return false;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Raw text of a config: section -> key -> value, with syntax errors
// collected rather than thrown.
struct config_text {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::vector<std::string> errors;
};

inline config_text read_config_text(std::istream& in) {
    config_text text;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                text.errors.push_back("line " + std::to_string(line_no)
                                      + ": malformed section header '" + line
                                      + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            text.sections[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            text.errors.push_back("line " + std::to_string(line_no)
                                  + ": expected key = value, got '" + line
                                  + "'");
            continue;
        }
        if (section.empty()) {
            text.errors.push_back("line " + std::to_string(line_no)
                                  + ": key outside any [section]");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            text.errors.push_back("line " + std::to_string(line_no)
                                  + ": empty key");
            continue;
        }
        auto [it, inserted] = text.sections[section].emplace(key, value);
        if (!inserted) {
            text.errors.push_back("line " + std::to_string(line_no) + ": ["
                                  + section + "] " + key + " given twice");
        }
    }
    return text;
}

// Typed access over the raw text; every failed lookup or parse appends to
// the shared error list so callers report everything at once.
class config_reader {
public:
    explicit config_reader(config_text text) : text_(std::move(text)) {
        errors_ = text_.errors;
    }

    std::optional<std::string> raw(const std::string& sec,
                                   const std::string& key) {
        auto s = text_.sections.find(sec);
        if (s == text_.sections.end()) return {};
        auto k = s->second.find(key);
        if (k == s->second.end()) return {};
        return k->second;
    }

    bool has(const std::string& sec, const std::string& key) {
        return raw(sec, key).has_value();
    }

    std::optional<double> real(const std::string& sec, const std::string& key) {
        auto v = raw(sec, key);
        if (!v) return {};
        const char* b = v->data();
        const char* e = b + v->size();
        double out = 0.0;
        auto [p, ec] = std::from_chars(b, e, out);
        if (ec != std::errc{} || p != e) {
            fail(sec, key, "cannot parse '" + *v + "' as a real number");
            return {};
        }
        return out;
    }

    template <typename T>
    std::optional<T> integer(const std::string& sec, const std::string& key) {
        auto v = raw(sec, key);
        if (!v) return {};
        const char* b = v->data();
        const char* e = b + v->size();
        T out{};
        auto [p, ec] = std::from_chars(b, e, out);
        if (ec != std::errc{} || p != e) {
            fail(sec, key, "cannot parse '" + *v + "' as an integer");
            return {};
        }
        return out;
    }

    void fail(const std::string& sec, const std::string& key,
              const std::string& msg) {
        errors_.push_back("[" + sec + "] " + key + ": " + msg);
    }

    void fail(const std::string& msg) { errors_.push_back(msg); }

    void flag_unknown_keys() {
        for (const auto& [sec, kv] : text_.sections) {
            for (const auto& [key, value] : kv) {
                if (!known_config_key(sec, key)) {
                    errors_.push_back("[" + sec + "] " + key
                                      + ": unknown key");
                }
            }
        }
    }

    const std::vector<std::string>& errors() const { return errors_; }

private:
    config_text text_;
    std::vector<std::string> errors_;
};

}  // namespace detail

// Human-readable table of every accepted configuration key.
inline std::string config_key_reference() {
    std::ostringstream os;
    std::string last;
    for (const auto& d : detail::config_schema()) {
        if (last != d.section) {
            if (!last.empty()) os << '\n';
            os << '[' << d.section << "]\n";
            last = d.section;
        }
        os << "  " << d.key << "  -  " << d.doc << '\n';
    }
    return os.str();
}

// Parses and validates a configuration, reporting every problem at once.
inline run_config parse_config(std::istream& in,
                               const std::string& display_name) {
    detail::config_reader r(detail::read_config_text(in));
    run_config cfg;

    // [run]
    if (auto v = r.raw("run", "command")) {
        if (*v == "fit") cfg.command = command_kind::fit;
        else if (*v == "bounds") cfg.command = command_kind::bounds;
        else if (*v == "tune") cfg.command = command_kind::tune;
        else if (*v == "norms") cfg.command = command_kind::norms;
        else if (*v == "simulate") cfg.command = command_kind::simulate;
        else r.fail("run", "command", "unknown command '" + *v + "'");
    } else {
        r.fail("run", "command",
               "missing (fit | bounds | tune | norms | simulate)");
    }
    if (auto v = r.raw("run", "out_dir")) cfg.out_dir = *v;
    if (auto v = r.integer<std::uint64_t>("run", "master_seed")) {
        cfg.master_seed = *v;
    }
    if (auto v = r.integer<int>("run", "workers")) {
        cfg.workers = *v;
        if (cfg.workers < 1) r.fail("run", "workers", "must be at least 1");
    }

    // [family]
    if (auto v = r.raw("family", "name")) {
        cfg.has_family = true;
        cfg.family_name = *v;
        static const char* names[] = {"gaussian_variance", "pareto_shape",
                                      "weibull_scale", "exponential_rate",
                                      "expfam_poisson", "expfam_bernoulli"};
        bool ok = false;
        for (const char* n : names) ok = ok || cfg.family_name == n;
        if (!ok) r.fail("family", "name", "unknown family '" + *v + "'");
        auto lo = r.real("family", "theta_lower");
        auto hi = r.real("family", "theta_upper");
        if (!lo) r.fail("family", "theta_lower", "missing");
        if (!hi) r.fail("family", "theta_upper", "missing");
        if (lo && hi) {
            cfg.theta_lower = *lo;
            cfg.theta_upper = *hi;
            if (!(*lo < *hi)) {
                r.fail("family", "theta_lower",
                       "must be strictly below theta_upper");
            }
        }
        if (auto x = r.real("family", "x_min")) cfg.fparams.x_min = *x;
        if (auto k = r.integer<int>("family", "weibull_k")) {
            cfg.fparams.weibull_k = *k;
        }
    } else if (!r.raw("family", "theta_lower") && !r.raw("family", "theta_upper")) {
        // no family block at all: fine for tail_sum simulations and
        // empirical norms
    } else {
        r.fail("family", "name", "missing");
    }

    // [data]
    if (auto v = r.raw("data", "file")) {
        cfg.data_file = *v;
        if (!std::filesystem::exists(*v)) {
            r.fail("data", "file", "'" + *v + "' does not exist");
        }
    }
    if (auto v = r.real("data", "simulate_from")) cfg.simulate_from = *v;
    if (auto v = r.integer<std::uint64_t>("data", "n")) {
        cfg.data_n = static_cast<std::size_t>(*v);
    }

    // [estimator]
    if (auto v = r.raw("estimator", "kind")) {
        if (*v == "mle") cfg.estimator = estimator_kind::mle;
        else if (*v == "truncated") cfg.estimator = estimator_kind::truncated;
        else r.fail("estimator", "kind", "expected mle or truncated");
    }
    if (auto v = r.real("estimator", "delta")) cfg.delta = *v;
    if (auto v = r.raw("estimator", "beta")) {
        if (*v != "auto") {
            if (auto b = r.real("estimator", "beta")) {
                cfg.beta = *b;
                if (!(*b > 0.0)) {
                    r.fail("estimator", "beta", "must be positive");
                }
            }
        }
    }
    if (auto v = r.raw("estimator", "center")) {
        if (*v == "practical") cfg.center = interval_mode::practical;
        else if (*v == "theoretical") cfg.center = interval_mode::theoretical;
        else r.fail("estimator", "center", "expected practical or theoretical");
    }

    // [experiment]
    if (auto v = r.raw("experiment", "kind")) {
        if (*v == "coverage") cfg.experiment = experiment_kind::coverage;
        else if (*v == "deviation") cfg.experiment = experiment_kind::deviation;
        else if (*v == "bias") cfg.experiment = experiment_kind::bias;
        else if (*v == "tail_sum") cfg.experiment = experiment_kind::tail_sum;
        else if (*v == "contamination") {
            cfg.experiment = experiment_kind::contamination;
        } else {
            r.fail("experiment", "kind", "unknown experiment '" + *v + "'");
        }
    }
    if (auto v = r.real("experiment", "theta_star")) cfg.theta_star = *v;
    if (auto v = r.integer<std::uint64_t>("experiment", "n")) {
        cfg.exp_n = static_cast<std::size_t>(*v);
    }
    if (auto v = r.integer<std::uint64_t>("experiment", "trials")) {
        cfg.trials = static_cast<std::size_t>(*v);
    }
    {
        auto eps = r.real("experiment", "eps");
        auto outl = r.real("experiment", "outlier");
        if (eps || outl) {
            contamination_spec spec;
            spec.eps = eps.value_or(0.0);
            spec.outlier = outl.value_or(0.0);
            if (spec.eps < 0.0 || spec.eps >= 1.0) {
                r.fail("experiment", "eps", "must lie in [0, 1)");
            }
            cfg.contamination = spec;
        }
    }
    if (auto v = r.raw("experiment", "noise")) {
        if (*v == "gaussian") cfg.noise = noise_kind::gaussian;
        else if (*v == "laplace") cfg.noise = noise_kind::laplace;
        else r.fail("experiment", "noise", "expected gaussian or laplace");
    }
    if (auto v = r.real("experiment", "noise_scale")) {
        cfg.noise_scale = *v;
        if (!(*v > 0.0)) r.fail("experiment", "noise_scale", "must be positive");
    }
    if (auto v = r.integer<std::uint64_t>("experiment", "tail_grid")) {
        cfg.tail_grid = static_cast<std::size_t>(*v);
    }
    if (auto v = r.real("experiment", "tail_t_max")) cfg.tail_t_max = *v;

    // [norms]
    if (auto v = r.raw("norms", "regime")) {
        if (*v == "theta1") cfg.regime = norm_regime::theta1;
        else if (*v == "theta2") cfg.regime = norm_regime::theta2;
        else r.fail("norms", "regime", "expected theta1 or theta2");
    }
    if (auto v = r.integer<int>("norms", "p_max")) cfg.p_max = *v;
    if (auto v = r.real("norms", "theta")) cfg.norm_theta = *v;

    // [bounds]
    {
        auto lo = r.real("bounds", "x_lower");
        auto hi = r.real("bounds", "x_upper");
        if (lo.has_value() != hi.has_value()) {
            r.fail("bounds", lo ? "x_upper" : "x_lower",
                   "x_lower and x_upper must be given together");
        } else if (lo && hi) {
            if (!(*lo < *hi)) {
                r.fail("bounds", "x_lower", "must be strictly below x_upper");
            } else {
                cfg.x_box = interval{*lo, *hi};
            }
        }
    }

    r.flag_unknown_keys();

    // ---- per-command semantic checks ----
    auto need_family = [&] {
        if (!cfg.has_family) {
            r.fail("[family] name: required for the "
                   + command_name(cfg.command) + " command");
        }
    };
    auto need_theta_star = [&] {
        if (!cfg.theta_star) {
            r.fail("[experiment] theta_star: required for the "
                   + command_name(cfg.command) + " command");
        }
    };
    auto need_exp_n = [&] {
        if (cfg.exp_n < 1) {
            r.fail("[experiment] n: required for the "
                   + command_name(cfg.command) + " command");
        }
    };
    auto check_robust_delta = [&] {
        if (!(cfg.delta > 0.0 && cfg.delta < 0.5)) {
            r.fail("estimator", "delta",
                   "delta must lie in (0, 1/2) for the truncated estimator "
                   "(got " + std::to_string(cfg.delta) + ")");
        }
    };

    switch (cfg.command) {
        case command_kind::fit: {
            need_family();
            int sources = (cfg.data_file ? 1 : 0) + (cfg.simulate_from ? 1 : 0);
            if (sources != 1) {
                r.fail("[data]: exactly one data source required - set "
                       "either file or simulate_from");
            }
            if (cfg.simulate_from && cfg.data_n < 1) {
                r.fail("data", "n",
                       "required when simulate_from draws the sample");
            }
            if (cfg.estimator == estimator_kind::truncated) {
                check_robust_delta();
                if (cfg.center == interval_mode::theoretical
                    && !cfg.theta_star) {
                    r.fail("[experiment] theta_star: required for "
                           "theoretical interval centering");
                }
            }
            break;
        }
        case command_kind::bounds:
        case command_kind::tune: {
            need_family();
            need_theta_star();
            need_exp_n();
            check_robust_delta();
            if (cfg.data_file) {
                r.fail("[data] file: the " + command_name(cfg.command)
                       + " command is a pure calculator and takes no data");
            }
            break;
        }
        case command_kind::norms: {
            int sources = (cfg.data_file ? 1 : 0)
                        + (cfg.has_family && cfg.norm_theta ? 1 : 0);
            if (sources != 1) {
                r.fail("[norms]: exactly one source required - either a "
                       "[data] file for empirical norms, or a [family] "
                       "block plus [norms] theta");
            }
            if (cfg.p_max < 20) {
                r.fail("norms", "p_max", "must be at least 20");
            }
            break;
        }
        case command_kind::simulate: {
            if (cfg.experiment != experiment_kind::tail_sum) need_family();
            if (cfg.experiment != experiment_kind::tail_sum) need_theta_star();
            need_exp_n();
            if (cfg.trials < 1) {
                r.fail("experiment", "trials", "must be at least 1");
            }
            if (cfg.data_file) {
                r.fail("[data] file: simulate draws its own data - the "
                       "experiment block is the data source");
            }
            bool robust = cfg.experiment == experiment_kind::coverage
                       || cfg.experiment == experiment_kind::deviation
                       || cfg.experiment == experiment_kind::contamination
                       || (cfg.experiment == experiment_kind::bias
                           && cfg.estimator == estimator_kind::truncated);
            if (robust) check_robust_delta();
            if (cfg.experiment == experiment_kind::contamination
                && !cfg.contamination) {
                r.fail("[experiment] eps: contamination experiments need "
                       "eps and outlier");
            }
            break;
        }
    }

    if (!r.errors().empty()) {
        std::string msg = "invalid configuration " + display_name + ":";
        for (const auto& e : r.errors()) msg += "\n  - " + e;
        throw validation_error(msg);
    }
    return cfg;
}

inline run_config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open config file '" + path + "'");
    }
    return parse_config(in, "'" + path + "'");
}

}  // namespace mleb
