#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "mlebounds/config.hpp"

// JSON and CSV rendering of results. All output is deterministic: keys
// keep insertion order, doubles print in shortest round-trip form, and
// nothing time- or path-dependent is ever emitted, so identical runs
// produce identical bytes.

namespace mleb {

using json = nlohmann::ordered_json;

constexpr int report_schema_version = 1;

inline json report_envelope(const run_config& cfg) {
    json j;
    j["schema_version"] = report_schema_version;
    j["command"] = command_name(cfg.command);
    if (cfg.has_family) {
        json fam;
        fam["name"] = cfg.family_name;
        fam["theta_lower"] = cfg.theta_lower;
        fam["theta_upper"] = cfg.theta_upper;
        if (cfg.family_name == "pareto_shape") {
            fam["x_min"] = cfg.fparams.x_min;
        }
        if (cfg.family_name == "weibull_scale") {
            fam["weibull_k"] = cfg.fparams.weibull_k;
        }
        j["family"] = fam;
    }
    return j;
}

inline json value_se_json(const value_se& v) {
    json j;
    j["value"] = v.value;
    j["se"] = v.se;
    return j;
}

inline json interval_json(const interval_result& band) {
    json j;
    j["lower"] = band.lo;
    j["upper"] = band.hi;
    j["center_mode"] = band.mode == interval_mode::practical ? "practical"
                                                             : "theoretical";
    return j;
}

inline json tail_class_json(const tail_class& cls) {
    json j;
    switch (cls.k) {
        case tail_class::kind::sub_gaussian:
            j["kind"] = "sub_gaussian";
            j["sigma_sq"] = cls.sigma_sq;
            break;
        case tail_class::kind::sub_exponential:
            j["kind"] = "sub_exponential";
            j["lambda"] = cls.lambda;
            j["alpha"] = cls.alpha;
            break;
        case tail_class::kind::sub_gamma:
            j["kind"] = "sub_gamma";
            j["eta"] = cls.eta;
            j["M"] = cls.M;
            break;
    }
    return j;
}

inline json simulation_report_json(const simulation_report& rep) {
    json j;
    j["experiment"] = rep.experiment;
    j["trials"] = rep.trials;
    j["n"] = rep.n;
    j["theta_star"] = rep.theta_star;
    j["delta"] = rep.delta;
    if (rep.beta > 0.0) {
        j["beta"] = rep.beta;
        j["beta_tuned"] = rep.beta_tuned;
    }
    if (rep.half_width > 0.0) j["half_width"] = rep.half_width;
    if (rep.bound > 0.0) j["deviation_bound"] = rep.bound;
    j["n_condition_ok"] = rep.n_condition_ok;
    if (rep.coverage) j["coverage"] = value_se_json(*rep.coverage);
    if (rep.within_bound) j["within_bound"] = value_se_json(*rep.within_bound);
    if (rep.bias) j["bias"] = value_se_json(*rep.bias);
    if (rep.predicted_bias) j["predicted_bias"] = *rep.predicted_bias;
    if (rep.rmse) j["rmse"] = *rep.rmse;
    if (rep.rmse_mle) j["rmse_mle"] = *rep.rmse_mle;
    if (rep.rmse_truncated) j["rmse_truncated"] = *rep.rmse_truncated;
    if (rep.mse_diff) j["mse_diff"] = value_se_json(*rep.mse_diff);
    if (!rep.tail_curve.empty()) {
        json curve = json::array();
        for (const auto& pt : rep.tail_curve) {
            json row;
            row["t"] = pt.t;
            row["empirical"] = pt.empirical;
            row["se"] = pt.se;
            row["bound"] = pt.bound;
            curve.push_back(row);
        }
        j["tail_curve"] = curve;
    }
    j["failures"] = rep.failures;
    j["failure_rate"] = rep.failure_rate;
    j["master_seed"] = rep.master_seed;
    j["seed_digest"] = rep.seed_digest;
    return j;
}

// CSV image of the tail curve: header plus one row per grid point, using
// the same shortest round-trip double format as the JSON.
inline void write_tail_curve_csv(const std::string& path,
                                 const std::vector<tail_point>& curve) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw validation_error("cannot open '" + path + "' for writing");
    }
    out << "t,empirical,se,bound\n";
    for (const auto& pt : curve) {
        out << json(pt.t).dump() << ',' << json(pt.empirical).dump() << ','
            << json(pt.se).dump() << ',' << json(pt.bound).dump() << '\n';
    }
}

}  // namespace mleb
