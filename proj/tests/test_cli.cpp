#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mlebounds/cli.hpp"

using namespace mleb;
using Catch::Matchers::ContainsSubstring;

namespace {

run_config parse_str(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "<test>");
}

struct dispatch_result {
    int code = 0;
    std::string out;
    std::string err;
};

dispatch_result dispatch_cfg(const run_config& cfg) {
    std::ostringstream out, err;
    dispatch_result r;
    r.code = dispatch(cfg, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "mlebounds_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

const std::string pareto_fit_text = R"(
# robust fit on simulated data
[run]
command = fit
master_seed = 42

[family]
name = pareto_shape
theta_lower = 1.0
theta_upper = 2.0
x_min = 1.0

[data]
simulate_from = 1.5
n = 400

[estimator]
kind = truncated
delta = 0.05
beta = auto
center = practical
)";

std::string tune_text(const std::string& n) {
    return "[run]\ncommand = tune\n[family]\nname = exponential_rate\n"
           "theta_lower = 0.5\ntheta_upper = 2.0\n[experiment]\n"
           "theta_star = 1.0\nn = " + n + "\n[estimator]\ndelta = 0.05\n";
}

}  // namespace

TEST_CASE("minimal pareto fit config parses") {
    run_config cfg = parse_str(pareto_fit_text);
    CHECK(cfg.command == command_kind::fit);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.has_family);
    CHECK(cfg.family_name == "pareto_shape");
    CHECK(cfg.theta_lower == 1.0);
    CHECK(cfg.theta_upper == 2.0);
    CHECK(cfg.fparams.x_min == 1.0);
    REQUIRE(cfg.simulate_from.has_value());
    CHECK(*cfg.simulate_from == 1.5);
    CHECK(cfg.data_n == 400);
    CHECK_FALSE(cfg.data_file.has_value());
    CHECK(cfg.estimator == estimator_kind::truncated);
    CHECK(cfg.delta == 0.05);
    CHECK_FALSE(cfg.beta.has_value());  // auto
    CHECK(cfg.center == interval_mode::practical);
}

TEST_CASE("robust delta outside the open half interval is named") {
    std::string text = pareto_fit_text;
    text.replace(text.find("delta = 0.05"), 12, "delta = 0.7 ");
    CHECK_THROWS_WITH(parse_str(text),
                      ContainsSubstring("delta must lie in (0, 1/2)"));
}

TEST_CASE("missing data file is a path error") {
    std::string text = pareto_fit_text;
    text.replace(text.find("simulate_from = 1.5"), 19,
                 "file = /no/such/file");
    text.replace(text.find("n = 400"), 7, "");
    CHECK_THROWS_WITH(parse_str(text), ContainsSubstring("does not exist"));
}

TEST_CASE("every config problem is reported at once") {
    const std::string bad = R"(
[run]
command = fit
[family]
name = unicorn
theta_lower = 2.0
theta_upper = 1.0
[data]
file = /no/such/file
n = abc
[estimator]
kind = truncated
delta = 0.7
)";
    try {
        parse_str(bad);
        FAIL("expected a validation_error");
    } catch (const validation_error& e) {
        std::string msg = e.what();
        CHECK_THAT(msg, ContainsSubstring("unknown family 'unicorn'"));
        CHECK_THAT(msg, ContainsSubstring("strictly below theta_upper"));
        CHECK_THAT(msg, ContainsSubstring("does not exist"));
        CHECK_THAT(msg, ContainsSubstring("cannot parse 'abc'"));
        CHECK_THAT(msg, ContainsSubstring("delta must lie in (0, 1/2)"));
    }
}

TEST_CASE("unknown keys and double data sources are flagged") {
    std::string unknown = pareto_fit_text;
    unknown.replace(unknown.find("x_min = 1.0"), 11, "x_mn  = 1.0");
    CHECK_THROWS_WITH(parse_str(unknown),
                      ContainsSubstring("[family] x_mn: unknown key"));

    std::string both = pareto_fit_text;
    std::string sample = write_temp("exists.txt", "1.5\n2.0\n");
    both.replace(both.find("simulate_from = 1.5"), 19,
                 "simulate_from = 1.5\nfile = " + sample);
    CHECK_THROWS_WITH(parse_str(both),
                      ContainsSubstring("exactly one data source"));
}

TEST_CASE("beta accepts auto or a positive number") {
    std::string numeric = pareto_fit_text;
    numeric.replace(numeric.find("beta = auto"), 11, "beta = 0.25");
    run_config cfg = parse_str(numeric);
    REQUIRE(cfg.beta.has_value());
    CHECK(*cfg.beta == 0.25);

    std::string negative = pareto_fit_text;
    negative.replace(negative.find("beta = auto"), 11, "beta = -1.0");
    CHECK_THROWS_WITH(parse_str(negative),
                      ContainsSubstring("must be positive"));

    std::string junk = pareto_fit_text;
    junk.replace(junk.find("beta = auto"), 11, "beta = xyz ");
    CHECK_THROWS_WITH(parse_str(junk), ContainsSubstring("cannot parse"));
}

TEST_CASE("syntax errors carry line numbers") {
    CHECK_THROWS_WITH(parse_str("[run\ncommand = fit\n"),
                      ContainsSubstring("malformed section header"));
    CHECK_THROWS_WITH(parse_str("command = fit\n"),
                      ContainsSubstring("key outside any [section]"));
    CHECK_THROWS_WITH(parse_str("[run]\ncommand = fit\ncommand = tune\n"),
                      ContainsSubstring("given twice"));
}

TEST_CASE("key reference covers the whole schema") {
    std::string ref = config_key_reference();
    for (const auto& d : detail::config_schema()) {
        CHECK_THAT(ref, ContainsSubstring(std::string("[") + d.section + "]"));
        CHECK_THAT(ref, ContainsSubstring(d.key));
    }
}

TEST_CASE("tail_sum simulation config needs no family block") {
    run_config cfg = parse_str(
        "[run]\ncommand = simulate\n[experiment]\nkind = tail_sum\n"
        "n = 10\ntrials = 50\nnoise = laplace\n");
    CHECK_FALSE(cfg.has_family);
    CHECK(cfg.experiment == experiment_kind::tail_sum);
    CHECK(cfg.noise == noise_kind::laplace);
}

TEST_CASE("contamination simulation config requires eps") {
    CHECK_THROWS_WITH(
        parse_str("[run]\ncommand = simulate\n[family]\n"
                  "name = gaussian_variance\ntheta_lower = 0.5\n"
                  "theta_upper = 400.0\n[experiment]\nkind = contamination\n"
                  "theta_star = 1.0\nn = 50\ntrials = 10\n"),
        ContainsSubstring("[experiment] eps"));
}

TEST_CASE("fit dispatch on simulated pareto data") {
    run_config cfg = parse_str(pareto_fit_text);
    dispatch_result r = dispatch_cfg(cfg);
    REQUIRE(r.code == 0);
    REQUIRE(r.err.empty());

    json j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["command"] == "fit");
    CHECK(j["estimator"] == "truncated");
    CHECK(j["beta_tuned"] == true);
    CHECK(j["n_condition_ok"] == true);
    double theta_hat = j["theta_hat"].get<double>();
    CHECK(theta_hat >= 1.0);
    CHECK(theta_hat <= 2.0);
    double h = j["half_width"].get<double>();
    double lo = j["band"]["lower"].get<double>();
    double hi = j["band"]["upper"].get<double>();
    CHECK(hi - lo == Catch::Approx(2.0 * h).epsilon(1e-12));
    CHECK(lo == Catch::Approx(theta_hat - h).epsilon(1e-12));
}

TEST_CASE("dispatch maps error classes onto exit codes") {
    SECTION("infeasible tuning is a configuration failure") {
        run_config cfg = parse_str(tune_text("4"));  // 4 <= 2 log(1/0.05)
        dispatch_result r = dispatch_cfg(cfg);
        CHECK(r.code == 1);
        CHECK_THAT(r.err, ContainsSubstring("infeasible"));
        CHECK(r.out.empty());
    }
    SECTION("feasible tuning succeeds") {
        run_config cfg = parse_str(tune_text("100"));
        dispatch_result r = dispatch_cfg(cfg);
        CHECK(r.code == 0);
        json j = json::parse(r.out);
        CHECK(j["beta"].get<double>() > 0.0);
        CHECK(j["deviation_bound"].get<double>()
              == Catch::Approx(j["half_width"].get<double>()).epsilon(1e-9));
    }
    SECTION("non-finite data values are numeric failures") {
        std::string data = write_temp("with_nan.txt", "1.5\nnan\n2.0\n");
        run_config cfg = parse_str(
            "[run]\ncommand = fit\n[family]\nname = exponential_rate\n"
            "theta_lower = 0.5\ntheta_upper = 2.0\n[data]\nfile = " + data
            + "\n[estimator]\nkind = mle\n");
        dispatch_result r = dispatch_cfg(cfg);
        CHECK(r.code == 2);
        CHECK_THAT(r.err, ContainsSubstring("non-finite"));
    }
    SECTION("unparseable data lines are numeric failures") {
        std::string data = write_temp("with_junk.txt", "1.5\npotato\n");
        run_config cfg = parse_str(
            "[run]\ncommand = fit\n[family]\nname = exponential_rate\n"
            "theta_lower = 0.5\ntheta_upper = 2.0\n[data]\nfile = " + data
            + "\n[estimator]\nkind = mle\n");
        dispatch_result r = dispatch_cfg(cfg);
        CHECK(r.code == 2);
        CHECK_THAT(r.err, ContainsSubstring("cannot parse 'potato'"));
    }
}

TEST_CASE("empirical norms flow through dispatch") {
    std::string data = write_temp("rademacher.txt", "1\n-1\n1\n-1\n1\n-1\n");
    run_config cfg = parse_str("[run]\ncommand = norms\n[norms]\n"
                               "regime = theta2\n[data]\nfile = " + data
                               + "\n");
    dispatch_result r = dispatch_cfg(cfg);
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["source"] == "empirical");
    CHECK(j["value"].get<double>() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(j["achieving_p"] == 1);
    CHECK(j["truncated"] == false);
}

TEST_CASE("stdout bytes are identical across repeats and workers") {
    run_config cfg = parse_str(
        "[run]\ncommand = simulate\nmaster_seed = 11\n[family]\n"
        "name = exponential_rate\ntheta_lower = 0.2\ntheta_upper = 5.0\n"
        "[experiment]\nkind = coverage\ntheta_star = 1.0\nn = 80\n"
        "trials = 60\n[estimator]\ndelta = 0.05\n");
    dispatch_result a = dispatch_cfg(cfg);
    REQUIRE(a.code == 0);
    CHECK(dispatch_cfg(cfg).out == a.out);
    cfg.workers = 4;
    CHECK(dispatch_cfg(cfg).out == a.out);

    cfg.workers = 1;
    cfg.master_seed = 12;
    CHECK(dispatch_cfg(cfg).out != a.out);
}

TEST_CASE("json output re-parses to the same numbers") {
    run_config cfg = parse_str(pareto_fit_text);
    dispatch_result r = dispatch_cfg(cfg);
    REQUIRE(r.code == 0);
    json first = json::parse(r.out);
    json second = json::parse(first.dump(2));
    CHECK(first == second);
}

TEST_CASE("simulate dispatch writes the tail curve next to the json") {
    auto out_dir = temp_dir() / "curves";
    std::filesystem::remove_all(out_dir);
    run_config cfg = parse_str(
        "[run]\ncommand = simulate\nmaster_seed = 3\nout_dir = "
        + out_dir.string() + "\n[experiment]\nkind = tail_sum\nn = 10\n"
        "trials = 500\ntail_grid = 20\n");
    dispatch_result r = dispatch_cfg(cfg);
    REQUIRE(r.code == 0);

    json j = json::parse(r.out);
    REQUIRE(j["tail_curve"].size() == 20);
    CHECK(j["tail_curve_csv"] == "tail_curve.csv");

    std::ifstream csv(out_dir / "tail_curve.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,empirical,se,bound");
    std::size_t rows = 0;
    std::string first_row;
    while (std::getline(csv, line)) {
        if (rows == 0) first_row = line;
        ++rows;
    }
    CHECK(rows == 20);
    // the CSV uses the same shortest round-trip rendering as the JSON
    const json& pt = j["tail_curve"][0];
    std::string expected = pt["t"].dump() + "," + pt["empirical"].dump() + ","
                         + pt["se"].dump() + "," + pt["bound"].dump();
    CHECK(first_row == expected);
}
