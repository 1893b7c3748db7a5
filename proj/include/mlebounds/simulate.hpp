#pragma once

#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mlebounds/classical.hpp"
#include "mlebounds/common.hpp"
#include "mlebounds/concentration.hpp"
#include "mlebounds/family.hpp"
#include "mlebounds/norms.hpp"
#include "mlebounds/rng.hpp"
#include "mlebounds/truncated.hpp"

// Deterministic Monte Carlo experiments: coverage and deviation fractions
// for the robust estimator, bias of the MLE, tail curves for centered sums,
// and paired contamination comparisons.
//
// Reproducibility contract: trial i draws from an engine seeded with
// derive_seed(master_seed, i), workers only partition the trial index
// range, and every reduction walks results in trial order with compensated
// summation. Reports are therefore byte-identical for any worker count.
//
// Failed trials (typically: the truncated score has no root inside the
// parameter space) are excluded from numerators and denominators and
// surface in a failure-rate field; a rate above 1% aborts the run.

namespace mleb {

enum class estimator_kind { mle, truncated };
enum class noise_kind { gaussian, laplace };

struct contamination_spec {
    double eps = 0.0;      // fraction of replaced observations, in [0, 1)
    double outlier = 0.0;  // replacement value
};

struct experiment_config {
    std::optional<model_family> family;
    double theta_star = 0.0;
    std::size_t n = 0;
    std::size_t trials = 0;
    double delta = 0.05;
    estimator_kind estimator = estimator_kind::truncated;
    std::optional<double> beta;  // empty: tune at theta_star
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::optional<contamination_spec> contamination;

    // tail-sum experiments (no family involved)
    noise_kind noise = noise_kind::gaussian;
    double noise_scale = 1.0;
    std::size_t tail_grid = 20;
    double tail_t_max = 0.0;  // 0: choose 4 sd of the sum

    void validate_common() const {
        require(trials >= 1, "trials must be at least 1");
        require(n >= 1, "n must be at least 1");
        if (contamination) {
            require(contamination->eps >= 0.0 && contamination->eps < 1.0,
                    "contamination fraction must lie in [0, 1)");
        }
        require(workers >= 1, "workers must be at least 1");
    }
    void validate_family_run() const {
        validate_common();
        require(family.has_value(), "this experiment needs a model family");
        family->check_theta(theta_star);
    }
};

struct value_se {
    double value = 0.0;
    double se = 0.0;
};

struct tail_point {
    double t = 0.0;
    double empirical = 0.0;
    double se = 0.0;
    double bound = 1.0;
};

struct simulation_report {
    std::string experiment;
    std::size_t trials = 0;
    std::size_t n = 0;
    double theta_star = 0.0;
    double delta = 0.0;
    double beta = 0.0;
    bool beta_tuned = false;
    double half_width = 0.0;
    double bound = 0.0;  // deviation bound in deviation runs
    bool n_condition_ok = true;
    std::optional<value_se> coverage;
    std::optional<value_se> within_bound;
    std::optional<value_se> bias;
    std::optional<double> predicted_bias;
    std::optional<double> rmse;
    std::optional<double> rmse_mle;
    std::optional<double> rmse_truncated;
    std::optional<value_se> mse_diff;  // plain minus truncated, paired
    std::vector<tail_point> tail_curve;
    std::size_t failures = 0;
    double failure_rate = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t seed_digest = 0;
};

namespace detail {

struct trial_outcome {
    double a = 0.0;
    double b = 0.0;
    bool ok = true;
};

// Runs fn(trial_index) across a worker pool. Results land in a vector
// indexed by trial, so downstream reductions see a fixed order.
template <typename Fn>
std::vector<trial_outcome> run_parallel(std::size_t trials, int workers,
                                        Fn&& fn) {
    std::vector<trial_outcome> results(trials);
    int w = workers < 1 ? 1 : workers;
    if (static_cast<std::size_t>(w) > trials) {
        w = static_cast<int>(trials);
    }
    if (w == 1) {
        for (std::size_t i = 0; i < trials; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < trials; i += w) {
                    results[i] = fn(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

inline std::uint64_t seed_digest(std::uint64_t master, std::size_t trials) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < trials; ++i) {
        h = (h ^ derive_seed(master, i)) * 1099511628211ULL;
    }
    return h;
}

inline double binomial_se(double p, std::size_t m) {
    return m == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(m));
}

inline void account_failures(simulation_report& rep,
                             const std::vector<trial_outcome>& results) {
    std::size_t fails = 0;
    for (const auto& r : results) {
        if (!r.ok) ++fails;
    }
    rep.failures = fails;
    rep.failure_rate =
        static_cast<double>(fails) / static_cast<double>(results.size());
    if (rep.failure_rate > 0.01) {
        throw numeric_error("failure rate " + std::to_string(rep.failure_rate)
                            + " exceeds 1% (" + std::to_string(fails) + " of "
                            + std::to_string(results.size()) + " trials)");
    }
}

// Shared setup for the robust-estimator experiments: resolves beta, the
// band half-width, and the closed-form deviation bound at theta_star.
struct robust_run_setup {
    double beta;
    bool tuned;
    double half_w;
    double dev_bound;
    bool n_condition_ok;
    width_case wcase;
};

inline robust_run_setup setup_robust_run(const experiment_config& cfg) {
    const model_family& fam = *cfg.family;
    bound_params params = make_bound_params(fam, cfg.theta_star);
    robust_run_setup s{};
    s.wcase = fam.lipschitz_constant_in_x ? width_case::constant_c
                                          : width_case::general_c;
    if (cfg.beta) {
        s.beta = *cfg.beta;
        s.tuned = false;
    } else {
        s.beta = tune_beta(params, cfg.n, cfg.delta, s.wcase);
        s.tuned = true;
    }
    s.half_w = half_width(params, s.beta, cfg.n, cfg.delta, s.wcase);
    s.dev_bound = deviation_bound(params, cfg.n, cfg.delta, s.wcase);
    sample_size_result mss = min_sample_size(params, s.beta, cfg.delta);
    s.n_condition_ok = mss.satisfiable && cfg.n >= mss.n_min;
    return s;
}

inline std::vector<double> draw_sample(const model_family& fam, double theta,
                                       std::size_t n, rng& g) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = fam.draw(g, theta);
    return xs;
}

}  // namespace detail

// Fraction of trials with theta_hat_beta inside the theoretical band
// [theta* - h, theta* + h]; also records the strict-inequality fraction
// against the closed-form deviation bound.
inline simulation_report run_coverage(const experiment_config& cfg) {
    cfg.validate_family_run();
    require(cfg.delta > 0.0 && cfg.delta < 0.5, "delta must lie in (0, 1/2)");
    const model_family& fam = *cfg.family;
    detail::robust_run_setup setup = detail::setup_robust_run(cfg);

    truncated_score_config score_cfg;
    score_cfg.beta = setup.beta;
    score_cfg.delta = cfg.delta;
    score_cfg.theta_space = fam.theta_space;

    auto results = detail::run_parallel(
        cfg.trials, cfg.workers, [&](std::size_t i) {
            detail::trial_outcome out;
            rng g(derive_seed(cfg.master_seed, i));
            std::vector<double> xs =
                detail::draw_sample(fam, cfg.theta_star, cfg.n, g);
            try {
                solve_result sr = solve(fam, xs, score_cfg);
                out.a = sr.theta_hat;
            } catch (const numeric_error&) {
                out.ok = false;
            }
            return out;
        });

    simulation_report rep;
    rep.experiment = "coverage";
    rep.trials = cfg.trials;
    rep.n = cfg.n;
    rep.theta_star = cfg.theta_star;
    rep.delta = cfg.delta;
    rep.beta = setup.beta;
    rep.beta_tuned = setup.tuned;
    rep.half_width = setup.half_w;
    rep.bound = setup.dev_bound;
    rep.n_condition_ok = setup.n_condition_ok;
    rep.master_seed = cfg.master_seed;
    rep.seed_digest = detail::seed_digest(cfg.master_seed, cfg.trials);
    detail::account_failures(rep, results);

    std::size_t ok_count = 0, inside = 0, within = 0;
    for (const auto& r : results) {
        if (!r.ok) continue;
        ++ok_count;
        double dev = std::fabs(r.a - cfg.theta_star);
        if (dev <= setup.half_w) ++inside;
        if (dev < setup.dev_bound) ++within;
    }
    double cov = ok_count ? static_cast<double>(inside) / ok_count : 0.0;
    double wit = ok_count ? static_cast<double>(within) / ok_count : 0.0;
    rep.coverage = value_se{cov, detail::binomial_se(cov, ok_count)};
    rep.within_bound = value_se{wit, detail::binomial_se(wit, ok_count)};
    return rep;
}

inline simulation_report run_deviation(const experiment_config& cfg) {
    simulation_report rep = run_coverage(cfg);
    rep.experiment = "deviation";
    return rep;
}

// Monte Carlo mean of theta_hat - theta* versus the first-order prediction
// kappa / (2 n I^2).
inline simulation_report run_bias(const experiment_config& cfg) {
    cfg.validate_family_run();
    const model_family& fam = *cfg.family;

    std::optional<detail::robust_run_setup> setup;
    truncated_score_config score_cfg;
    if (cfg.estimator == estimator_kind::truncated) {
        require(cfg.delta > 0.0 && cfg.delta < 0.5,
                "delta must lie in (0, 1/2)");
        setup = detail::setup_robust_run(cfg);
        score_cfg.beta = setup->beta;
        score_cfg.delta = cfg.delta;
        score_cfg.theta_space = fam.theta_space;
    }

    auto results = detail::run_parallel(
        cfg.trials, cfg.workers, [&](std::size_t i) {
            detail::trial_outcome out;
            rng g(derive_seed(cfg.master_seed, i));
            std::vector<double> xs =
                detail::draw_sample(fam, cfg.theta_star, cfg.n, g);
            try {
                double th = cfg.estimator == estimator_kind::mle
                                ? fit_mle(fam, xs).theta_hat
                                : solve(fam, xs, score_cfg).theta_hat;
                out.a = th - cfg.theta_star;
            } catch (const numeric_error&) {
                out.ok = false;
            }
            return out;
        });

    simulation_report rep;
    rep.experiment = "bias";
    rep.trials = cfg.trials;
    rep.n = cfg.n;
    rep.theta_star = cfg.theta_star;
    rep.delta = cfg.delta;
    if (setup) {
        rep.beta = setup->beta;
        rep.beta_tuned = setup->tuned;
    }
    rep.master_seed = cfg.master_seed;
    rep.seed_digest = detail::seed_digest(cfg.master_seed, cfg.trials);
    detail::account_failures(rep, results);

    kahan_sum sum, sum_sq;
    std::size_t m = 0;
    for (const auto& r : results) {
        if (!r.ok) continue;
        ++m;
        sum.add(r.a);
        sum_sq.add(r.a * r.a);
    }
    require(m >= 2, "bias run needs at least two successful trials");
    double mean = sum.value() / static_cast<double>(m);
    double var = (sum_sq.value() - mean * mean * static_cast<double>(m))
               / static_cast<double>(m - 1);
    var = std::fmax(var, 0.0);
    rep.bias = value_se{mean, std::sqrt(var / static_cast<double>(m))};
    rep.rmse = std::sqrt(sum_sq.value() / static_cast<double>(m));
    rep.predicted_bias = bias_estimate(fam, cfg.theta_star, cfg.n).bias;
    return rep;
}

// Empirical tail of centered i.i.d. sums against the calculator curves:
// Gaussian noise against the sub-Gaussian route, Laplace noise against the
// sub-Gamma route.
inline simulation_report run_tail_sum(const experiment_config& cfg) {
    cfg.validate_common();
    require(cfg.noise_scale > 0.0, "noise scale must be positive");
    require(cfg.tail_grid >= 1, "tail grid needs at least one point");

    auto results = detail::run_parallel(
        cfg.trials, cfg.workers, [&](std::size_t i) {
            detail::trial_outcome out;
            rng g(derive_seed(cfg.master_seed, i));
            kahan_sum s;
            for (std::size_t k = 0; k < cfg.n; ++k) {
                s.add(cfg.noise == noise_kind::gaussian
                          ? sample_normal(g, 0.0, cfg.noise_scale)
                          : sample_laplace(g, cfg.noise_scale));
            }
            out.a = s.value();
            return out;
        });

    simulation_report rep;
    rep.experiment = "tail_sum";
    rep.trials = cfg.trials;
    rep.n = cfg.n;
    rep.master_seed = cfg.master_seed;
    rep.seed_digest = detail::seed_digest(cfg.master_seed, cfg.trials);
    detail::account_failures(rep, results);

    // per-coordinate norms of the summands, through the norm machinery
    double scale = cfg.noise_scale;
    tail_class cls;
    if (cfg.noise == noise_kind::gaussian) {
        moment_oracle o = analytic_oracle([scale](int p) {
            return std::exp(p * std::log(scale) + log_abs_normal_moment(p));
        });
        cls = subg_params_for_sum(
            sum_deviation_norms(o, norm_regime::theta2, cfg.n));
    } else {
        moment_oracle o = analytic_oracle([scale](int p) {
            return std::exp(log_factorial(p) + p * std::log(scale));
        });
        cls = subgamma_params_for_sum(
            sum_deviation_norms(o, norm_regime::theta1, cfg.n));
    }

    double var = cfg.noise == noise_kind::gaussian ? scale * scale
                                                   : 2.0 * scale * scale;
    double t_max = cfg.tail_t_max > 0.0
                       ? cfg.tail_t_max
                       : 4.0 * std::sqrt(static_cast<double>(cfg.n) * var);
    for (std::size_t j = 1; j <= cfg.tail_grid; ++j) {
        tail_point pt;
        pt.t = t_max * static_cast<double>(j) / static_cast<double>(cfg.tail_grid);
        std::size_t exceed = 0;
        for (const auto& r : results) {
            if (r.a > pt.t) ++exceed;
        }
        pt.empirical = static_cast<double>(exceed) / static_cast<double>(cfg.trials);
        pt.se = detail::binomial_se(pt.empirical, cfg.trials);
        pt.bound = cls.k == tail_class::kind::sub_gaussian
                       ? subg_tail_prob(cls, pt.t)
                       : subgamma_tail_prob(cls, pt.t);
        rep.tail_curve.push_back(pt);
    }
    return rep;
}

// Paired comparison of the plain MLE and the truncated estimator on
// contaminated samples: the first floor(eps n) observations of each trial
// are replaced by the outlier value, and both estimators see the same data.
inline simulation_report run_contamination(const experiment_config& cfg) {
    cfg.validate_family_run();
    require(cfg.contamination.has_value(),
            "contamination run needs a contamination block");
    require(cfg.delta > 0.0 && cfg.delta < 0.5, "delta must lie in (0, 1/2)");
    const model_family& fam = *cfg.family;
    const contamination_spec& spec = *cfg.contamination;
    if (spec.eps > 0.0) {
        fam.check_x(spec.outlier);
    }
    std::size_t m_replace =
        static_cast<std::size_t>(spec.eps * static_cast<double>(cfg.n));
    detail::robust_run_setup setup = detail::setup_robust_run(cfg);

    truncated_score_config score_cfg;
    score_cfg.beta = setup.beta;
    score_cfg.delta = cfg.delta;
    score_cfg.theta_space = fam.theta_space;

    auto results = detail::run_parallel(
        cfg.trials, cfg.workers, [&](std::size_t i) {
            detail::trial_outcome out;
            rng g(derive_seed(cfg.master_seed, i));
            std::vector<double> xs =
                detail::draw_sample(fam, cfg.theta_star, cfg.n, g);
            for (std::size_t k = 0; k < m_replace; ++k) xs[k] = spec.outlier;
            try {
                double e1 = fit_mle(fam, xs).theta_hat - cfg.theta_star;
                double e2 =
                    solve(fam, xs, score_cfg).theta_hat - cfg.theta_star;
                out.a = e1 * e1;
                out.b = e2 * e2;
            } catch (const numeric_error&) {
                out.ok = false;
            }
            return out;
        });

    simulation_report rep;
    rep.experiment = "contamination";
    rep.trials = cfg.trials;
    rep.n = cfg.n;
    rep.theta_star = cfg.theta_star;
    rep.delta = cfg.delta;
    rep.beta = setup.beta;
    rep.beta_tuned = setup.tuned;
    rep.master_seed = cfg.master_seed;
    rep.seed_digest = detail::seed_digest(cfg.master_seed, cfg.trials);
    detail::account_failures(rep, results);

    kahan_sum mse1, mse2, diff, diff_sq;
    std::size_t m = 0;
    for (const auto& r : results) {
        if (!r.ok) continue;
        ++m;
        mse1.add(r.a);
        mse2.add(r.b);
        double d = r.a - r.b;
        diff.add(d);
        diff_sq.add(d * d);
    }
    require(m >= 2, "contamination run needs at least two successful trials");
    double md = static_cast<double>(m);
    rep.rmse_mle = std::sqrt(mse1.value() / md);
    rep.rmse_truncated = std::sqrt(mse2.value() / md);
    double dmean = diff.value() / md;
    double dvar = (diff_sq.value() - dmean * dmean * md) / (md - 1.0);
    rep.mse_diff = value_se{dmean, std::sqrt(std::fmax(dvar, 0.0) / md)};
    return rep;
}

}  // namespace mleb
