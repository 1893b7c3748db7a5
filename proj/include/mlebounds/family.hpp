#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/quadrature.hpp"
#include "mlebounds/rng.hpp"
#include "mlebounds/roots.hpp"
#include "mlebounds/special.hpp"

// One-dimensional parametric families: negative log-likelihood l(x, theta)
// with its first three theta-partials, Fisher information, sampling, and
// expectation machinery. Parameters live on a compact interval and every
// family carries an explicit support descriptor so out-of-domain inputs
// raise errors instead of propagating NaN.

namespace mleb {

// ---------------------------------------------------------------------------
// parameter space and support
// ---------------------------------------------------------------------------

struct parameter_space {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double theta) const { return theta >= lower && theta <= upper; }

    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }

    void validate(bool must_exclude_zero) const {
        require(std::isfinite(lower) && std::isfinite(upper),
                "parameter space endpoints must be finite");
        require(lower < upper, "parameter space must satisfy lower < upper");
        if (must_exclude_zero) {
            require(lower > 0.0 || upper < 0.0,
                    "parameter space must exclude 0 for this family");
        }
    }
};

struct support {
    enum class kind { real_line, half_line, nonneg_integers, binary };
    kind k = kind::real_line;
    double lower = 0.0;          // half_line: x >= lower
    bool open_lower = false;     // half_line: x > lower strictly

    bool contains(double x) const {
        if (!std::isfinite(x)) return false;
        switch (k) {
            case kind::real_line: return true;
            case kind::half_line: return open_lower ? x > lower : x >= lower;
            case kind::nonneg_integers:
                return x >= 0.0 && x == std::floor(x);
            case kind::binary: return x == 0.0 || x == 1.0;
        }
        return false;
    }

    std::string describe() const {
        switch (k) {
            case kind::real_line: return "all reals";
            case kind::half_line:
                return (open_lower ? "x > " : "x >= ") + std::to_string(lower);
            case kind::nonneg_integers: return "nonnegative integers";
            case kind::binary: return "{0, 1}";
        }
        return "";
    }
};

// ---------------------------------------------------------------------------
// model family bundle
// ---------------------------------------------------------------------------

using real_fn = std::function<double(double)>;
using score_fn = std::function<double(double, double)>;  // (x, theta)

struct model_family {
    std::string name;
    parameter_space theta_space;
    support supp;

    score_fn l;         // negative log-likelihood per observation
    score_fn ldot;      // d/dtheta l
    score_fn lddot;     // d^2/dtheta^2 l
    score_fn ldddot;    // d^3/dtheta^3 l
    score_fn ldot_dx;   // d/dx ldot, for Lipschitz-in-x certification
    score_fn density;   // pdf or pmf at (x, theta)

    real_fn fisher;     // closed form I(theta) = E lddot
    real_fn mean;       // E X under theta (+inf when nonexistent)
    std::function<double(rng&, double)> draw;  // one observation at theta

    // Closed-form unconstrained MLE stationary point; may fall outside the
    // parameter space or be infinite (callers project and flag).
    std::function<double(const std::vector<double>&)> mle;

    // E|X|^p < infinity iff p < max_moment_order(theta). +inf when all
    // moments exist.
    real_fn max_moment_order;

    // Closed-form E|X - Y|^p for an independent copy Y, when available.
    std::function<double(double, int)> diff_abs_moment;

    bool lipschitz_constant_in_x = false;

    void check_theta(double theta) const {
        require(theta_space.contains(theta),
                name + ": theta " + std::to_string(theta)
                    + " outside parameter space ["
                    + std::to_string(theta_space.lower) + ", "
                    + std::to_string(theta_space.upper) + "]");
    }

    void check_x(double x) const {
        if (!supp.contains(x)) {
            if (!std::isfinite(x)) {
                throw numeric_error(name + ": non-finite observation");
            }
            throw validation_error(name + ": observation "
                                   + std::to_string(x)
                                   + " outside support (" + supp.describe() + ")");
        }
    }

    // E g(X) under theta, by adaptive quadrature or series summation.
    double expect(const real_fn& g, double theta,
                  const quad_options& opt = {}) const {
        check_theta(theta);
        switch (supp.k) {
            case support::kind::real_line:
                return integrate_real_line(
                    [&](double x) { return g(x) * density(x, theta); }, opt);
            case support::kind::half_line:
                return integrate_right_tail(
                    [&](double x) { return g(x) * density(x, theta); },
                    supp.lower, opt);
            case support::kind::nonneg_integers:
                return sum_series(
                    [&](int k) {
                        double x = static_cast<double>(k);
                        return g(x) * density(x, theta);
                    },
                    0);
            case support::kind::binary: {
                double p1 = density(1.0, theta);
                return g(0.0) * (1.0 - p1) + g(1.0) * p1;
            }
        }
        throw numeric_error(name + ": unknown support kind");
    }
};

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

struct derivatives {
    double l, ldot, lddot, ldddot;
};

inline derivatives score_derivatives(const model_family& fam, double x,
                                     double theta) {
    fam.check_theta(theta);
    fam.check_x(x);
    derivatives d{fam.l(x, theta), fam.ldot(x, theta), fam.lddot(x, theta),
                  fam.ldddot(x, theta)};
    require_finite(d.l, fam.name + " l");
    require_finite(d.ldot, fam.name + " ldot");
    require_finite(d.lddot, fam.name + " lddot");
    require_finite(d.ldddot, fam.name + " ldddot");
    return d;
}

inline double fisher_information(const model_family& fam, double theta) {
    fam.check_theta(theta);
    double v = fam.fisher(theta);
    require_finite(v, fam.name + " Fisher information");
    if (v < 0.0) {
        throw numeric_error(fam.name + ": negative Fisher information");
    }
    return v;
}

// c(x) = sup over theta in the parameter space of |lddot(x, theta)|, which
// by the mean value theorem bounds |ldot(x,u) - ldot(x,v)| / |u - v|.
// 257-point grid scan plus golden-section refinement around the argmax.
inline double lipschitz_envelope(const model_family& fam, double x) {
    fam.check_x(x);
    return grid_sup(
        [&](double th) { return std::fabs(fam.lddot(x, th)); },
        fam.theta_space.lower, fam.theta_space.upper, 257);
}

struct c_moment_result {
    double c_mean;
    double c_sq_mean;
    bool constant;
};

inline c_moment_result c_moments(const model_family& fam, double theta_star) {
    fam.check_theta(theta_star);
    if (fam.lipschitz_constant_in_x) {
        // evaluate at any support point; pick one per support kind
        double x0 = 0.0;
        switch (fam.supp.k) {
            case support::kind::half_line:
                x0 = fam.supp.lower + 1.0;
                break;
            default:
                x0 = 0.0;
        }
        double c = lipschitz_envelope(fam, x0);
        return {c, c * c, true};
    }
    // c(x) grows polynomially for the built-in families, so the needed
    // moments exist whenever E c^2 does; quadrature reports divergence.
    double cm = fam.expect(
        [&](double x) { return lipschitz_envelope(fam, x); }, theta_star);
    double cs = fam.expect(
        [&](double x) {
            double c = lipschitz_envelope(fam, x);
            return c * c;
        },
        theta_star);
    require_finite(cm, fam.name + " E c(X)");
    require_finite(cs, fam.name + " E c^2(X)");
    return {cm, cs, false};
}

inline std::vector<double> sample(const model_family& fam, double theta,
                                  std::size_t n, std::uint64_t seed) {
    fam.check_theta(theta);
    require(n >= 1, "sample size must be at least 1");
    rng g(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = fam.draw(g, theta);
    return out;
}

// ---------------------------------------------------------------------------
// generic exponential family  p(x) = h(x) exp{theta T(x) - A(theta)}
// ---------------------------------------------------------------------------

struct exp_family_spec {
    std::string name;
    support supp;
    real_fn log_h;
    real_fn T;       // the families here all use T(x) = x
    real_fn A;
    real_fn Adot;
    real_fn Addot;
    real_fn Adddot;  // optional; central difference of Addot if absent
    std::function<double(rng&, double)> draw;
};

inline model_family make_exp_family(exp_family_spec spec,
                                    parameter_space theta_space) {
    theta_space.validate(false);
    model_family fam;
    fam.name = std::move(spec.name);
    fam.theta_space = theta_space;
    fam.supp = spec.supp;
    auto log_h = spec.log_h;
    auto T = spec.T;
    auto A = spec.A;
    auto Adot = spec.Adot;
    auto Addot = spec.Addot;
    auto Adddot = spec.Adddot;
    fam.l = [log_h, T, A](double x, double th) {
        return A(th) - th * T(x) - log_h(x);
    };
    fam.ldot = [T, Adot](double x, double th) { return Adot(th) - T(x); };
    fam.lddot = [Addot](double, double th) { return Addot(th); };
    if (Adddot) {
        fam.ldddot = [Adddot](double, double th) { return Adddot(th); };
    } else {
        fam.ldddot = [Addot](double, double th) {
            double h = 1e-5;
            return (Addot(th + h) - Addot(th - h)) / (2.0 * h);
        };
    }
    fam.ldot_dx = [T](double x, double) {
        double h = 1e-6;
        return -(T(x + h) - T(x - h)) / (2.0 * h);
    };
    fam.density = [log_h, T, A](double x, double th) {
        return std::exp(log_h(x) + th * T(x) - A(th));
    };
    fam.fisher = Addot;
    fam.mean = Adot;  // valid because T(x) = x for every family built here
    fam.draw = std::move(spec.draw);
    fam.mle = nullptr;  // set by callers that know the inverse of Adot
    fam.max_moment_order = [](double) { return HUGE_VAL; };
    fam.lipschitz_constant_in_x = true;
    return fam;
}

// ---------------------------------------------------------------------------
// built-in families
// ---------------------------------------------------------------------------

// X ~ N(0, theta), theta = variance.
inline model_family make_gaussian_variance(parameter_space theta_space) {
    theta_space.validate(true);
    require(theta_space.lower > 0.0, "gaussian_variance: variance must be positive");
    model_family fam;
    fam.name = "gaussian_variance";
    fam.theta_space = theta_space;
    fam.supp = {support::kind::real_line, 0.0, false};
    fam.l = [](double x, double th) {
        return 0.5 * std::log(2.0 * M_PI * th) + x * x / (2.0 * th);
    };
    fam.ldot = [](double x, double th) {
        return 1.0 / (2.0 * th) - x * x / (2.0 * th * th);
    };
    fam.lddot = [](double x, double th) {
        return -1.0 / (2.0 * th * th) + x * x / (th * th * th);
    };
    fam.ldddot = [](double x, double th) {
        double t3 = th * th * th;
        return 1.0 / t3 - 3.0 * x * x / (t3 * th);
    };
    fam.ldot_dx = [](double x, double th) { return -x / (th * th); };
    fam.density = [](double x, double th) {
        return std::exp(-x * x / (2.0 * th)) / std::sqrt(2.0 * M_PI * th);
    };
    fam.fisher = [](double th) { return 1.0 / (2.0 * th * th); };
    fam.mean = [](double) { return 0.0; };
    fam.draw = [](rng& g, double th) {
        return sample_normal(g, 0.0, std::sqrt(th));
    };
    fam.mle = [](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(x * x);
        return s.value() / static_cast<double>(xs.size());
    };
    fam.max_moment_order = [](double) { return HUGE_VAL; };
    // X - Y ~ N(0, 2 theta): E|X-Y|^p = (2 theta)^{p/2} E|Z|^p
    fam.diff_abs_moment = [](double th, int p) {
        return std::exp(0.5 * p * std::log(2.0 * th)
                        + log_abs_normal_moment(p));
    };
    return fam;
}

// X ~ Pareto(shape k = theta, scale x_min), density k x_min^k x^{-k-1}.
inline model_family make_pareto_shape(parameter_space theta_space,
                                      double x_min) {
    theta_space.validate(true);
    require(theta_space.lower > 0.0, "pareto_shape: shape must be positive");
    require(x_min > 0.0 && std::isfinite(x_min),
            "pareto_shape: x_min must be positive and finite");
    model_family fam;
    fam.name = "pareto_shape";
    fam.theta_space = theta_space;
    fam.supp = {support::kind::half_line, x_min, false};
    fam.l = [x_min](double x, double th) {
        return -std::log(th) - th * std::log(x_min) + (th + 1.0) * std::log(x);
    };
    fam.ldot = [x_min](double x, double th) {
        return -1.0 / th + std::log(x / x_min);
    };
    fam.lddot = [](double, double th) { return 1.0 / (th * th); };
    fam.ldddot = [](double, double th) { return -2.0 / (th * th * th); };
    fam.ldot_dx = [](double x, double) { return 1.0 / x; };
    fam.density = [x_min](double x, double th) {
        return th * std::pow(x_min, th) * std::pow(x, -th - 1.0);
    };
    fam.fisher = [](double th) { return 1.0 / (th * th); };
    fam.mean = [x_min](double th) {
        return th > 1.0 ? th * x_min / (th - 1.0) : HUGE_VAL;
    };
    fam.draw = [x_min](rng& g, double th) {
        return sample_pareto(g, th, x_min);
    };
    fam.mle = [x_min](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(std::log(x / x_min));
        return static_cast<double>(xs.size()) / s.value();
    };
    fam.max_moment_order = [](double th) { return th; };
    fam.lipschitz_constant_in_x = true;
    return fam;
}

// X ~ Weibull(shape k fixed, scale theta = lambda).
inline model_family make_weibull_scale(parameter_space theta_space, int k) {
    theta_space.validate(true);
    require(theta_space.lower > 0.0, "weibull_scale: scale must be positive");
    require(k >= 2, "weibull_scale: shape k must be an integer >= 2");
    double kd = static_cast<double>(k);
    model_family fam;
    fam.name = "weibull_scale";
    fam.theta_space = theta_space;
    fam.supp = {support::kind::half_line, 0.0, true};
    fam.l = [kd](double x, double th) {
        return -std::log(kd) - (kd - 1.0) * std::log(x) + kd * std::log(th)
             + std::pow(x / th, kd);
    };
    fam.ldot = [kd](double x, double th) {
        return kd / th - kd * std::pow(x, kd) / std::pow(th, kd + 1.0);
    };
    fam.lddot = [kd](double x, double th) {
        return -kd / (th * th)
             + kd * (kd + 1.0) * std::pow(x, kd) / std::pow(th, kd + 2.0);
    };
    fam.ldddot = [kd](double x, double th) {
        return 2.0 * kd / (th * th * th)
             - kd * (kd + 1.0) * (kd + 2.0) * std::pow(x, kd)
                   / std::pow(th, kd + 3.0);
    };
    fam.ldot_dx = [kd](double x, double th) {
        return -kd * kd * std::pow(x, kd - 1.0) / std::pow(th, kd + 1.0);
    };
    fam.density = [kd](double x, double th) {
        double z = std::pow(x / th, kd);
        return kd / th * std::pow(x / th, kd - 1.0) * std::exp(-z);
    };
    fam.fisher = [kd](double th) { return kd * kd / (th * th); };
    fam.mean = [kd](double th) {
        return th * std::exp(std::lgamma(1.0 + 1.0 / kd));
    };
    fam.draw = [kd](rng& g, double th) { return sample_weibull(g, kd, th); };
    fam.mle = [kd](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(std::pow(x, kd));
        return std::pow(s.value() / static_cast<double>(xs.size()), 1.0 / kd);
    };
    fam.max_moment_order = [](double) { return HUGE_VAL; };
    return fam;
}

// X ~ Exponential(rate theta).
inline model_family make_exponential_rate(parameter_space theta_space) {
    theta_space.validate(true);
    require(theta_space.lower > 0.0, "exponential_rate: rate must be positive");
    model_family fam;
    fam.name = "exponential_rate";
    fam.theta_space = theta_space;
    fam.supp = {support::kind::half_line, 0.0, false};
    fam.l = [](double x, double th) { return -std::log(th) + th * x; };
    fam.ldot = [](double x, double th) { return x - 1.0 / th; };
    fam.lddot = [](double, double th) { return 1.0 / (th * th); };
    fam.ldddot = [](double, double th) { return -2.0 / (th * th * th); };
    fam.ldot_dx = [](double, double) { return 1.0; };
    fam.density = [](double x, double th) {
        return th * std::exp(-th * x);
    };
    fam.fisher = [](double th) { return 1.0 / (th * th); };
    fam.mean = [](double th) { return 1.0 / th; };
    fam.draw = [](rng& g, double th) { return sample_exponential(g, th); };
    fam.mle = [](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(x);
        return static_cast<double>(xs.size()) / s.value();
    };
    fam.max_moment_order = [](double) { return HUGE_VAL; };
    fam.lipschitz_constant_in_x = true;
    // X - Y ~ Laplace(0, 1/theta): E|X-Y|^p = p! / theta^p
    fam.diff_abs_moment = [](double th, int p) {
        return std::exp(log_factorial(p) - p * std::log(th));
    };
    return fam;
}

// Poisson in its natural parameter theta (mean e^theta).
inline model_family make_expfam_poisson(parameter_space theta_space) {
    exp_family_spec spec;
    spec.name = "expfam_poisson";
    spec.supp = {support::kind::nonneg_integers, 0.0, false};
    spec.log_h = [](double x) { return -std::lgamma(x + 1.0); };
    spec.T = [](double x) { return x; };
    spec.A = [](double th) { return std::exp(th); };
    spec.Adot = [](double th) { return std::exp(th); };
    spec.Addot = [](double th) { return std::exp(th); };
    spec.Adddot = [](double th) { return std::exp(th); };
    spec.draw = [](rng& g, double th) {
        return sample_poisson(g, std::exp(th));
    };
    model_family fam = make_exp_family(std::move(spec), theta_space);
    fam.ldot_dx = [](double, double) { return -1.0; };
    fam.mle = [](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(x);
        double mean = s.value() / static_cast<double>(xs.size());
        return mean > 0.0 ? std::log(mean) : -HUGE_VAL;
    };
    return fam;
}

// Bernoulli in its natural parameter theta (success prob sigmoid(theta)).
inline model_family make_expfam_bernoulli(parameter_space theta_space) {
    auto sigmoid = [](double th) { return 1.0 / (1.0 + std::exp(-th)); };
    exp_family_spec spec;
    spec.name = "expfam_bernoulli";
    spec.supp = {support::kind::binary, 0.0, false};
    spec.log_h = [](double) { return 0.0; };
    spec.T = [](double x) { return x; };
    spec.A = [](double th) {
        // log(1 + e^theta), stably
        return th > 0.0 ? th + std::log1p(std::exp(-th))
                        : std::log1p(std::exp(th));
    };
    spec.Adot = sigmoid;
    spec.Addot = [sigmoid](double th) {
        double s = sigmoid(th);
        return s * (1.0 - s);
    };
    spec.Adddot = [sigmoid](double th) {
        double s = sigmoid(th);
        return s * (1.0 - s) * (1.0 - 2.0 * s);
    };
    spec.draw = [sigmoid](rng& g, double th) {
        return sample_bernoulli(g, sigmoid(th));
    };
    model_family fam = make_exp_family(std::move(spec), theta_space);
    fam.ldot_dx = [](double, double) { return -1.0; };
    fam.mle = [](const std::vector<double>& xs) {
        kahan_sum s;
        for (double x : xs) s.add(x);
        double mean = s.value() / static_cast<double>(xs.size());
        if (mean <= 0.0) return -HUGE_VAL;
        if (mean >= 1.0) return HUGE_VAL;
        return std::log(mean / (1.0 - mean));
    };
    return fam;
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

struct family_params {
    double x_min = 1.0;       // pareto_shape
    int weibull_k = 2;        // weibull_scale
};

inline model_family make_family(const std::string& name,
                                parameter_space theta_space,
                                const family_params& params = {}) {
    if (name == "gaussian_variance") return make_gaussian_variance(theta_space);
    if (name == "pareto_shape") return make_pareto_shape(theta_space, params.x_min);
    if (name == "weibull_scale") return make_weibull_scale(theta_space, params.weibull_k);
    if (name == "exponential_rate") return make_exponential_rate(theta_space);
    if (name == "expfam_poisson") return make_expfam_poisson(theta_space);
    if (name == "expfam_bernoulli") return make_expfam_bernoulli(theta_space);
    throw validation_error(
        "unknown family '" + name
        + "' (expected gaussian_variance, pareto_shape, weibull_scale, "
          "exponential_rate, expfam_poisson, or expfam_bernoulli)");
}

}  // namespace mleb
