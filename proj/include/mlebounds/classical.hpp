#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/concentration.hpp"
#include "mlebounds/family.hpp"
#include "mlebounds/norms.hpp"
#include "mlebounds/roots.hpp"

// Classical MLE machinery: fitting, the Lipschitz/curvature profile behind
// the stability argument, concentration of the MLE around its mean, the
// first-order bias kappa / (2 n I^2), and the oracle deviation bounds that
// combine the two.
//
// The profile houses two conditions on the empirical objective:
//   (C.1)  lddot(x, theta) >= c_H > 0          (curvature floor)
//   (C.2)  |ldot(x, theta) - ldot(y, theta)| <= c_l |x - y|
// Both only ever hold on a declared (x, theta) box for the families here,
// so certification is box-restricted and reported as such.

namespace mleb {

struct lipschitz_profile {
    double c_H = 0.0;
    double c_l = 0.0;
    std::vector<double> d_norms;  // per-coordinate norms of d(X_k, Y_k)
    norm_regime regime = norm_regime::theta2;
    interval x_box{0.0, 0.0};     // the box certification ran on

    void validate() const {
        require(c_H > 0.0, "profile requires c_H > 0");
        require(c_l > 0.0, "profile requires c_l > 0");
        require(!d_norms.empty(), "profile requires at least one d-norm");
        for (double v : d_norms) {
            require(std::isfinite(v) && v >= 0.0,
                    "d-norms must be finite and nonnegative");
        }
    }
    double sum_squares() const {
        kahan_sum s;
        for (double v : d_norms) s.add(v * v);
        return s.value();
    }
    double max_norm() const {
        double m = 0.0;
        for (double v : d_norms) m = std::fmax(m, v);
        return m;
    }
};

struct fit_result {
    double theta_hat = 0.0;
    bool at_boundary = false;
};

// Derivative-free route: bracketing minimization of the empirical mean of l
// over the parameter space. Doubles as the cross-check oracle for the
// closed forms.
inline fit_result fit_mle_search(const model_family& fam,
                                 const std::vector<double>& sample) {
    require(!sample.empty(), "fit needs a nonempty sample");
    for (double x : sample) fam.check_x(x);
    auto objective = [&](double th) {
        kahan_sum s;
        for (double x : sample) s.add(fam.l(x, th));
        return s.value() / static_cast<double>(sample.size());
    };
    const auto& sp = fam.theta_space;
    double th = minimize_scalar(objective, sp.lower, sp.upper, 1e-10, 129);
    fit_result r;
    r.theta_hat = th;
    // a minimizer within tolerance of an endpoint counts as boundary
    r.at_boundary = (th - sp.lower < 1e-8) || (sp.upper - th < 1e-8);
    return r;
}

inline fit_result fit_mle(const model_family& fam,
                          const std::vector<double>& sample) {
    require(!sample.empty(), "fit needs a nonempty sample");
    for (double x : sample) fam.check_x(x);
    if (!fam.mle) return fit_mle_search(fam, sample);
    double raw = fam.mle(sample);
    if (std::isnan(raw)) {
        throw numeric_error(fam.name + ": closed-form estimate is NaN");
    }
    fit_result r;
    if (raw < fam.theta_space.lower) {
        r.theta_hat = fam.theta_space.lower;
        r.at_boundary = true;
    } else if (raw > fam.theta_space.upper) {
        r.theta_hat = fam.theta_space.upper;
        r.at_boundary = true;
    } else {
        r.theta_hat = raw;
    }
    return r;
}

// Effect of swapping one observation at distance d_value: the fitted
// parameter moves by at most c_l d / (n c_H).
inline double perturbation_bound(const lipschitz_profile& profile,
                                 std::size_t n, double d_value) {
    profile.validate();
    require(n >= 1, "n must be at least 1");
    require(d_value >= 0.0, "d must be nonnegative");
    return profile.c_l * d_value / (static_cast<double>(n) * profile.c_H);
}

// Two-sided concentration of the MLE around its mean.
//   theta2:  2 exp(-t^2 / (16 r^2 sum ||d||^2)),        r = c_l / (c_H n)
//   theta1:  2 exp(-t^2 / (4 r^2 sum ||d||^2 + 2 r max||d|| t))
inline tail_bound mle_concentration(const lipschitz_profile& profile,
                                    std::size_t n, double t) {
    profile.validate();
    require(n >= 1, "n must be at least 1");
    require(t >= 0.0, "threshold t must be nonnegative");
    double r = profile.c_l / (profile.c_H * static_cast<double>(n));
    double ss = profile.sum_squares();
    tail_bound b;
    b.t = t;
    if (profile.regime == norm_regime::theta2) {
        b.cls.k = tail_class::kind::sub_gaussian;
        b.cls.sigma_sq = 8.0 * r * r * ss;
        double denom = 16.0 * r * r * ss;
        b.bound = denom == 0.0 && t > 0.0
                      ? 0.0
                      : clamp_probability(t == 0.0 ? 1.0
                                                   : 2.0 * std::exp(-t * t / denom));
    } else {
        b.cls.k = tail_class::kind::sub_gamma;
        b.cls.eta = 2.0 * r * r * ss;
        b.cls.M = r * profile.max_norm();
        double denom = 4.0 * r * r * ss + 2.0 * r * profile.max_norm() * t;
        b.bound = denom == 0.0 && t > 0.0
                      ? 0.0
                      : clamp_probability(t == 0.0 ? 1.0
                                                   : 2.0 * std::exp(-t * t / denom));
    }
    return b;
}

// kappa = 2 E[ldot lddot] - E ldddot, evaluated at theta_star.
inline double kappa(const model_family& fam, double theta_star) {
    fam.check_theta(theta_star);
    double cross = fam.expect(
        [&](double x) {
            return fam.ldot(x, theta_star) * fam.lddot(x, theta_star);
        },
        theta_star);
    double third = fam.expect(
        [&](double x) { return fam.ldddot(x, theta_star); }, theta_star);
    double k = 2.0 * cross - third;
    require_finite(k, fam.name + " kappa");
    return k;
}

struct bias_result {
    double kappa = 0.0;
    double fisher = 0.0;
    std::size_t n = 0;
    double bias = 0.0;  // kappa / (2 n fisher^2), first order only
};

inline bias_result bias_estimate(const model_family& fam, double theta_star,
                                 std::size_t n) {
    require(n >= 1, "n must be at least 1");
    bias_result r;
    r.kappa = kappa(fam, theta_star);
    r.fisher = fisher_information(fam, theta_star);
    if (r.fisher <= 0.0) {
        throw numeric_error(fam.name + ": zero Fisher information at theta "
                                  + std::to_string(theta_star));
    }
    r.n = n;
    r.bias = r.kappa / (2.0 * static_cast<double>(n) * r.fisher * r.fisher);
    return r;
}

struct oracle_bound_result {
    double radius = 0.0;  // concentration part
    double bias = 0.0;    // |kappa| / (2 n I^2)
    double total = 0.0;
    norm_regime regime = norm_regime::theta2;
};

// High-probability deviation of the MLE from theta_star: concentration
// radius at confidence delta plus the first-order bias magnitude.
//   theta2:  (4 c_l / (sqrt(n) c_H)) sqrt((1/n) sum||d||^2 log(2/delta))
//   theta1:  (2 c_l / (sqrt(n) c_H)) sqrt((1/n) sum||d||^2 log(1/delta))
//            + (1/n) (c_l / c_H) max||d|| log(1/delta)
inline oracle_bound_result oracle_bound(const lipschitz_profile& profile,
                                        const model_family& fam,
                                        double theta_star, std::size_t n,
                                        double delta) {
    profile.validate();
    require(n >= 1, "n must be at least 1");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    double nd = static_cast<double>(n);
    double ratio = profile.c_l / profile.c_H;
    double mean_sq = profile.sum_squares() / nd;
    oracle_bound_result r;
    r.regime = profile.regime;
    if (profile.regime == norm_regime::theta2) {
        r.radius = 4.0 * ratio / std::sqrt(nd)
                 * std::sqrt(mean_sq * std::log(2.0 / delta));
    } else {
        double L = std::log(1.0 / delta);
        r.radius = 2.0 * ratio / std::sqrt(nd) * std::sqrt(mean_sq * L)
                 + ratio * profile.max_norm() * L / nd;
    }
    bias_result b = bias_estimate(fam, theta_star, n);
    r.bias = std::fabs(b.bias);
    r.total = r.radius + r.bias;
    return r;
}

// Norms of the difference X - Y between independent copies, used for the
// d-norms of the profile. Closed forms when the family has one, otherwise
// a nested expectation.
inline moment_oracle difference_moment_oracle(const model_family& fam,
                                              double theta_star) {
    moment_oracle o;
    o.source = moment_oracle::kind::quadrature;
    o.max_order = fam.max_moment_order(theta_star);
    if (fam.diff_abs_moment) {
        auto f = fam.diff_abs_moment;
        o.absolute_moment = [f, theta_star](int p) {
            return f(theta_star, p);
        };
        return o;
    }
    o.absolute_moment = [fam, theta_star](int p) {
        quad_options inner_opt;
        inner_opt.abs_tol = 1e-9;
        return fam.expect(
            [&](double y) {
                return fam.expect(
                    [p, y](double x) {
                        return std::pow(std::fabs(x - y), p);
                    },
                    theta_star, inner_opt);
            },
            theta_star);
    };
    return o;
}

// Certify (c_H, c_l) on a declared x-box by grid search with golden-section
// refinement, and fill the d-norms from the difference distribution.
// Aborts when the curvature floor on the box is not positive.
inline lipschitz_profile certify_profile(const model_family& fam,
                                         interval x_box, norm_regime regime,
                                         std::size_t n, double theta_star,
                                         int grid_points = 65) {
    x_box.validate("x box");
    require(n >= 1, "n must be at least 1");
    fam.check_theta(theta_star);
    const auto& sp = fam.theta_space;
    auto inner_inf = [&](double x) {
        return grid_inf([&](double th) { return fam.lddot(x, th); },
                        sp.lower, sp.upper, grid_points);
    };
    auto inner_sup = [&](double x) {
        return grid_sup([&](double th) { return std::fabs(fam.ldot_dx(x, th)); },
                        sp.lower, sp.upper, grid_points);
    };
    lipschitz_profile p;
    p.c_H = grid_inf(inner_inf, x_box.lo, x_box.hi, grid_points);
    if (p.c_H <= 0.0) {
        throw validation_error(
            fam.name + ": curvature floor on the declared box is "
                + std::to_string(p.c_H)
                + " (not positive); shrink the box or the parameter space");
    }
    p.c_l = grid_sup(inner_sup, x_box.lo, x_box.hi, grid_points);
    p.regime = regime;
    p.x_box = x_box;
    moment_oracle diff = difference_moment_oracle(fam, theta_star);
    norm_result nr = regime == norm_regime::theta1 ? theta1_norm(diff)
                                                   : theta2_norm(diff);
    p.d_norms.assign(n, nr.value);
    return p;
}

}  // namespace mleb
