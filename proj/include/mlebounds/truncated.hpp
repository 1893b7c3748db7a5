#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/family.hpp"
#include "mlebounds/roots.hpp"

// Log-truncated robust Z-estimation. The influence function
//
//   psi(x) = sign(x) log(1 + |x| + x^2/2)
//
// is odd, strictly increasing, dominated by |x|, and linear to second order
// at 0. The estimator theta_hat_beta is the root in theta of the truncated
// empirical score
//
//   z_hat(theta) = (1/(n beta)) sum_i psi(beta ldot(X_i, theta)).
//
// The deviation machinery needs only three scalars of the model at the true
// parameter: the Fisher information I, and the first two moments of the
// Lipschitz envelope, Ec and Ec^2. Two width regimes exist: general_c uses
// (Ec, Ec^2) separately; constant_c applies when c(x) is constant in x and
// is tighter. Writing L = log(1/delta) and h for the half-width at
// confidence 1 - 2 delta:
//
//   general_c:  h(beta) = (beta I + L/(n beta))
//                         / ((1/2) Ec (1 + sqrt(1 - 4 beta^2 Ec^2 I/(Ec)^2
//                                                 - 4 Ec^2 L/(n (Ec)^2))))
//   constant_c: h(beta) = (beta I/2 + L/(n beta))
//                         / ((1/2) c (1 + sqrt(1 - beta^2 I - 2 L/n)))
//
// h(beta) at the tuned beta below equals the closed-form deviation bounds
// exactly (an algebraic identity, exercised by the tests).

namespace mleb {

inline double psi(double x) {
    double a = std::fabs(x);
    double v = std::log1p(a + 0.5 * a * a);
    return x < 0.0 ? -v : v;
}

struct truncated_score_config {
    double beta = 0.0;
    double delta = 0.0;
    parameter_space theta_space;

    void validate() const {
        require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
        require(delta > 0.0 && delta < 0.5,
                "delta must lie in (0, 1/2): the two-sided guarantee "
                "1 - 2 delta is vacuous otherwise");
        theta_space.validate(false);
    }
};

inline double z_hat(const model_family& fam, const std::vector<double>& sample,
                    double theta, double beta) {
    require(!sample.empty(), "z_hat needs a nonempty sample");
    require(beta > 0.0, "beta must be positive");
    fam.check_theta(theta);
    kahan_sum s;
    for (double x : sample) s.add(psi(beta * fam.ldot(x, theta)));
    return s.value() / (static_cast<double>(sample.size()) * beta);
}

struct solve_result {
    double theta_hat = 0.0;
    bool at_boundary = false;      // an endpoint was an exact root
    bool monotone_warning = false; // grid scan saw more than one sign change
};

// Direction-agnostic bisection of z_hat over the parameter space. Needs a
// sign change at the endpoints; either monotone orientation works.
inline solve_result solve(const model_family& fam,
                          const std::vector<double>& sample,
                          const truncated_score_config& config) {
    config.validate();
    require(!sample.empty(), "solve needs a nonempty sample");
    for (double x : sample) fam.check_x(x);
    const auto& sp = config.theta_space;
    auto f = [&](double th) { return z_hat(fam, sample, th, config.beta); };
    root_result rr = bisect(f, sp.lower, sp.upper, 1e-10);
    if (!rr.bracketed) {
        throw numeric_error(
            "truncated score has no sign change on ["
            + std::to_string(sp.lower) + ", " + std::to_string(sp.upper)
            + "]: endpoint values " + std::to_string(rr.f_lo) + " and "
            + std::to_string(rr.f_hi));
    }
    solve_result r;
    r.theta_hat = rr.root;
    r.at_boundary = rr.at_boundary;
    // cheap non-monotonicity sniff on a coarse grid
    int changes = 0;
    double prev = rr.f_lo;
    for (int i = 1; i <= 16; ++i) {
        double th = sp.lower + (sp.upper - sp.lower) * i / 16.0;
        double v = f(th);
        if (v != 0.0 && prev != 0.0 && std::signbit(v) != std::signbit(prev)) {
            ++changes;
        }
        if (v != 0.0) prev = v;
    }
    r.monotone_warning = changes > 1;
    return r;
}

// ---------------------------------------------------------------------------
// deviation-bound calculators on (I, Ec, Ec^2)
// ---------------------------------------------------------------------------

enum class width_case { general_c, constant_c };

inline std::string width_case_name(width_case c) {
    return c == width_case::general_c ? "general_c" : "constant_c";
}

struct bound_params {
    double fisher = 0.0;     // I(theta*)
    double c_mean = 0.0;     // E c(X)
    double c_sq_mean = 0.0;  // E c^2(X)

    void validate() const {
        require(fisher > 0.0 && std::isfinite(fisher),
                "Fisher information must be positive and finite");
        require(c_mean > 0.0 && std::isfinite(c_mean),
                "E c(X) must be positive and finite");
        require(c_sq_mean > 0.0 && std::isfinite(c_sq_mean),
                "E c^2(X) must be positive and finite");
        require(c_sq_mean >= c_mean * c_mean * (1.0 - 1e-12),
                "E c^2(X) must be at least (E c(X))^2");
    }
};

inline bound_params make_bound_params(const model_family& fam,
                                      double theta_star) {
    c_moment_result cm = c_moments(fam, theta_star);
    bound_params p;
    p.fisher = fisher_information(fam, theta_star);
    p.c_mean = cm.c_mean;
    p.c_sq_mean = cm.c_sq_mean;
    p.validate();
    return p;
}

struct sample_size_result {
    std::size_t n_min = 0;
    bool satisfiable = false;
};

// Smallest n making the width machinery valid at this beta:
//   n >= 4 Ec^2 L / ((Ec)^2 - 4 beta^2 Ec^2 I),   L = log(1/delta),
// unsatisfiable when the denominator is not positive.
inline sample_size_result min_sample_size(const bound_params& p, double beta,
                                          double delta) {
    p.validate();
    require(beta > 0.0, "beta must be positive");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    double L = std::log(1.0 / delta);
    double denom = p.c_mean * p.c_mean
                 - 4.0 * beta * beta * p.c_sq_mean * p.fisher;
    sample_size_result r;
    if (denom <= 0.0) {
        r.satisfiable = false;
        return r;
    }
    r.satisfiable = true;
    r.n_min = static_cast<std::size_t>(
        std::ceil(4.0 * p.c_sq_mean * L / denom - 1e-12));
    return r;
}

// The beta minimizing the half-width, per regime.
inline double tune_beta(const bound_params& p, std::size_t n, double delta,
                        width_case wcase) {
    p.validate();
    require(n >= 1, "n must be at least 1");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    double L = std::log(1.0 / delta);
    double nd = static_cast<double>(n);
    if (wcase == width_case::general_c) {
        double denom = nd * p.c_mean * p.c_mean - 4.0 * p.c_sq_mean * L;
        if (denom <= 0.0) {
            throw validation_error(
                "beta tuning infeasible: requires n (Ec)^2 > 4 Ec^2 log(1/delta)"
                " (have n (Ec)^2 = " + std::to_string(nd * p.c_mean * p.c_mean)
                + ", 4 Ec^2 log(1/delta) = "
                + std::to_string(4.0 * p.c_sq_mean * L) + ")");
        }
        double inflow = 1.0 + 4.0 * p.c_sq_mean * L / denom;
        return std::sqrt(L / (p.fisher * nd * inflow));
    }
    double denom = nd - 2.0 * L;
    if (denom <= 0.0) {
        throw validation_error(
            "beta tuning infeasible: requires n > 2 log(1/delta) (have n = "
            + std::to_string(n) + ", 2 log(1/delta) = "
            + std::to_string(2.0 * L) + ")");
    }
    double inflow = 1.0 + 2.0 * L / denom;
    return std::sqrt(2.0 * L / (p.fisher * nd * inflow));
}

// Half-width of the confidence band at level 1 - 2 delta for a given beta.
inline double half_width(const bound_params& p, double beta, std::size_t n,
                         double delta, width_case wcase) {
    p.validate();
    require(beta > 0.0, "beta must be positive");
    require(n >= 1, "n must be at least 1");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    double L = std::log(1.0 / delta);
    double nd = static_cast<double>(n);
    if (wcase == width_case::general_c) {
        double ec_sq = p.c_mean * p.c_mean;
        double disc = 1.0 - 4.0 * beta * beta * p.c_sq_mean * p.fisher / ec_sq
                    - 4.0 * p.c_sq_mean * L / (nd * ec_sq);
        if (disc < 0.0 && disc >= -1e-12) disc = 0.0;  // boundary rounding
        if (disc < 0.0) {
            throw validation_error(
                "half-width infeasible: requires 4 beta^2 Ec^2 I / (Ec)^2 + "
                "4 Ec^2 log(1/delta) / (n (Ec)^2) <= 1 (discriminant "
                + std::to_string(disc) + ")");
        }
        double num = beta * p.fisher + L / (nd * beta);
        return num / (0.5 * p.c_mean * (1.0 + std::sqrt(disc)));
    }
    double disc = 1.0 - beta * beta * p.fisher - 2.0 * L / nd;
    if (disc < 0.0 && disc >= -1e-12) disc = 0.0;  // boundary rounding
    if (disc < 0.0) {
        throw validation_error(
            "half-width infeasible: requires beta^2 I + 2 log(1/delta)/n <= 1"
            " (discriminant " + std::to_string(disc) + ")");
    }
    double num = 0.5 * beta * p.fisher + L / (nd * beta);
    return num / (0.5 * p.c_mean * (1.0 + std::sqrt(disc)));
}

// Closed forms for the half-width at the tuned beta.
//   general_c:  2 sqrt(I L / (n (Ec)^2 - 4 Ec^2 L))
//   constant_c:   sqrt(2 I L / (n c^2 - 2 c^2 L))
inline double deviation_bound(const bound_params& p, std::size_t n,
                              double delta, width_case wcase) {
    p.validate();
    require(n >= 1, "n must be at least 1");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    double L = std::log(1.0 / delta);
    double nd = static_cast<double>(n);
    if (wcase == width_case::general_c) {
        double denom = nd * p.c_mean * p.c_mean - 4.0 * p.c_sq_mean * L;
        if (denom <= 0.0) {
            throw validation_error(
                "deviation bound infeasible: requires n (Ec)^2 > "
                "4 Ec^2 log(1/delta)");
        }
        return 2.0 * std::sqrt(p.fisher * L / denom);
    }
    double c_sq = p.c_mean * p.c_mean;
    double denom = nd * c_sq - 2.0 * c_sq * L;
    if (denom <= 0.0) {
        throw validation_error(
            "deviation bound infeasible: requires n > 2 log(1/delta)");
    }
    return std::sqrt(2.0 * p.fisher * L / denom);
}

enum class interval_mode { theoretical, practical };

struct interval_result {
    double lo = 0.0;
    double hi = 0.0;
    interval_mode mode = interval_mode::theoretical;
};

inline interval_result make_interval(double center, double h,
                                     interval_mode mode) {
    require(h > 0.0 && std::isfinite(h), "half-width must be positive");
    require_finite(center, "interval center");
    return {center - h, center + h, mode};
}

// ---------------------------------------------------------------------------
// end-to-end robust fit
// ---------------------------------------------------------------------------

struct robust_estimate {
    double theta_hat = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double half_width = 0.0;
    interval_result band;
    bool n_condition_ok = false;
    bool beta_tuned = false;
    bool at_boundary = false;
    bool monotone_warning = false;
    width_case wcase = width_case::general_c;
};

// Fits theta_hat_beta and assembles the confidence band. In theoretical
// mode the band centers at the supplied theta_star with parameters
// evaluated there; in practical mode everything is plugged in at the fit.
inline robust_estimate fit_truncated(const model_family& fam,
                                     const std::vector<double>& sample,
                                     double delta,
                                     std::optional<double> beta_opt,
                                     interval_mode mode,
                                     std::optional<double> theta_star = {}) {
    require(delta > 0.0 && delta < 0.5, "delta must lie in (0, 1/2)");
    if (mode == interval_mode::theoretical) {
        require(theta_star.has_value(),
                "theoretical interval mode needs the true parameter");
    }
    std::size_t n = sample.size();
    width_case wcase = fam.lipschitz_constant_in_x ? width_case::constant_c
                                                   : width_case::general_c;
    robust_estimate est;
    est.delta = delta;
    est.wcase = wcase;

    // tune beta at the reference parameter (theta_star when known, else a
    // provisional plug-in from a pilot solve is impossible before beta is
    // chosen, so fall back to the parameter-space midpoint)
    double ref = theta_star ? *theta_star : fam.theta_space.midpoint();
    bound_params ref_params = make_bound_params(fam, ref);
    if (beta_opt) {
        est.beta = *beta_opt;
        require(est.beta > 0.0, "beta must be positive");
    } else {
        est.beta = tune_beta(ref_params, n, delta, wcase);
        est.beta_tuned = true;
    }

    truncated_score_config cfg;
    cfg.beta = est.beta;
    cfg.delta = delta;
    cfg.theta_space = fam.theta_space;
    solve_result sr = solve(fam, sample, cfg);
    est.theta_hat = sr.theta_hat;
    est.at_boundary = sr.at_boundary;
    est.monotone_warning = sr.monotone_warning;

    double center;
    bound_params band_params = ref_params;
    if (mode == interval_mode::practical) {
        center = est.theta_hat;
        band_params = make_bound_params(fam, est.theta_hat);
    } else {
        center = *theta_star;
    }
    est.half_width = half_width(band_params, est.beta, n, delta, wcase);
    est.band = make_interval(center, est.half_width, mode);
    sample_size_result ss = min_sample_size(band_params, est.beta, delta);
    est.n_condition_ok = ss.satisfiable && n >= ss.n_min;
    return est;
}

}  // namespace mleb
