#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/family.hpp"
#include "mlebounds/norms.hpp"

// Constant-specified concentration calculators for functions of independent
// samples, specialized here to sums of centered i.i.d. coordinates.
//
// theta2 route: a sum with per-coordinate theta2-norms s_1..s_n is
// sub-Gaussian with variance proxy 8 * sum s_k^2, giving the one-sided tail
//   P{f - Ef > t} <= exp(-t^2 / (16 sum s_k^2)).
//
// theta1 route: with theta1-norms m_1..m_n the sum is sub-Gamma with
// variance factor eta = 2 sum m_k^2 and scale M = max m_k, giving quantile
//   d(t) = sqrt(2 eta t) + M t        (P{f - Ef > d(t)} <= e^{-t})
// and tail
//   P{f - Ef > t} <= exp(-t^2 / (2 eta + 2 M t)).

namespace mleb {

enum class norm_regime { theta1, theta2 };

inline std::string regime_name(norm_regime r) {
    return r == norm_regime::theta1 ? "theta1" : "theta2";
}

struct deviation_norm_set {
    std::vector<double> norms;  // per-coordinate sup norms, already supped
    norm_regime regime = norm_regime::theta2;

    void validate() const {
        require(!norms.empty(), "deviation norm set must be nonempty");
        for (double v : norms) {
            require(std::isfinite(v) && v >= 0.0,
                    "deviation norms must be finite and nonnegative");
        }
    }
    double sum_squares() const {
        kahan_sum s;
        for (double v : norms) s.add(v * v);
        return s.value();
    }
    double max_norm() const {
        return *std::max_element(norms.begin(), norms.end());
    }
};

struct tail_class {
    enum class kind { sub_gaussian, sub_exponential, sub_gamma };
    kind k = kind::sub_gaussian;
    double sigma_sq = 0.0;  // sub_gaussian
    double lambda = 0.0;    // sub_exponential
    double alpha = 0.0;     // sub_exponential
    double eta = 0.0;       // sub_gamma variance factor
    double M = 0.0;         // sub_gamma scale
    bool degenerate = false;
};

struct tail_bound {
    double t = 0.0;
    double bound = 1.0;
    tail_class cls;
};

// sigma^2 = 8 * sum of squared theta2-norms.
inline tail_class subg_params_for_sum(const deviation_norm_set& set) {
    set.validate();
    require(set.regime == norm_regime::theta2,
            "subg_params_for_sum expects theta2-regime norms");
    tail_class c;
    c.k = tail_class::kind::sub_gaussian;
    c.sigma_sq = 8.0 * set.sum_squares();
    c.degenerate = (c.sigma_sq == 0.0);
    return c;
}

// (eta, M) = (2 * sum of squared theta1-norms, max theta1-norm).
inline tail_class subgamma_params_for_sum(const deviation_norm_set& set) {
    set.validate();
    require(set.regime == norm_regime::theta1,
            "subgamma_params_for_sum expects theta1-regime norms");
    tail_class c;
    c.k = tail_class::kind::sub_gamma;
    c.eta = 2.0 * set.sum_squares();
    c.M = set.max_norm();
    c.degenerate = (c.eta == 0.0 && c.M == 0.0);
    return c;
}

// Deviation level d(t) with P{f - Ef > d(t)} <= e^{-t}.
inline double subgamma_quantile(const tail_class& params, double t) {
    require(params.k == tail_class::kind::sub_gamma,
            "subgamma_quantile expects sub-Gamma parameters");
    require(t >= 0.0, "quantile level t must be nonnegative");
    return std::sqrt(2.0 * params.eta * t) + params.M * t;
}

inline double subgamma_tail_prob(const tail_class& params, double t) {
    require(params.k == tail_class::kind::sub_gamma,
            "subgamma_tail_prob expects sub-Gamma parameters");
    require(t >= 0.0, "threshold t must be nonnegative");
    if (t == 0.0) return 1.0;
    double denom = 2.0 * params.eta + 2.0 * params.M * t;
    if (denom == 0.0) return 0.0;  // degenerate class: no deviation at all
    return clamp_probability(std::exp(-t * t / denom));
}

inline double subg_tail_prob(const tail_class& params, double t) {
    require(params.k == tail_class::kind::sub_gaussian,
            "subg_tail_prob expects sub-Gaussian parameters");
    require(t >= 0.0, "threshold t must be nonnegative");
    if (t == 0.0) return 1.0;
    if (params.sigma_sq == 0.0) return 0.0;
    return clamp_probability(std::exp(-t * t / (2.0 * params.sigma_sq)));
}

inline tail_bound sum_tail_bound(const tail_class& params, double t) {
    tail_bound b;
    b.t = t;
    b.cls = params;
    b.bound = params.k == tail_class::kind::sub_gaussian
                  ? subg_tail_prob(params, t)
                  : subgamma_tail_prob(params, t);
    return b;
}

// Constant comparison for sums of n i.i.d. terms: the tail-exponent
// denominators from the generic Orlicz route versus the moment-ratio route.
struct constant_comparison {
    double old_constant;
    double new_constant;
    double ratio;
};

inline constant_comparison compare_constants_gaussian(double sigma_sq, int n) {
    require(n >= 1, "n must be at least 1");
    require(sigma_sq > 0.0, "sigma^2 must be positive");
    double nd = static_cast<double>(n);
    double old_c = 64.0 * std::exp(1.0) * nd * sigma_sq / std::sqrt(M_PI);
    double new_c = 16.0 * nd * sigma_sq;
    return {old_c, new_c, old_c / new_c};
}

inline constant_comparison compare_constants_laplace(double lambda, int n) {
    require(n >= 1, "n must be at least 1");
    require(lambda > 0.0, "lambda must be positive");
    double nd = static_cast<double>(n);
    double e1 = std::exp(1.0);
    double old_c = 4.0 * e1 * e1 * nd * lambda * lambda + 2.0 * e1 * lambda;
    double new_c = 4.0 * nd * lambda * lambda + 2.0 * lambda;
    return {old_c, new_c, old_c / new_c};
}

// Per-coordinate norms of the centered summands X_k - EX_k for a sum of n
// i.i.d. observations from the family. The oracle overload serves data
// distributions that are not estimation families (Laplace noise, say).
inline moment_oracle centered_moment_oracle(const model_family& fam,
                                            double theta_star) {
    if (fam.name == "gaussian_variance") {
        // X ~ N(0, theta): E|X|^p = theta^{p/2} 2^{p/2} Gamma((p+1)/2)/sqrt(pi)
        return analytic_oracle([theta_star](int p) {
            return std::exp(0.5 * p * std::log(theta_star)
                            + log_abs_normal_moment(p));
        });
    }
    return quadrature_oracle(fam, theta_star);
}

inline deviation_norm_set sum_deviation_norms(const moment_oracle& oracle,
                                              norm_regime regime,
                                              std::size_t n,
                                              int p_max = 50) {
    require(n >= 1, "n must be at least 1");
    norm_result r = regime == norm_regime::theta1 ? theta1_norm(oracle, p_max)
                                                  : theta2_norm(oracle, p_max);
    deviation_norm_set set;
    set.regime = regime;
    set.norms.assign(n, r.value);
    return set;
}

inline deviation_norm_set sum_deviation_norms(const model_family& fam,
                                              double theta_star,
                                              norm_regime regime,
                                              std::size_t n,
                                              int p_max = 50) {
    return sum_deviation_norms(centered_moment_oracle(fam, theta_star),
                               regime, n, p_max);
}

}  // namespace mleb
