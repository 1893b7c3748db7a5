#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/family.hpp"
#include "mlebounds/special.hpp"

// Moment-ratio norms quantifying sub-exponential and sub-Gaussian size:
//
//   theta1:  sup_{p>=1} (E|X|^p / p!)^{1/p}
//   theta2:  sup_{p>=1} (E X^{2p} / (2p-1)!!)^{1/(2p)}
//
// The sup runs over integer p up to p_max (default 50); the achieving p and
// a truncation flag expose cases where the integer grid may understate the
// true sup. All ratio arithmetic happens in log space.

namespace mleb {

struct moment_oracle {
    enum class kind { analytic, quadrature, empirical };
    kind source = kind::analytic;

    // E|X|^p for integer p >= 1 (even moments E X^{2p} coincide with
    // E|X|^{2p}, so one function serves both norms)
    std::function<double(int)> absolute_moment;

    // E|X|^p exists iff p < max_order
    double max_order = HUGE_VAL;

    // empirical oracles only: sample size behind the moments
    std::size_t sample_size = 0;

    bool high_variance(int p) const {
        return source == kind::empirical && p > 10 && sample_size < 100000;
    }
};

inline moment_oracle analytic_oracle(std::function<double(int)> abs_moment,
                                     double max_order = HUGE_VAL) {
    moment_oracle o;
    o.source = moment_oracle::kind::analytic;
    o.absolute_moment = std::move(abs_moment);
    o.max_order = max_order;
    return o;
}

// Moments of the centered observation X - EX under theta_star, computed by
// the family's expectation machinery.
inline moment_oracle quadrature_oracle(const model_family& fam,
                                       double theta_star) {
    moment_oracle o;
    o.source = moment_oracle::kind::quadrature;
    o.max_order = fam.max_moment_order(theta_star);
    double mu = fam.mean(theta_star);
    if (!std::isfinite(mu)) {
        throw moment_error(1, fam.name + ": mean does not exist at theta "
                                  + std::to_string(theta_star));
    }
    o.absolute_moment = [fam, theta_star, mu](int p) {
        return fam.expect(
            [p, mu](double x) { return std::pow(std::fabs(x - mu), p); },
            theta_star);
    };
    return o;
}

inline moment_oracle empirical_oracle(const std::vector<double>& sample) {
    require(!sample.empty(), "empirical moment oracle needs a nonempty sample");
    moment_oracle o;
    o.source = moment_oracle::kind::empirical;
    o.sample_size = sample.size();
    o.absolute_moment = [sample](int p) {
        kahan_sum s;
        for (double x : sample) s.add(std::pow(std::fabs(x), p));
        return s.value() / static_cast<double>(sample.size());
    };
    return o;
}

struct norm_result {
    double value = 0.0;
    int achieving_p = 1;
    bool truncated = false;      // sup attained at the p_max boundary
    bool high_variance = false;  // empirical oracle in its unreliable range
};

namespace detail {

inline double checked_moment(const moment_oracle& o, int order) {
    if (static_cast<double>(order) >= o.max_order) {
        throw moment_error(order, "moment of order " + std::to_string(order)
                                      + " does not exist");
    }
    double m = o.absolute_moment(order);
    if (!std::isfinite(m) || m < 0.0) {
        throw moment_error(order, "moment of order " + std::to_string(order)
                                      + " is not finite");
    }
    return m;
}

}  // namespace detail

inline norm_result theta1_norm(const moment_oracle& oracle, int p_max = 50) {
    require(p_max >= 20, "theta1_norm: p_max must be at least 20");
    norm_result r;
    double best_log = -HUGE_VAL;
    for (int p = 1; p <= p_max; ++p) {
        double m = detail::checked_moment(oracle, p);
        double log_v = (std::log(m) - log_factorial(p)) / p;  // -inf when m = 0
        // ties are broken toward the smallest p: an update needs a material
        // improvement, not rounding noise
        if (log_v > best_log + 1e-12) r.achieving_p = p;
        if (log_v > best_log) best_log = log_v;
    }
    r.value = std::exp(best_log);
    r.truncated = (r.achieving_p == p_max);
    r.high_variance = oracle.high_variance(r.achieving_p);
    return r;
}

inline norm_result theta2_norm(const moment_oracle& oracle, int p_max = 50) {
    require(p_max >= 20, "theta2_norm: p_max must be at least 20");
    norm_result r;
    double best_log = -HUGE_VAL;
    for (int p = 1; p <= p_max; ++p) {
        double m = detail::checked_moment(oracle, 2 * p);
        double log_v = (std::log(m) - log_odd_double_factorial(p)) / (2 * p);
        if (log_v > best_log + 1e-12) r.achieving_p = p;
        if (log_v > best_log) best_log = log_v;
    }
    r.value = std::exp(best_log);
    r.truncated = (r.achieving_p == p_max);
    r.high_variance = oracle.high_variance(2 * r.achieving_p);
    return r;
}

}  // namespace mleb
