#pragma once

#include <cmath>

// Log-space combinatorial helpers. Factorials overflow past 170!, and the
// norm computations need ratios at p = 50, so everything stays in logs.

namespace mleb {

// log(p!)
inline double log_factorial(int p) {
    return std::lgamma(static_cast<double>(p) + 1.0);
}

// log((2p-1)!!) via (2p-1)!! = (2p)! / (2^p p!)
inline double log_odd_double_factorial(int p) {
    return log_factorial(2 * p) - static_cast<double>(p) * std::log(2.0)
         - log_factorial(p);
}

// log E|Z|^p for Z ~ N(0,1): 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
inline double log_abs_normal_moment(int p) {
    return 0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1))
         - 0.5 * std::log(M_PI);
}

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace mleb
