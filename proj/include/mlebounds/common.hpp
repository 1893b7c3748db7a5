#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Shared error taxonomy and small numeric helpers.
//
// Error classes map onto process exit codes at the CLI boundary:
//   validation_error -> 1 (bad configuration, infeasible settings, domain violations)
//   numeric_error    -> 2 (NaN data, divergent integrals, missing roots)

namespace mleb {

class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Moment of the named order does not exist (heavy tails); carries the order.
class moment_error : public numeric_error {
public:
    moment_error(int order, const std::string& msg)
        : numeric_error(msg), order_(order) {}
    int order() const { return order_; }
private:
    int order_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw validation_error(msg);
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw numeric_error(what + " is not finite");
}

// Closed interval with positive length.
struct interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x >= lo && x <= hi; }

    void validate(const std::string& name) const {
        require(std::isfinite(lo) && std::isfinite(hi),
                name + " endpoints must be finite");
        require(lo < hi, name + " must satisfy lower < upper");
    }
};

// Compensated (Kahan) accumulator. Summation order is fixed by the caller,
// which is what makes parallel Monte Carlo reductions byte-reproducible.
struct kahan_sum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline double clamp_probability(double p) {
    if (!(p > 0.0)) return 0.0;
    return p < 1.0 ? p : 1.0;
}

}  // namespace mleb
