#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "mlebounds/common.hpp"

// Adaptive Gauss-Kronrod (G7/K15) quadrature on finite intervals, with
// rational transforms for semi-infinite and whole-line integrals.
//
// Strategy: keep a worst-first queue of segments, each carrying its K15
// estimate and the |K15-G7| error proxy; split the worst segment until the
// summed error proxy meets the tolerance. Everything is double arithmetic
// in a fixed order, so results are reproducible.

namespace mleb {

struct quad_options {
    double abs_tol = 1e-8;
    double rel_tol = 1e-10;   // needed once moments reach 1e30 scales
    int max_segments = 4096;
};

namespace detail {

// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights sit on
// every second abscissa. Standard published values.
inline constexpr double kron_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kron_w[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gauss_w[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct gk_result {
    double integral;
    double error;
};

inline gk_result gk15(const std::function<double(double)>& f,
                      double a, double b) {
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    double fc = f(c);
    require_finite(fc, "integrand");
    double kron = kron_w[7] * fc;
    double gauss = gauss_w[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double f1 = f(c - h * kron_x[i]);
        double f2 = f(c + h * kron_x[i]);
        require_finite(f1, "integrand");
        require_finite(f2, "integrand");
        kron += kron_w[i] * (f1 + f2);
        if (i % 2 == 1) gauss += gauss_w[i / 2] * (f1 + f2);
    }
    return {kron * h, std::fabs(kron - gauss) * h};
}

struct segment {
    double a, b, integral, error;
    bool operator<(const segment& o) const { return error < o.error; }
};

}  // namespace detail

inline double integrate(const std::function<double(double)>& f,
                        double a, double b,
                        const quad_options& opt = {}) {
    if (a == b) return 0.0;
    std::priority_queue<detail::segment> queue;
    auto first = detail::gk15(f, a, b);
    queue.push({a, b, first.integral, first.error});
    double total = first.integral;
    double total_err = first.error;
    // error stranded on segments too narrow to split further; a divergent
    // integrand parks an O(1) error here and trips the final check instead
    // of being reported as a finite value
    double stuck_err = 0.0;
    int segments = 1;
    auto target = [&] {
        return std::fmax(opt.abs_tol, opt.rel_tol * std::fabs(total));
    };
    while (total_err + stuck_err > target() && segments < opt.max_segments
           && !queue.empty()) {
        detail::segment worst = queue.top();
        queue.pop();
        double mid = 0.5 * (worst.a + worst.b);
        double scale = std::fmax(
            1.0, std::fmax(std::fabs(worst.a), std::fabs(worst.b)));
        if (worst.b - worst.a
                <= 64.0 * std::numeric_limits<double>::epsilon() * scale
            || mid <= worst.a || mid >= worst.b) {
            total_err -= worst.error;
            stuck_err += worst.error;
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        queue.push({worst.a, mid, left.integral, left.error});
        queue.push({mid, worst.b, right.integral, right.error});
        ++segments;
    }
    if (total_err + stuck_err > target() * 100.0) {
        throw numeric_error("quadrature failed to converge: error estimate "
                            + std::to_string(total_err + stuck_err));
    }
    require_finite(total, "integral");
    return total;
}

// Integral of f over [a, +inf) via x = a + t/(1-t), dx = dt/(1-t)^2.
// The integrand must decay fast enough that the transformed function is
// integrable near t = 1 (GK nodes never touch the endpoint itself).
inline double integrate_right_tail(const std::function<double(double)>& f,
                                   double a, const quad_options& opt = {}) {
    return integrate(
        [&](double t) {
            double om = 1.0 - t;
            double x = a + t / om;
            double v = f(x) / (om * om);
            return std::isfinite(v) ? v : 0.0;
        },
        0.0, 1.0, opt);
}

inline double integrate_real_line(const std::function<double(double)>& f,
                                  const quad_options& opt = {}) {
    return integrate_right_tail(f, 0.0, opt)
         + integrate_right_tail([&](double x) { return f(-x); }, 0.0, opt);
}

// Sum of term(k) for k = k0, k0+1, ... with a relative tail cutoff. Serves
// the expectations of the discrete families.
inline double sum_series(const std::function<double(int)>& term, int k0,
                         double rel_tol = 1e-15, int max_terms = 200000) {
    kahan_sum acc;
    int small_run = 0;
    for (int k = k0; k < k0 + max_terms; ++k) {
        double t = term(k);
        require_finite(t, "series term");
        acc.add(t);
        if (std::fabs(t) <= rel_tol * (std::fabs(acc.value()) + 1e-300)) {
            if (++small_run >= 3) return acc.value();
        } else {
            small_run = 0;
        }
    }
    throw numeric_error("series failed to converge");
}

}  // namespace mleb
