#pragma once

#include <cmath>
#include <functional>

#include "mlebounds/common.hpp"

// 1-D root finding and extremum search on compact intervals.
//
// Bisection is direction-agnostic: it needs a sign change at the endpoints
// but works for either monotone orientation (or non-monotone f, in which
// case it converges to some sign crossing). 60 iterations bring any bracket
// of width <= 1e6 below the 1e-10 absolute tolerance.

namespace mleb {

struct root_result {
    double root = 0.0;
    double f_lo = 0.0;     // f at the original bracket endpoints
    double f_hi = 0.0;
    bool bracketed = false;
    bool at_boundary = false;  // an endpoint was already an exact root
};

inline root_result bisect(const std::function<double(double)>& f,
                          double lo, double hi,
                          double tol = 1e-10, int max_iter = 200) {
    root_result r;
    r.f_lo = f(lo);
    r.f_hi = f(hi);
    require_finite(r.f_lo, "objective at bracket lower end");
    require_finite(r.f_hi, "objective at bracket upper end");
    if (r.f_lo == 0.0) { r.root = lo; r.bracketed = true; r.at_boundary = true; return r; }
    if (r.f_hi == 0.0) { r.root = hi; r.bracketed = true; r.at_boundary = true; return r; }
    if (std::signbit(r.f_lo) == std::signbit(r.f_hi)) {
        r.bracketed = false;
        return r;
    }
    double a = lo, b = hi, fa = r.f_lo;
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        require_finite(fm, "objective inside bracket");
        if (fm == 0.0) { a = b = m; break; }
        if (std::signbit(fm) == std::signbit(fa)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    r.root = 0.5 * (a + b);
    r.bracketed = true;
    return r;
}

// Golden-section minimum of f on [lo, hi] to absolute x-tolerance tol.
inline double golden_min(const std::function<double(double)>& f,
                         double lo, double hi, double tol = 1e-12) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while ((b - a) > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Supremum of f on [lo, hi]: dense grid scan, then golden-section refinement
// on the bracketing subinterval around the grid argmax.
inline double grid_sup(const std::function<double(double)>& f,
                       double lo, double hi, int grid_points = 257) {
    if (grid_points < 3) grid_points = 3;
    double best = -HUGE_VAL;
    int best_i = 0;
    double h = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        double x = (i == grid_points - 1) ? hi : lo + i * h;
        double v = f(x);
        require_finite(v, "supremum objective");
        if (v > best) { best = v; best_i = i; }
    }
    double a = lo + (best_i > 0 ? (best_i - 1) * h : 0.0);
    double b = (best_i < grid_points - 1) ? lo + (best_i + 1) * h : hi;
    double xr = golden_min([&](double x) { return -f(x); }, a, b, 1e-12);
    return std::fmax(best, f(xr));
}

inline double grid_inf(const std::function<double(double)>& f,
                       double lo, double hi, int grid_points = 257) {
    return -grid_sup([&](double x) { return -f(x); }, lo, hi, grid_points);
}

// Minimizer location: coarse grid bracket plus golden-section polish.
// Used as the derivative-free fallback (and cross-check oracle) for fitting.
inline double minimize_scalar(const std::function<double(double)>& f,
                              double lo, double hi,
                              double tol = 1e-10, int grid_points = 129) {
    double best = HUGE_VAL;
    int best_i = 0;
    double h = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        double x = (i == grid_points - 1) ? hi : lo + i * h;
        double v = f(x);
        require_finite(v, "minimization objective");
        if (v < best) { best = v; best_i = i; }
    }
    double a = lo + (best_i > 0 ? (best_i - 1) * h : 0.0);
    double b = (best_i < grid_points - 1) ? lo + (best_i + 1) * h : hi;
    return golden_min(f, a, b, tol);
}

}  // namespace mleb
