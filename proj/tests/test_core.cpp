#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlebounds/common.hpp"
#include "mlebounds/quadrature.hpp"
#include "mlebounds/rng.hpp"
#include "mlebounds/roots.hpp"
#include "mlebounds/special.hpp"

using namespace mleb;

TEST_CASE("derived seeds are deterministic and well spread") {
    REQUIRE(derive_seed(1, 0) == derive_seed(1, 0));
    REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
    REQUIRE(derive_seed(0, 0) != derive_seed(0, 1));
    REQUIRE(derive_seed(1, 0) != derive_seed(2, 0));
    // adjacent indices should not share high bits
    std::uint64_t a = derive_seed(7, 100), b = derive_seed(7, 101);
    REQUIRE((a >> 32) != (b >> 32));
}

TEST_CASE("engine streams replay exactly") {
    rng g1(12345), g2(12345), g3(54321);
    bool all_eq = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        auto v1 = g1(), v2 = g2(), v3 = g3();
        all_eq = all_eq && (v1 == v2);
        any_diff = any_diff || (v1 != v3);
    }
    REQUIRE(all_eq);
    REQUIRE(any_diff);
}

TEST_CASE("uniform01 stays inside the open unit interval") {
    rng g(9);
    for (int i = 0; i < 100000; ++i) {
        double u = uniform01(g);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("sampler moments match their distributions") {
    const int n = 200000;
    rng g(2024);

    kahan_sum exp_sum, norm_sum, norm_sq, lap_sq, pois_sum, bern_sum;
    for (int i = 0; i < n; ++i) exp_sum.add(sample_exponential(g, 2.0));
    for (int i = 0; i < n; ++i) {
        double x = sample_normal(g, 0.0, 1.5);
        norm_sum.add(x);
        norm_sq.add(x * x);
    }
    for (int i = 0; i < n; ++i) {
        double x = sample_laplace(g, 0.7);
        lap_sq.add(x * x);
    }
    for (int i = 0; i < n; ++i) pois_sum.add(sample_poisson(g, 3.0));
    for (int i = 0; i < n; ++i) bern_sum.add(sample_bernoulli(g, 0.3));

    double inv_rt = 1.0 / std::sqrt(static_cast<double>(n));
    // 4-sigma slack on each Monte Carlo mean
    REQUIRE(std::fabs(exp_sum.value() / n - 0.5) < 4.0 * 0.5 * inv_rt);
    REQUIRE(std::fabs(norm_sum.value() / n) < 4.0 * 1.5 * inv_rt);
    REQUIRE(std::fabs(norm_sq.value() / n - 2.25) < 4.0 * 2.25 * std::sqrt(2.0) * inv_rt);
    REQUIRE(std::fabs(lap_sq.value() / n - 2.0 * 0.49) < 4.0 * 0.98 * std::sqrt(5.0) * inv_rt);
    REQUIRE(std::fabs(pois_sum.value() / n - 3.0) < 4.0 * std::sqrt(3.0) * inv_rt);
    REQUIRE(std::fabs(bern_sum.value() / n - 0.3) < 4.0 * 0.46 * inv_rt);
}

TEST_CASE("pareto sampler matches its closed-form distribution function") {
    const int n = 1000000;
    rng g(77);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_pareto(g, 3.0, 1.0);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        double cdf = 1.0 - std::pow(xs[i], -3.0);
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        ks = std::fmax(ks, std::fmax(std::fabs(cdf - lo), std::fabs(cdf - hi)));
    }
    REQUIRE(ks < 0.002);
    REQUIRE(xs.front() >= 1.0);
}

TEST_CASE("weibull sampler has the right mean") {
    const int n = 200000;
    rng g(5);
    kahan_sum s;
    for (int i = 0; i < n; ++i) s.add(sample_weibull(g, 2.0, 1.0));
    double mean = std::exp(std::lgamma(1.5));  // Gamma(3/2)
    REQUIRE(std::fabs(s.value() / n - mean) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("log-space combinatorial identities") {
    REQUIRE(log_factorial(5) == Catch::Approx(std::log(120.0)).epsilon(1e-13));
    REQUIRE(log_factorial(0) == Catch::Approx(0.0).margin(1e-14));
    // (2*3-1)!! = 15, (2*1-1)!! = 1
    REQUIRE(log_odd_double_factorial(3) == Catch::Approx(std::log(15.0)).epsilon(1e-13));
    REQUIRE(log_odd_double_factorial(1) == Catch::Approx(0.0).margin(1e-13));
    // E|Z|^4 = 3, E|Z|^1 = sqrt(2/pi)
    REQUIRE(std::exp(log_abs_normal_moment(4)) == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(std::exp(log_abs_normal_moment(1))
            == Catch::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    REQUIRE(normal_cdf(1.959963984540054) == Catch::Approx(0.975).epsilon(1e-10));
}

TEST_CASE("compensated summation survives many small increments") {
    kahan_sum s;
    for (int i = 0; i < 1000000; ++i) s.add(0.1);
    REQUIRE(std::fabs(s.value() - 100000.0) < 1e-8);
}

TEST_CASE("quadrature reproduces closed-form integrals") {
    REQUIRE(integrate([](double x) { return x * x; }, 0.0, 1.0)
            == Catch::Approx(1.0 / 3.0).epsilon(1e-13));
    REQUIRE(integrate([](double x) { return std::sin(x); }, 0.0, M_PI)
            == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(integrate_right_tail([](double x) { return std::exp(-x); }, 0.0)
            == Catch::Approx(1.0).epsilon(1e-10));
    double gauss_mass = integrate_real_line([](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    });
    REQUIRE(gauss_mass == Catch::Approx(1.0).epsilon(1e-10));
    // a peaked integrand that forces adaptivity
    double spike = integrate([](double x) {
        return std::exp(-1000.0 * (x - 0.37) * (x - 0.37));
    }, 0.0, 1.0);
    REQUIRE(spike == Catch::Approx(std::sqrt(M_PI / 1000.0)).epsilon(1e-8));
}

TEST_CASE("quadrature reports divergence instead of a wrong number") {
    REQUIRE_THROWS_AS(
        integrate_right_tail([](double x) { return 1.0 / (1.0 + x); }, 0.0),
        numeric_error);
}

TEST_CASE("series summation") {
    REQUIRE(sum_series([](int k) { return std::pow(0.5, k); }, 0)
            == Catch::Approx(2.0).epsilon(1e-12));
    // Poisson(3) mass sums to one
    double mass = sum_series(
        [](int k) { return std::exp(-3.0 + k * std::log(3.0) - log_factorial(k)); },
        0);
    REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bisection works for both monotone orientations") {
    auto up = [](double x) { return x * x * x - 2.0; };
    auto down = [](double x) { return 2.0 - x * x * x; };
    root_result r1 = bisect(up, 0.0, 2.0);
    root_result r2 = bisect(down, 0.0, 2.0);
    REQUIRE(r1.bracketed);
    REQUIRE(r2.bracketed);
    REQUIRE(r1.root == Catch::Approx(std::cbrt(2.0)).margin(1e-9));
    REQUIRE(r2.root == Catch::Approx(std::cbrt(2.0)).margin(1e-9));

    root_result none = bisect([](double x) { return x + 10.0; }, 0.0, 1.0);
    REQUIRE_FALSE(none.bracketed);

    root_result edge = bisect([](double x) { return x; }, 0.0, 1.0);
    REQUIRE(edge.bracketed);
    REQUIRE(edge.at_boundary);
    REQUIRE(edge.root == 0.0);
}

TEST_CASE("extremum search on compact intervals") {
    double m = golden_min([](double x) { return (x - 1.3) * (x - 1.3); }, 0.0, 2.0);
    REQUIRE(m == Catch::Approx(1.3).margin(1e-9));

    double s = grid_sup([](double x) { return std::sin(x); }, 0.0, M_PI);
    REQUIRE(s == Catch::Approx(1.0).epsilon(1e-10));

    double mn = grid_inf([](double x) { return std::cos(x); }, 0.0, 2.0 * M_PI);
    REQUIRE(mn == Catch::Approx(-1.0).epsilon(1e-10));

    double arg = minimize_scalar([](double x) { return std::pow(x - 0.777, 4.0); },
                                 -1.0, 1.0);
    REQUIRE(arg == Catch::Approx(0.777).margin(1e-6));
}
