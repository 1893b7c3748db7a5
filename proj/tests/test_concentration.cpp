#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mlebounds/concentration.hpp"
#include "mlebounds/rng.hpp"
#include "mlebounds/special.hpp"

using namespace mleb;

namespace {

deviation_norm_set iid_set(double value, std::size_t n, norm_regime regime) {
    deviation_norm_set s;
    s.norms.assign(n, value);
    s.regime = regime;
    return s;
}

}  // namespace

TEST_CASE("sub-gaussian parameters for an i.i.d. sum") {
    // n gaussian summands with per-term norm sigma: variance proxy 8 n sigma^2,
    // so the tail exponent denominator is 16 n sigma^2
    double sigma = 0.7;
    std::size_t n = 12;
    tail_class c = subg_params_for_sum(iid_set(sigma, n, norm_regime::theta2));
    REQUIRE(c.sigma_sq == Catch::Approx(8.0 * n * sigma * sigma).epsilon(1e-13));
    double t = 3.1;
    REQUIRE(subg_tail_prob(c, t)
            == Catch::Approx(std::exp(-t * t / (16.0 * n * sigma * sigma)))
                   .epsilon(1e-13));

    REQUIRE(subg_params_for_sum(iid_set(1.0, 4, norm_regime::theta2)).sigma_sq
            == Catch::Approx(32.0).epsilon(1e-15));

    tail_class zero = subg_params_for_sum(iid_set(0.0, 3, norm_regime::theta2));
    REQUIRE(zero.sigma_sq == 0.0);
    REQUIRE(zero.degenerate);

    REQUIRE_THROWS_AS(subg_params_for_sum(iid_set(1.0, 2, norm_regime::theta1)),
                      validation_error);
    REQUIRE_THROWS_AS(subg_params_for_sum(iid_set(1.0, 0, norm_regime::theta2)),
                      validation_error);
}

TEST_CASE("sub-gamma parameters for an i.i.d. sum") {
    // n laplace summands with per-term norm lambda: (2 n lambda^2, lambda),
    // tail exponent denominator 4 n lambda^2 + 2 lambda t
    double lambda = 1.3;
    std::size_t n = 9;
    tail_class c = subgamma_params_for_sum(iid_set(lambda, n, norm_regime::theta1));
    REQUIRE(c.eta == Catch::Approx(2.0 * n * lambda * lambda).epsilon(1e-13));
    REQUIRE(c.M == Catch::Approx(lambda).epsilon(1e-15));
    double t = 2.4;
    double denom = 4.0 * n * lambda * lambda + 2.0 * lambda * t;
    REQUIRE(subgamma_tail_prob(c, t)
            == Catch::Approx(std::exp(-t * t / denom)).epsilon(1e-13));

    tail_class single = subgamma_params_for_sum(iid_set(3.0, 1, norm_regime::theta1));
    REQUIRE(single.eta == Catch::Approx(18.0).epsilon(1e-15));
    REQUIRE(single.M == Catch::Approx(3.0).epsilon(1e-15));

    tail_class zero = subgamma_params_for_sum(iid_set(0.0, 5, norm_regime::theta1));
    REQUIRE(zero.eta == 0.0);
    REQUIRE(zero.M == 0.0);
    REQUIRE(zero.degenerate);

    REQUIRE_THROWS_AS(
        subgamma_params_for_sum(iid_set(1.0, 2, norm_regime::theta2)),
        validation_error);
}

TEST_CASE("sub-gamma quantile closed forms") {
    tail_class c;
    c.k = tail_class::kind::sub_gamma;
    c.eta = 2.0;
    c.M = 1.0;
    REQUIRE(subgamma_quantile(c, 1.0) == Catch::Approx(3.0).epsilon(1e-15));
    REQUIRE(subgamma_quantile(c, 0.0) == 0.0);
    c.eta = 8.0;
    c.M = 2.0;
    REQUIRE(subgamma_quantile(c, 4.0) == Catch::Approx(16.0).epsilon(1e-15));
    REQUIRE_THROWS_AS(subgamma_quantile(c, -1.0), validation_error);
}

TEST_CASE("sub-gamma tail closed forms") {
    tail_class c;
    c.k = tail_class::kind::sub_gamma;
    c.eta = 2.0;  // sum of squared norms 1
    c.M = 0.0;
    REQUIRE(subgamma_tail_prob(c, 2.0)
            == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    REQUIRE(subgamma_tail_prob(c, 0.0) == 1.0);
    c.eta = 0.0;
    c.M = 1.0;
    REQUIRE(subgamma_tail_prob(c, 1.0)
            == Catch::Approx(std::exp(-0.5)).epsilon(1e-15));
    c.M = 0.0;  // fully degenerate: nothing deviates
    REQUIRE(subgamma_tail_prob(c, 0.5) == 0.0);
    REQUIRE(subgamma_tail_prob(c, 0.0) == 1.0);
}

TEST_CASE("quantile and tail forms bracket each other") {
    // with M = 0 the two forms invert each other exactly
    tail_class pure;
    pure.k = tail_class::kind::sub_gamma;
    pure.eta = 5.0;
    pure.M = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        double q = subgamma_quantile(pure, t);
        REQUIRE(subgamma_tail_prob(pure, q)
                == Catch::Approx(std::exp(-t)).epsilon(1e-12));
    }
    // with M > 0 the quantile inverts a sharper exponent than the closed
    // tail expression, so the tail value at the quantile lands between
    // e^{-t} and e^{-t/2} (the right edge is approached as eta -> 0)
    for (double eta : {0.0, 0.5, 2.0, 20.0}) {
        for (double M : {0.3, 1.0, 4.0}) {
            tail_class c;
            c.k = tail_class::kind::sub_gamma;
            c.eta = eta;
            c.M = M;
            for (double t : {0.5, 1.0, 2.0, 4.0}) {
                double v = subgamma_tail_prob(c, subgamma_quantile(c, t));
                REQUIRE(v >= std::exp(-t) * (1.0 - 1e-12));
                REQUIRE(v <= std::exp(-0.5 * t) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("tail bounds are capped at 1 and nonincreasing in t") {
    tail_class g = subg_params_for_sum(iid_set(1.0, 3, norm_regime::theta2));
    tail_class s = subgamma_params_for_sum(iid_set(1.0, 3, norm_regime::theta1));
    double prev_g = 2.0, prev_s = 2.0, prev_q = -1.0;
    for (int i = 0; i <= 40; ++i) {
        double t = 0.25 * i;
        double pg = subg_tail_prob(g, t);
        double ps = subgamma_tail_prob(s, t);
        double q = subgamma_quantile(s, t);
        REQUIRE(pg <= 1.0);
        REQUIRE(ps <= 1.0);
        REQUIRE(pg <= prev_g + 1e-15);
        REQUIRE(ps <= prev_s + 1e-15);
        REQUIRE(q >= prev_q);
        prev_g = pg;
        prev_s = ps;
        prev_q = q;
    }
    REQUIRE(subg_tail_prob(g, 0.0) == 1.0);
    REQUIRE(sum_tail_bound(g, 1.0).bound == subg_tail_prob(g, 1.0));
    REQUIRE(sum_tail_bound(s, 1.0).bound == subgamma_tail_prob(s, 1.0));
}

TEST_CASE("constant comparison for gaussian and laplace sums") {
    constant_comparison g = compare_constants_gaussian(1.0, 1);
    REQUIRE(g.old_constant
            == Catch::Approx(64.0 * std::exp(1.0) / std::sqrt(M_PI)).epsilon(1e-13));
    REQUIRE(g.old_constant == Catch::Approx(98.15208).epsilon(1e-6));
    REQUIRE(g.new_constant == Catch::Approx(16.0).epsilon(1e-15));
    REQUIRE(g.ratio == Catch::Approx(6.134505).epsilon(1e-6));

    constant_comparison l = compare_constants_laplace(1.0, 1);
    double e1 = std::exp(1.0);
    REQUIRE(l.old_constant == Catch::Approx(4.0 * e1 * e1 + 2.0 * e1).epsilon(1e-13));
    REQUIRE(l.old_constant == Catch::Approx(34.9927).epsilon(1e-5));
    REQUIRE(l.new_constant == Catch::Approx(6.0).epsilon(1e-15));

    // scaling in n and in the scale parameter
    constant_comparison g4 = compare_constants_gaussian(2.0, 4);
    REQUIRE(g4.new_constant == Catch::Approx(16.0 * 4 * 2.0).epsilon(1e-13));
    REQUIRE(g4.ratio == Catch::Approx(g.ratio).epsilon(1e-13));

    REQUIRE_THROWS_AS(compare_constants_gaussian(1.0, 0), validation_error);
    REQUIRE_THROWS_AS(compare_constants_laplace(-1.0, 2), validation_error);
}

TEST_CASE("per-coordinate norms of centered i.i.d. summands") {
    auto gauss = make_gaussian_variance({0.5, 2.0});
    deviation_norm_set set =
        sum_deviation_norms(gauss, 1.44, norm_regime::theta2, 7);
    REQUIRE(set.norms.size() == 7);
    for (double v : set.norms) {
        REQUIRE(v == Catch::Approx(1.2).epsilon(1e-10));
    }

    // laplace noise is a data distribution, not an estimation family; it
    // enters through the oracle overload
    double lambda = 0.8;
    auto laplace = analytic_oracle([lambda](int p) {
        return std::exp(log_factorial(p) + p * std::log(lambda));
    });
    deviation_norm_set lset =
        sum_deviation_norms(laplace, norm_regime::theta1, 5);
    REQUIRE(lset.norms.size() == 5);
    for (double v : lset.norms) {
        REQUIRE(v == Catch::Approx(lambda).epsilon(1e-12));
    }

    auto pareto = make_pareto_shape({1.0, 2.0}, 1.0);
    REQUIRE_THROWS_AS(sum_deviation_norms(pareto, 1.5, norm_regime::theta1, 3),
                      moment_error);
}

TEST_CASE("simulated gaussian sums respect the sub-gaussian tail curve") {
    for (std::size_t n : {5, 50}) {
        const int trials = 1000000;
        tail_class cls = subg_params_for_sum(iid_set(1.0, n, norm_regime::theta2));
        double t_max = 4.0 * std::sqrt(static_cast<double>(n));
        std::vector<int> exceed(20, 0);
        rng g(20240218 + n);
        for (int trial = 0; trial < trials; ++trial) {
            kahan_sum s;
            for (std::size_t k = 0; k < n; ++k) s.add(sample_normal(g, 0.0, 1.0));
            double f = s.value();
            for (int j = 0; j < 20; ++j) {
                if (f > t_max * (j + 1) / 20.0) ++exceed[j];
            }
        }
        for (int j = 0; j < 20; ++j) {
            double t = t_max * (j + 1) / 20.0;
            double emp = static_cast<double>(exceed[j]) / trials;
            double se = std::sqrt(std::fmax(emp * (1.0 - emp), 1e-12) / trials);
            INFO("n=" << n << " t=" << t);
            REQUIRE(emp <= subg_tail_prob(cls, t) + 3.0 * se);
        }
    }
}

TEST_CASE("simulated laplace sums respect the sub-gamma tail curve") {
    for (std::size_t n : {5, 50}) {
        const int trials = 1000000;
        tail_class cls =
            subgamma_params_for_sum(iid_set(1.0, n, norm_regime::theta1));
        double t_max = 4.0 * std::sqrt(2.0 * static_cast<double>(n));
        std::vector<int> exceed(20, 0);
        rng g(555000 + n);
        for (int trial = 0; trial < trials; ++trial) {
            kahan_sum s;
            for (std::size_t k = 0; k < n; ++k) s.add(sample_laplace(g, 1.0));
            double f = s.value();
            for (int j = 0; j < 20; ++j) {
                if (f > t_max * (j + 1) / 20.0) ++exceed[j];
            }
        }
        for (int j = 0; j < 20; ++j) {
            double t = t_max * (j + 1) / 20.0;
            double emp = static_cast<double>(exceed[j]) / trials;
            double se = std::sqrt(std::fmax(emp * (1.0 - emp), 1e-12) / trials);
            INFO("n=" << n << " t=" << t);
            REQUIRE(emp <= subgamma_tail_prob(cls, t) + 3.0 * se);
        }
    }
}
