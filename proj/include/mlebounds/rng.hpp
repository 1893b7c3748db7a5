#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

// Self-contained RNG and samplers.
//
// The standard library distributions are implementation-defined, so every
// draw here goes through explicit inversion or transform sampling on top of
// a fixed-algorithm engine. Same seed, same platform libm, same stream.
//
// Per-trial seeding: derive_seed(master, index) passes both words through a
// splitmix64 avalanche, so trial streams are decorrelated even for adjacent
// indices and a zero master seed.

namespace mleb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x632be59bd9b4e019ULL);
}

// xoshiro256++ (Blackman/Vigna), seeded through splitmix64.
class rng {
public:
    using result_type = std::uint64_t;

    explicit rng(std::uint64_t seed = 0) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }

    result_type operator()() {
        auto rotl = [](std::uint64_t x, int k) {
            return (x << k) | (x >> (64 - k));
        };
        std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    std::uint64_t state_[4];
};

// Uniform on (0,1): 53 random bits, then shifted away from 0 so logs are safe.
inline double uniform01(rng& g) {
    double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

inline double sample_exponential(rng& g, double rate) {
    return -std::log(uniform01(g)) / rate;
}

// Marsaglia polar method; consumes a variable number of uniforms but is
// deterministic for a given stream. The spare is intentionally discarded so
// each call is a pure function of engine state.
inline double sample_normal(rng& g, double mean = 0.0, double sd = 1.0) {
    for (;;) {
        double u = 2.0 * uniform01(g) - 1.0;
        double v = 2.0 * uniform01(g) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

inline double sample_laplace(rng& g, double scale) {
    double u = uniform01(g) - 0.5;
    return (u < 0.0 ? scale : -scale) * std::log(1.0 - 2.0 * std::fabs(u));
}

inline double sample_pareto(rng& g, double shape, double x_min) {
    return x_min * std::pow(uniform01(g), -1.0 / shape);
}

inline double sample_weibull(rng& g, double shape, double scale) {
    return scale * std::pow(-std::log(uniform01(g)), 1.0 / shape);
}

// Sequential inversion; fine for the small means used here (lambda <= ~30).
inline double sample_poisson(rng& g, double lambda) {
    double u = uniform01(g);
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 1000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return static_cast<double>(k);
}

inline double sample_bernoulli(rng& g, double p) {
    return uniform01(g) < p ? 1.0 : 0.0;
}

}  // namespace mleb
