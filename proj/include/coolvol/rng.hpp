#pragma once

#include <cmath>
#include <cstdint>

namespace coolvol {

/// splitmix64 step; used to derive independent stream seeds from a base seed
/// and to expand seeds into engine state.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ engine (Blackman & Vigna). The walk draws 8+ variates per
/// proposal, so engine throughput sets the pace of the whole algorithm.
/// Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 1) {
        for (int i = 0; i < 4; ++i) s_[i] = split_seed(seed, 0x517cc1b7ULL + i);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Uniform draw on [0,1) using the top 53 bits of one engine output.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Radius factor of a uniform point in the unit ball, distributed as
/// U^(1/n): realized as the maximum of n uniforms, which has the same law
/// and avoids a pow() in the walk inner loop for the dimensions that matter.
inline double ball_radius_factor(Rng& rng, int n) {
    if (n == 1) return uniform01(rng);
    if (n == 2) return std::sqrt(uniform01(rng));
    if (n <= 16) {
        std::uint64_t best = 0;
        for (int i = 0; i < n; ++i) best = std::max(best, rng());
        return static_cast<double>(best >> 11) * 0x1.0p-53;
    }
    return std::pow(uniform01(rng), 1.0 / n);
}

/// Standard-normal sampler (128-layer ziggurat, Marsaglia-Tsang layout).
/// One engine output per draw in the common case; exact distribution.
/// Stateless apart from the shared tables, so copies are free and a
/// trajectory is a deterministic function of the engine seed.
class NormalSampler {
public:
    NormalSampler() : t_(&tables()) {}

    double operator()(Rng& rng) const {
        const Tables& t = *t_;
        for (;;) {
            const std::uint64_t bits = rng();
            const unsigned layer = static_cast<unsigned>(bits & 127u);
            const double sign = (bits & 128u) ? -1.0 : 1.0;
            const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
            const double x = u * t.x[layer];
            if (x < t.x[layer + 1]) return sign * x;
            if (layer == 0) return sign * sample_tail(rng, t.r);
            const double y = t.y[layer] + uniform01(rng) * (t.y[layer + 1] - t.y[layer]);
            if (y < std::exp(-0.5 * x * x)) return sign * x;
        }
    }

private:
    struct Tables {
        double x[129];
        double y[129];
        double r;
        Tables() {
            r = 3.442619855899;
            const double v = 9.91256303526217e-3;
            const double f_r = std::exp(-0.5 * r * r);
            x[0] = v / f_r;
            x[1] = r;
            for (int i = 2; i < 128; ++i) {
                const double prev = x[i - 1];
                x[i] = std::sqrt(-2.0 * std::log(v / prev + std::exp(-0.5 * prev * prev)));
            }
            x[128] = 0.0;
            for (int i = 0; i < 129; ++i) y[i] = std::exp(-0.5 * x[i] * x[i]);
        }
    };

    static const Tables& tables() {
        static const Tables t;
        return t;
    }

    const Tables* t_;

    static double sample_tail(Rng& rng, double r) {
        // Marsaglia tail method for |x| > r.
        for (;;) {
            const double u1 = uniform01(rng);
            const double u2 = uniform01(rng);
            if (u1 <= 0.0 || u2 <= 0.0) continue;
            const double x = -std::log(u1) / r;
            const double y = -std::log(u2);
            if (2.0 * y > x * x) return r + x;
        }
    }
};

}  // namespace coolvol
