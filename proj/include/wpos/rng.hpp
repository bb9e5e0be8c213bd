// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WPOS_RNG_HPP
#define WPOS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace wpos {

/// SplitMix64 step; used for seeding and for deriving child streams.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic, engine-independent random stream (xoshiro256++ core with
/// hand-rolled samplers). All dataset generation goes through this class so
/// results do not depend on the standard library's distribution internals.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed)
    {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * pi() * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with the given mean.
    double exponential(double mean)
    {
        if (mean <= 0.0) throw std::invalid_argument("rng: exponential mean must be > 0");
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -mean * std::log(u);
    }

    /// Gamma(shape, scale) by Marsaglia-Tsang squeeze.
    double gamma(double shape, double scale)
    {
        if (shape <= 0.0 || scale <= 0.0)
            throw std::invalid_argument("rng: gamma shape and scale must be > 0");
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * scale;
        }
    }

    /// Poisson with arbitrary mean; inversion for small means, PTRS otherwise.
    std::uint64_t poisson(double mean)
    {
        if (mean < 0.0) throw std::invalid_argument("rng: poisson mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            std::uint64_t count = 0;
            double product = uniform();
            while (product > limit) {
                ++count;
                product *= uniform();
            }
            return count;
        }
        return poisson_ptrs(mean);
    }

    /// Chi-square with nu degrees of freedom (nu need not be an integer).
    double chi_square(double nu) { return gamma(0.5 * nu, 2.0); }

    /// Noncentral chi-square via the Poisson mixture of central laws.
    double noncentral_chi_square(double nu, double noncentrality)
    {
        if (noncentrality < 0.0)
            throw std::invalid_argument("rng: noncentrality must be >= 0");
        const std::uint64_t jumps = poisson(0.5 * noncentrality);
        return chi_square(nu + 2.0 * static_cast<double>(jumps));
    }

    /// Nakagami-mu amplitude with scale omega = E[a^2].
    double nakagami(double mu, double omega)
    {
        if (mu < 0.5) throw std::invalid_argument("rng: nakagami mu must be >= 0.5");
        if (omega <= 0.0) throw std::invalid_argument("rng: nakagami omega must be > 0");
        return std::sqrt(gamma(mu, omega / mu));
    }

    static constexpr double pi() { return 3.14159265358979323846; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    // Hoermann's PTRS transformed-rejection sampler, exact for large means.
    std::uint64_t poisson_ptrs(double mean)
    {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b)
                <= k * loglam - mean - std::lgamma(k + 1.0))
                return static_cast<std::uint64_t>(k);
        }
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent stream from a root seed and a tag path, e.g.
/// (master, {scenario, record}). Children with distinct paths never collide.
inline RandomStream derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t acc = root;
    for (std::uint64_t tag : tags) {
        std::uint64_t mixer = acc ^ (tag + 0x9e3779b97f4a7c15ULL);
        acc = splitmix64(mixer);
    }
    return RandomStream(acc);
}

} // namespace wpos

#endif // WPOS_RNG_HPP
