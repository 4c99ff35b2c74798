#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace panelval {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to decorrelate
// stream seeds; the statistical stream itself is mt19937_64.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based stream derivation: stream k of a run seeded with `seed`
// gets its own engine seed. Results therefore depend only on (seed, k),
// never on which thread evaluates the stream.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// mt19937_64 plus hand-rolled variate transforms. The standard library
// specifies the engine output exactly but not the distributions, so the
// transforms live here to keep results portable and seed-stable.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream for_stream(std::uint64_t seed, std::uint64_t stream) {
        return RandomStream(stream_seed(seed, stream));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1); rejects exact zero so log/pow stay finite.
    double uniform_pos() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % bound);
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller (no state between calls).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 boosted.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double alpha, double beta_shape) {
        const double x = gamma(alpha);
        const double y = gamma(beta_shape);
        return x / (x + y);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace panelval
