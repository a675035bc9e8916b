#pragma once

// Seeded random streams with distributions implemented here rather than taken
// from <random>: the standard distributions are implementation-defined, and
// every generated file must be bit-identical across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include <random>

namespace bpdhar {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed derivation: h = mix64(h ^ part) folded left over the parts, starting
/// from the base seed. Strings enter through fnv1a.
class SeedHasher {
public:
    explicit constexpr SeedHasher(std::uint64_t base) noexcept : h_(mix64(base)) {}

    constexpr SeedHasher& add(std::uint64_t v) noexcept {
        h_ = mix64(h_ ^ v);
        return *this;
    }
    constexpr SeedHasher& add(std::string_view s) noexcept { return add(fnv1a(s)); }
    constexpr std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_;
};

template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) noexcept {
    SeedHasher h(base);
    (h.add(parts), ...);
    return h.value();
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection sampled.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do r = engine_();
        while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller, caching the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do u1 = uniform();
        while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the boost U^(1/shape).
    double gamma(double shape) {
        if (shape < 1.0) {
            double u;
            do u = uniform();
            while (u <= 0.0);
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Dirichlet draw. Zero-weight components stay exactly zero.
    std::vector<double> dirichlet(std::span<const double> alpha) {
        std::vector<double> out(alpha.size(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (alpha[i] > 0.0) out[i] = gamma(alpha[i]);
            total += out[i];
        }
        if (total <= 0.0) {
            // Every gamma underflowed; fall back to the mean of the distribution.
            double a = 0.0;
            for (double v : alpha) a += v;
            for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] / a;
            return out;
        }
        for (double& v : out) v /= total;
        return out;
    }

    /// Index drawn with probability proportional to `weights`.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last_positive = i;
            if (u < acc) return i;
        }
        return last_positive;
    }

    /// Poisson count (Knuth); only used with small means.
    int poisson(double mean) {
        const double limit = std::exp(-mean);
        int k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bpdhar
