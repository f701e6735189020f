#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace figar {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a master seed and a component tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t component) {
    return splitmix64(master ^ splitmix64(component));
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(master, h);
}

/// Deterministic RNG with hand-rolled distributions so draw counts are
/// fixed per call (std:: distributions may cache or vary consumption).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform in [0, 1). One engine draw.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. Always two engine draws, no caching.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Integer in [0, n). One engine draw.
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
        if (n == 1) return 0;
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Sample from a categorical distribution by inverse CDF.
    /// A singleton distribution consumes no randomness.
    std::size_t categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("Rng::categorical: empty distribution");
        if (probs.size() == 1) return 0;
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace figar
