#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lightcd {

/// Seeded random source with pinned output sequences.
///
/// std::mt19937_64 is specified bit-exactly by the standard; the
/// distributions below are hand-rolled so that streams are reproducible
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    /// Rademacher sign, +1 or -1.
    double sign() { return (gen_() & 1u) ? 1.0 : -1.0; }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives a stream-specific seed from a master seed and a short tag,
/// so components draw from independent, reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (const char c : tag) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ull;
    }
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index) {
    return derive_seed(derive_seed(master, tag) ^ (index * 0x9e3779b97f4a7c15ull),
                       "idx");
}

}  // namespace lightcd
