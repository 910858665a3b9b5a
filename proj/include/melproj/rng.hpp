#ifndef MELPROJ_RNG_HPP
#define MELPROJ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace melproj {

/// One splitmix64 step; used for seed derivation and stream splitting.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from (seed, purpose tag, index).
/// Keeps fold/model/shuffle randomness decoupled under a single experiment seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(seed);
    for (char c : tag) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return splitmix64(h ^ index);
}

/// Seeded generator with portable variate transforms.
///
/// std::mt19937_64's output sequence is pinned by the standard, but the
/// distribution adaptors are not; uniform and normal draws are therefore
/// produced with explicit arithmetic so identical seeds give identical
/// matrices on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the sine partner is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Uniform index in [0, n). Modulo bias is < 2^-53 for any n we use.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Fisher-Yates shuffle driven by Rng, independent of std::shuffle's
/// unspecified draw pattern.
template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace melproj

#endif
