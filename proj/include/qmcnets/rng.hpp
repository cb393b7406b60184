#pragma once

#include <cstdint>

namespace qmcnets {

// Deterministic, platform-independent generator. Search reproducibility
// depends on every build producing the same digit stream for a given
// (seed, stream index), so std:: distributions are avoided on purpose.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased uniform draw from [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9E3779B97F4A7C15ULL + (b << 1)));
    g.next();
    return g.next();
}

/// Independent substream for (seed, index); used to make trial t of a search
/// identical no matter which worker executes it.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix_seed(seed, index));
}

}  // namespace qmcnets
