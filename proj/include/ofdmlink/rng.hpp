#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ofdmlink/types.hpp"

namespace ofdmlink {

/// SplitMix64. Used wherever a sequence must be reproducible outside this
/// code base (interleavers, pilot values): the algorithm is fully specified,
/// unlike the std distributions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Counter-based seed derivation: a stream id for (master, a, b, c).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) noexcept {
    SplitMix64 mix(master ^ 0x6A09E667F3BCC909ULL);
    std::uint64_t h = mix.next();
    for (std::uint64_t word : {a, b, c}) {
        SplitMix64 step(h ^ (word * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
        h = step.next();
    }
    return h;
}

/// Fisher-Yates with SplitMix64: for i = N-1..1, j = next() % (i+1).
inline std::vector<std::uint32_t> seeded_permutation(std::size_t count, std::uint64_t seed) {
    std::vector<std::uint32_t> perm(count);
    for (std::size_t i = 0; i < count; ++i) perm[i] = static_cast<std::uint32_t>(i);
    SplitMix64 gen(seed);
    for (std::size_t i = count; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(gen.next() % (i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

/// Monte Carlo engine. Deterministic for a given seed within one toolchain.
using Rng = std::mt19937_64;

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cplx complex_normal(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    if (hi <= lo) return lo;
    std::uniform_real_distribution<double> ud(lo, hi);
    return ud(rng);
}

}  // namespace ofdmlink
