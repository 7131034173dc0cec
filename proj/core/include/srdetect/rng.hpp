#pragma once

#include <cstdint>

#include "srdetect/model.hpp"

namespace srdetect {

/// splitmix64 step; used to derive seeds and fill generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Substream key for one replication. Streams depend only on (seed, index),
/// never on the worker that executes them, so estimates are invariant under
/// the worker count.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s) ^ (index + 1) * 0xD1B54A32D192ED03ULL;
    return splitmix64(mixed);
}

/// xoshiro256++ (Blackman & Vigna), state seeded through splitmix64.
class Xoshiro256PlusPlus {
public:
    explicit Xoshiro256PlusPlus(std::uint64_t seed) noexcept {
        for (auto& word : state_) word = splitmix64(seed);
    }

    std::uint64_t next() noexcept {
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

    /// Uniform draw strictly inside (0, 1): 53 random bits centered in the cell.
    double uniform01() noexcept {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal draw by the inverse-cdf transform, so the
    /// distributional assumptions live in one place (std_normal_quantile).
    double standard_normal() { return std_normal_quantile(uniform01()); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace srdetect
