#ifndef ATTN_RNG_HPP
#define ATTN_RNG_HPP

#include <cstdint>

namespace attn {

// SplitMix64 (Steele, Lea & Flood 2014). Fully specified so that any port
// reproduces the same stream from the same seed:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// uniform() takes the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) by scaling uniform(); n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return v < n ? v : n - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace attn

#endif
