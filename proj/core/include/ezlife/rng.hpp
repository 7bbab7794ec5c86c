#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ezlife {

// Counter-based generator (philox4x32-10): a fixed bijection of a 128-bit
// counter under a 64-bit key. Any (key, counter) input can be evaluated on
// any thread with no shared state, which is what makes path-level
// parallelism reproducible.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t mul0 = 0xD2511F53u, mul1 = 0xCD9E8D57u;
    constexpr std::uint32_t add0 = 0x9E3779B9u, add1 = 0xBB67AE85u;
    for (int round = 0;; ++round) {
        const std::uint64_t p0 = std::uint64_t(mul0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(mul1) * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
               std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        if (round == 9) return ctr;
        key[0] += add0;
        key[1] += add1;
    }
}

// One logical draw stream out of 2^64. Streams with distinct (seed, stream)
// ids are independent; reconstructing with the same ids replays the exact
// sequence, so antithetic partners and parallel workers need no coordination.
class substream {
public:
    substream(std::uint64_t seed, std::uint64_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          stream_{std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (have_ == 0) {
            buf_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32),
                               stream_[0], stream_[1]},
                              key_);
            ++block_;
            have_ = 4;
        }
        return buf_[4 - have_--];
    }

    // Strictly inside (0,1), 53 significant bits.
    double uniform() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t v = (hi << 32) | next_u32();
        return (double(v >> 11) + 0.5) * 0x1p-53;
    }

    // Box-Muller pair, second value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * 3.14159265358979323846 * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Exp(1) by inverse CDF; uniform() never returns 0 or 1, so always finite.
    double exponential() { return -std::log(uniform()); }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ezlife
