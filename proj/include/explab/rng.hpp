#pragma once

#include <array>
#include <cstdint>

namespace explab {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Stateless:
// the output is a pure function of (counter, key), so any draw can be
// recomputed independently of execution order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeylA;
                key[1] += kWeylB;
            }
            std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMulA = 0xD2511F53U;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57U;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9U;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85U;
};

// Stream tags separate independent uses of one seed.
enum class Stream : std::uint32_t {
    features = 0,
    stability_probe = 1,
};

// Uniform double in [0, 1) keyed by (seed, stream, trial, draw).
constexpr double keyed_uniform(std::uint64_t seed, Stream stream, std::uint64_t trial,
                               std::uint32_t draw) {
    Philox4x32::Counter ctr{draw, static_cast<std::uint32_t>(stream),
                            static_cast<std::uint32_t>(trial),
                            static_cast<std::uint32_t>(trial >> 32)};
    Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    auto out = Philox4x32::generate(ctr, key);
    std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace explab
