#pragma once

#include <array>
#include <cstdint>

namespace rsp {

// splitmix64 mixing function (Steele, Lea, Flood 2014). Used both as the
// seed-expansion generator for xoshiro and as the ensemble stream splitter.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        return splitmix64_mix(state);
    }
};

// Stream-split rule: replica r of a run with master seed S draws its seed as
// the (r+1)-th output of splitmix64 started at S. Streams are therefore a
// function of (S, r) alone, independent of thread count and launch order.
inline std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t replica) {
    return splitmix64_mix(master_seed + (replica + 1) * 0x9E3779B97F4A7C15ull);
}

// xoshiro256++ (Blackman, Vigna 2019), seeded through splitmix64.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0,1), 53 significant bits. Built from the raw
    // integer so the value stream is identical across platforms.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

} // namespace rsp
