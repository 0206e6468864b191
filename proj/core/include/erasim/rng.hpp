#pragma once

#include <cstdint>

// Self-contained PRNG kit. std::uniform_* distributions are not guaranteed
// to produce identical streams across standard library implementations, so
// the simulation draws its own doubles and bounded integers to keep output
// byte-reproducible for a given seed.

namespace erasim {

// SplitMix64 finalizer; used for seed derivation and generator seeding.
inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed-splitting rule: stream `index` within stream family `domain`, both
// derived from one master seed. Changing (master, domain, index) by any
// amount gives an unrelated seed; the rule is stateless so replica seeds
// can be listed in a manifest and reproduced independently.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::uint64_t domain,
                                           std::uint64_t index) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x9E3779B97F4A7C15ULL * (domain + 1);
    (void)splitmix64(s);
    s ^= 0xBF58476D1CE4E5B9ULL * (index + 1);
    return splitmix64(s);
}

// Seed domains used by the orchestration layer.
namespace seed_domain {
inline constexpr std::uint64_t main_ensemble = 0;
inline constexpr std::uint64_t steady_state_prerun = 1;
inline constexpr std::uint64_t initial_sampling = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t stability_hold = 4;
inline constexpr std::uint64_t resample_base = 16;  // + time index
}  // namespace seed_domain

// xoshiro256++ (Blackman & Vigna). Fast, small state, passes BigCrush.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
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

    // Uniform double in [0, 1) with 53 bits of randomness.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Lemire multiply-shift; the modulo bias of
    // at most n / 2^64 is far below anything observable here.
    std::uint32_t next_index(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace erasim
