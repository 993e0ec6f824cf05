#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bcot {

// SplitMix64 finalizer; used to derive independent child stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based Philox4x32-10 generator. Substreams are derived from the
// stored seed, not the draw position, so split(i) yields the same stream no
// matter how many values were consumed from the parent. Workers holding
// distinct substreams can run in any order and still reproduce one master
// seed exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : seed_(seed), key0_(static_cast<std::uint32_t>(mix64(seed))),
          key1_(static_cast<std::uint32_t>(mix64(seed) >> 32)) {}

    // Independent child stream; deterministic in (seed, index) only.
    [[nodiscard]] Rng split(std::uint64_t index) const {
        return Rng(mix64(seed_ + mix64(index + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1. Multiply-shift mapping.
    std::uint64_t uniform_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller; second variate cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    void refill() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = 0xD2511F53ULL * c0;
            std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = {c0, c1, c2, c3};
        buf_pos_ = 0;
        // 128-bit counter increment
        if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
    }

    std::uint64_t seed_;
    std::uint32_t key0_, key1_;
    std::array<std::uint32_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint32_t, 4> buf_{0, 0, 0, 0};
    int buf_pos_ = 4;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Fisher-Yates shuffle driven by Rng (libstdc++'s std::shuffle draws in an
// unspecified pattern; this one is pinned).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace bcot
