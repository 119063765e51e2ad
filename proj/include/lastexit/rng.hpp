// Deterministic random streams for parallel Monte Carlo.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lastexit {

/// splitmix64 step: advances state and returns a mixed 64-bit word.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * @brief Stream-splitting rule: one 64-bit sub-seed per (master, index).
 *
 * Every parallel unit of work (path, case, epsilon level) owns the stream
 * derived from its index, so batch output does not depend on worker count
 * or execution order. Two mixing rounds decorrelate adjacent indices and
 * low-entropy master seeds.
 */
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t base = splitmix64_next(s);
    std::uint64_t t = base ^ (index + 0x9E3779B97F4A7C15ULL);
    return splitmix64_next(t);
}

/// xoshiro256++ (Blackman/Vigna), seeded by splitmix64 expansion.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
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

    /// Uniform double strictly inside (0, 1).
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/**
 * @brief Standard normal stream via Box-Muller.
 *
 * Fully deterministic given the seed: no rejection step, a fixed number of
 * uniforms per pair, so the k-th normal of a stream is reproducible.
 */
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        const double u1 = rng_.uniform01();
        const double u2 = rng_.uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double uniform01() { return rng_.uniform01(); }

  private:
    Xoshiro256pp rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace lastexit
