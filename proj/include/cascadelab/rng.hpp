// Counter-based random number streams.
//
// Every (seed, replicate, level, cell) tuple owns an independent stream, so a
// weight draw never depends on evaluation order or thread count.  Seeds are
// supplied explicitly; there is no wall-clock default.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace cascadelab {

namespace detail {

// SplitMix64 step; also used to expand seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

// xoshiro256++ engine seeded from a single 64-bit value via SplitMix64.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        for (auto& word : state_)
            word = detail::splitmix64(seed);
    }

    std::uint64_t next_u64() {
        std::uint64_t const result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t const t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe under log().
    double uniform01_open_low() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_[4];
};

// Stream identity for one replicate of one run.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
};

// Derives the stream for (seed, replicate, level, cell).  Documented mixing:
// three chained SplitMix64 rounds over the tuple, each component offset so
// that zero values still separate domains.
inline RngStream cell_stream(StreamKey const& key, std::uint32_t level, std::uint64_t cell) {
    std::uint64_t s = key.master_seed;
    std::uint64_t h = detail::splitmix64(s);
    s = h ^ (key.replicate + 0x9e3779b97f4a7c15ull);
    h = detail::splitmix64(s);
    s = h ^ ((static_cast<std::uint64_t>(level) << 40) + cell + 0x6a09e667f3bcc909ull);
    h = detail::splitmix64(s);
    return RngStream(h);
}

// Standard normal via Box-Muller (fixed two-uniform consumption).
inline double sample_normal(RngStream& rng) {
    double const u1 = rng.uniform01_open_low();
    double const u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Poisson via Knuth's product method; constructor-side checks keep the mean
// small enough that exp(-mean) stays normal.
inline unsigned sample_poisson(RngStream& rng, double mean) {
    double const threshold = std::exp(-mean);
    unsigned k = 0;
    double p = rng.uniform01();
    while (p > threshold) {
        p *= rng.uniform01();
        ++k;
    }
    return k;
}

// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted through the
// Gamma(shape + 1) * U^(1/shape) identity.
inline double sample_gamma(RngStream& rng, double shape) {
    if (shape < 1.0) {
        double const u = rng.uniform01_open_low();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double const d = shape - 1.0 / 3.0;
    double const c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = sample_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double const u = rng.uniform01_open_low();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
            return d * v;
    }
}

} // namespace cascadelab
