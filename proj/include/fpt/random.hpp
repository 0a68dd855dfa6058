#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#include <boost/random/normal_distribution.hpp>

namespace fpt {

/// 64-bit finalizer (splitmix64). Used only to derive engine seeds from
/// (seed, stream tag, path index) triples.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag,
                                       std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(tag ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

/// xoshiro256++ (Blackman and Vigna). 256 bits of state, seeded by running
/// splitmix64 from a single word, so a fresh substream costs four mixes.
class xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit xoshiro256pp(std::uint64_t seed = 0) noexcept { this->seed(seed); }

    void seed(std::uint64_t seed) noexcept {
        for (auto& w : s_) {
            w = mix64(seed);
            seed += 0x9e3779b97f4a7c15ULL;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t out = std::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return out;
    }

private:
    std::uint64_t s_[4]{};
};

/// Random source handed to samplers. Every Monte Carlo path gets its own
/// substream (reseed per path), so results do not depend on how paths are
/// scheduled and runs at neighbouring parameters share random numbers.
class rng_stream {
public:
    using engine_type = xoshiro256pp;

    explicit rng_stream(std::uint64_t seed = 0) : engine_(seed) {}
    rng_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
        : engine_(substream_seed(seed, tag, index)) {}

    void reseed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
        engine_.seed(substream_seed(seed, tag, index));
    }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(engine_); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    engine_type& engine() noexcept { return engine_; }

private:
    engine_type engine_;
    // Ziggurat; stateless between calls, so reseeding fully determines draws.
    boost::random::normal_distribution<double> normal_{};
};

}  // namespace fpt
