#pragma once

#include <cstdint>

#include "tpslab/types.hpp"

namespace tpslab::rng {

// Counter-based pseudorandom stream. Output i of stream (seed, stream_id) is
//
//   x_i = finalize(state_0 + (i + 1) * 0x9E3779B97F4A7C15)
//   state_0 = finalize(seed ^ (0xA3EC647659359ACD * (stream_id + 1)))
//
// with finalize() the splitmix64 output function. Distinct stream_ids give
// independent sequences from one scenario seed, and a sequence can be
// regenerated from (seed, stream_id) alone.
inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream ids used across the project.
inline constexpr std::uint64_t kStreamGue = 1;
inline constexpr std::uint64_t kStreamStates = 2;
inline constexpr std::uint64_t kStreamBathSamples = 3;
inline constexpr std::uint64_t kStreamPhases = 4;
inline constexpr std::uint64_t kStreamTests = 99;

class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : state_(splitmix64_finalize(seed ^ (0xA3EC647659359ACDULL * (stream_id + 1)))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_finalize(state_);
    }

    // Uniform double in (0, 1].
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch; two uniforms per draw).
    double next_normal();

    // Complex with independent standard-normal real and imaginary parts.
    cx next_cnormal() {
        const double re = next_normal();
        const double im = next_normal();
        return {re, im};
    }

  private:
    std::uint64_t state_;
};

// Haar-distributed unit vector in C^dim.
CVec haar_unit_vector(int dim, Stream& stream);

} // namespace tpslab::rng
