#pragma once

#include <cstdint>

#include "iqbound/types.hpp"

namespace iqb {

/// Deterministic pseudo-random stream (SplitMix64 core, Box-Muller normals).
///
/// The generator is self-contained so that results are bit-identical across
/// platforms and standard-library versions. Independent substreams are derived
/// from a master seed plus (index, purpose) labels; runs of a Monte Carlo
/// experiment therefore draw from non-overlapping streams regardless of the
/// order or thread in which they execute.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    static RandomStream substream(std::uint64_t master_seed, std::uint64_t index,
                                  std::uint64_t purpose) {
        std::uint64_t s = mix(master_seed);
        s = mix(s ^ (0x9E3779B97F4A7C15ull * (index + 1)));
        s = mix(s ^ (0xC2B2AE3D27D4EB4Full * (purpose + 1)));
        return RandomStream(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound must be nonzero.
    std::uint64_t uniform_int(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Standard normal variate.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = sigma_sq.
    cplx circular_gaussian(double sigma_sq) {
        double s = std::sqrt(sigma_sq / 2.0);
        double re = gaussian();
        double im = gaussian();
        return {s * re, s * im};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Substream purpose labels used by the Monte Carlo driver. Fixed values keep
/// draws for one purpose unchanged when another parameter of the run varies.
namespace stream_purpose {
inline constexpr std::uint64_t channel = 1;
inline constexpr std::uint64_t imbalance = 2;
inline constexpr std::uint64_t data = 3;
inline constexpr std::uint64_t noise_pre = 4;
inline constexpr std::uint64_t noise_post = 5;
} // namespace stream_purpose

} // namespace iqb
