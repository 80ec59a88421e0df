#pragma once

// Counter-based seeded RNG (splitmix64) with derived per-trial streams, and
// circular complex Gaussian variates via Box-Muller. Pure 64-bit integer
// state, so sequences are identical across platforms and thread counts.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace impest {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

    // Independent stream for (master_seed, a, b), e.g. (seed, snr_index, trial_index).
    static Rng stream(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b) {
        std::uint64_t s = mix(master_seed + kGamma);
        s = mix(s ^ (a + kGamma));
        s = mix(s ^ (b + kGamma));
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // CN(0, 1): unit total variance, 1/2 per real component.
    std::complex<double> complex_gaussian() {
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-std::log1p(-u));  // -ln(1-u), 1-u in (0, 1]
        const double phi = 2.0 * std::numbers::pi * v;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace impest
