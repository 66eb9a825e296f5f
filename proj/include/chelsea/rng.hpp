#pragma once

#include "chelsea/types.hpp"

#include <cstdint>
#include <random>

namespace chelsea {

// splitmix64; decorrelates seed/stream tuples before feeding mt19937_64.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Uniform/normal draws built on mt19937_64 with explicit arithmetic so that
// streams are bit-identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

    /// uniform in [0, 1)
    Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

    /// standard normal via Box-Muller
    Real normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        Real u = uniform();
        while (u <= 0.0) {
            u = uniform();
        }
        const Real v = uniform();
        const Real radius = std::sqrt(-2.0 * std::log(u));
        const Real angle = 2.0 * EIGEN_PI * v;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// uniform integer in [lo, hi]
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    Real spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace chelsea
