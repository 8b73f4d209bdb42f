#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mmlat {

// splitmix64 finalizer; used to derive independent seed streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1). Implemented directly on the engine output so the
// sequence is identical across standard libraries (uniform_real_distribution
// is implementation-defined).
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Box-Muller standard normal; pairs are drawn eagerly so consumption per call
// is a fixed number of engine steps.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : rng_(seed) {}
    explicit NormalStream(std::mt19937_64 rng) : rng_(rng) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_unit(rng_);
        double u2 = uniform_unit(rng_);
        while (u1 <= 0.0) u1 = uniform_unit(rng_);
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mmlat
