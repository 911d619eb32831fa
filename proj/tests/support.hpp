#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "fdtwr/model.hpp"

namespace fdtwr::testing {

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

inline CVec random_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CVec v(n);
    for (auto& x : v) {
        x = cdouble(normal(rng), normal(rng));
    }
    return v;
}

inline CVec random_unit(std::mt19937_64& rng, Eigen::Index n) { return random_vector(rng, n).normalized(); }

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Default-config draw, seeded.
inline ChannelRealization channels(std::uint64_t seed, const SystemConfig& config = {}) {
    return sample_channels(config, seed);
}

} // namespace fdtwr::testing
