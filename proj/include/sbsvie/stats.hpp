#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "sbsvie/counter_rng.hpp"
#include "sbsvie/simd_kernels.hpp"

namespace sbsvie::stats {

inline double mean(const double* v, std::size_t n) {
    return kernels::active().sum(v, n) / static_cast<double>(n);
}

// sigma / sqrt(n)
inline double se_of_mean(const double* v, std::size_t n) {
    if (n < 2) return 0.0;
    const auto& K = kernels::active();
    const double mu = K.sum(v, n) / static_cast<double>(n);
    const double ss = K.sumsq(v, n) / static_cast<double>(n) - mu * mu;
    return std::sqrt(std::max(ss, 0.0) / static_cast<double>(n - 1));
}

// path-bootstrap standard error of the mean, fixed 200-resample convention
inline double bootstrap_se_mean(const double* v, std::size_t n, std::uint64_t seed,
                                int resamples = 200) {
    if (n < 2) return 0.0;
    double acc = 0.0, acc2 = 0.0;
    for (int b = 0; b < resamples; ++b) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const std::uint64_t u = rng::key(seed, static_cast<std::uint64_t>(b), r, 17);
            s += v[u % n];
        }
        const double mu = s / static_cast<double>(n);
        acc += mu;
        acc2 += mu * mu;
    }
    const double mu = acc / resamples;
    return std::sqrt(std::max(acc2 / resamples - mu * mu, 0.0));
}

} // namespace sbsvie::stats
