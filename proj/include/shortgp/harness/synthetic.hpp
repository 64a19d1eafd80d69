#pragma once

#include "shortgp/gp.hpp"

#include <cstdint>
#include <vector>

namespace shortgp::harness {

/// Noisy samples of sinc(t) = sin(t)/t on an equally spaced grid, scored on a
/// separate equally spaced test grid against the noiseless function.
struct SyntheticConfig {
    int n_points = 7;
    double interval_lo = -5.0;
    double interval_hi = 6.0;
    double noise_variance = 0.09;
    int replicates = 1000;
    double test_lo = -6.0;
    double test_hi = 5.0;
    int test_count = 10;
    std::uint64_t seed = 1;

    /// Throws ConfigError on an empty interval, non-positive counts or negative noise.
    void validate() const;
};

double sinc(double t);

/// `count` equally spaced points on [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, int count);

/// Replicate `replicate` of the configured data set. Noise for point i is keyed
/// by (seed, n_points, replicate, i), so any replicate regenerates alone.
TimeSeries generate_sinc_series(const SyntheticConfig& config, int replicate);

std::vector<double> test_times(const SyntheticConfig& config);
std::vector<double> test_truth(const SyntheticConfig& config);

}  // namespace shortgp::harness
