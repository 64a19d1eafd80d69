#pragma once

// Flat "key = value" configuration. '#' starts a comment; blank lines are
// ignored; a repeated key is an error. Recognized keys:
//
//   n_points, interval_lo, interval_hi, noise_variance, replicates,
//   test_lo, test_hi, test_count, seed           synthetic data
//   n_grid                                       comma list, e.g. 5,7,9
//   family                                       se | matern12 | matern32 | matern52
//   alpha, restarts, parallelism
//   noise_lo, noise_hi                           box of the noise-bounded scenarios
//   overfit_noise_threshold, low_loglik_threshold, high_mse_threshold
//   center                                       true | false: subtract each series' mean
//   scenarios                                    count of scenario.<i>.* blocks (1-based);
//                                                absent: the four default scenarios
//   scenario.<i>.label, .length_lower, .length_upper, .noise, .noise_lo,
//   .noise_hi, .alpha, .gap_mode                 see scenario_from_config

#include "shortgp/fit.hpp"
#include "shortgp/harness/batch.hpp"
#include "shortgp/harness/synthetic.hpp"
#include "shortgp/kernels.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace shortgp::harness {

using ConfigMap = std::map<std::string, std::string>;

/// Throws ConfigError with the line number for malformed lines or duplicates.
ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::string& path);

struct HarnessConfig {
    SyntheticConfig synthetic;
    std::vector<int> n_grid{5, 7, 9, 11, 13, 15};
    KernelFamily family = KernelFamily::squared_exponential();
    int restarts = 5;
    int parallelism = 1;
    double noise_lo = kSyntheticNoiseLower;
    double noise_hi = kSyntheticNoiseUpper;
    Thresholds thresholds;
    bool center = false;
    std::vector<Scenario> scenarios;  // empty: defaults for the command

    /// The configured scenarios, or the four synthetic ones built from
    /// alpha, noise_lo and noise_hi.
    std::vector<Scenario> effective_scenarios() const;
    void validate() const;
};

/// Overlays `values` onto `base`. Unknown keys throw ConfigError.
HarnessConfig apply_config(HarnessConfig base, const ConfigMap& values);

std::vector<int> parse_int_list(const std::string& text);

}  // namespace shortgp::harness
