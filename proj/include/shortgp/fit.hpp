#pragma once

// Bounded maximum-likelihood estimation of (sigma_f^2, ell, sigma_n^2).

#include "shortgp/bound.hpp"
#include "shortgp/gp.hpp"
#include "shortgp/kernels.hpp"
#include "shortgp/optimize.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shortgp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class LowerRule { None, Nyquist, Value };
enum class UpperRule { None, Span, Value };
enum class NoiseRule { Unconstrained, Bounded, Fixed };

/// A constraint configuration, independent of any particular series. The
/// Nyquist lower bound and the span upper bound are resolved per series.
struct Scenario {
    std::string label;
    LowerRule length_lower = LowerRule::None;
    double length_lower_value = 0.0;
    UpperRule length_upper = UpperRule::None;
    double length_upper_value = kInfinity;
    NoiseRule noise = NoiseRule::Unconstrained;
    double noise_lo = 0.0;
    double noise_hi = kInfinity;
    double alpha = kDefaultAlpha;
    GapMode gap_mode = GapMode::Minimum;

    /// Throws InvalidScenario for empty or malformed intervals.
    void validate() const;
};

/// Concrete boxes for one series. Length bounds in time units, noise bounds
/// in squared data units; an absent bound is 0 / +inf.
struct ResolvedBounds {
    double length_lower = 0.0;
    double length_upper = kInfinity;
    double noise_lower = 0.0;
    double noise_upper = kInfinity;
    bool noise_fixed = false;
    double nyquist_bound = 0.0;  // a_ell for this series, whether or not enforced
    SamplingInfo sampling;
};

ResolvedBounds resolve_bounds(const Scenario& scenario, const TimeSeries& series,
                              const KernelFamily& family);

inline constexpr double kSyntheticNoiseLower = 0.01;
inline constexpr double kSyntheticNoiseUpper = 0.1;

/// The four synthetic-study configurations: no bounds, ell >= a_ell,
/// sigma_n^2 in [lo, hi], and both.
std::vector<Scenario> synthetic_scenarios(double alpha = kDefaultAlpha,
                                          double noise_lo = kSyntheticNoiseLower,
                                          double noise_hi = kSyntheticNoiseUpper);

/// The expression-data variant: fixed per-point noise replaces the noise box.
std::vector<Scenario> expression_scenarios(double alpha = kDefaultAlpha);

struct ResolvedScenario {
    Scenario scenario;
    ResolvedBounds bounds;
};

/// synthetic_scenarios() resolved against `series`.
std::vector<ResolvedScenario> make_scenarios(const TimeSeries& series, const KernelFamily& family,
                                             double alpha = kDefaultAlpha);

/// Scenario <-> flat key/value pairs under `prefix` (e.g. "scenario.2.").
std::map<std::string, std::string> scenario_to_config(const Scenario& scenario,
                                                      const std::string& prefix);
Scenario scenario_from_config(const std::map<std::string, std::string>& config,
                              const std::string& prefix);

struct ActiveBounds {
    bool length_lower = false;
    bool length_upper = false;
    bool noise_lower = false;
    bool noise_upper = false;
};

struct FitResult {
    KernelSpec kernel;
    std::optional<double> noise_variance;  // absent when the noise is fixed
    double log_marginal_likelihood = 0.0;
    ActiveBounds active;
    ResolvedBounds bounds;
    int restarts_used = 0;
    int failed_restarts = 0;
    int iterations = 0;  // of the winning restart
    bool converged = false;

    NoiseModel noise_model(const TimeSeries& series) const;
};

struct FitOptions {
    int restarts = 5;
    OptimizerOptions optimizer;
};

/// Multi-start bounded ML fit. Deterministic in (series, family, scenario,
/// seed, options). Throws InvalidScenario, DataError, or FitFailed when every
/// restart fails.
FitResult fit(const TimeSeries& series, const KernelFamily& family, const Scenario& scenario,
              std::uint64_t seed, const FitOptions& options = {});

inline constexpr double kSyntheticNoiseThreshold = 1e-4;
inline constexpr double kExpressionNoiseThreshold = 1e-2;

struct Diagnostics {
    bool length_scale_below_bound = false;
    bool tiny_noise = false;
    double length_scale_bound = 0.0;  // a_ell used for the check
    double noise_threshold = 0.0;
    double alpha = 0.0;
};

/// Over-fit symptoms: ell < a_ell(alpha) for the sampling, or an estimated
/// noise variance below `noise_threshold`. Fixed noise never flags.
Diagnostics diagnose(const FitResult& result, const SamplingInfo& sampling,
                     double alpha = kDefaultAlpha,
                     double noise_threshold = kSyntheticNoiseThreshold);

/// Log marginal likelihood maximized over sigma_f^2 for fixed (ell, sigma_n^2).
struct ProfilePoint {
    double signal_variance = 0.0;
    double log_marginal_likelihood = 0.0;
};

ProfilePoint profile_signal_variance(const TimeSeries& series, const KernelFamily& family,
                                     double length_scale, double noise_variance);

/// Profile likelihood on a grid; entry [i][j] is for (length_scales[i], noise_variances[j]).
std::vector<std::vector<ProfilePoint>> likelihood_surface(const TimeSeries& series,
                                                          const KernelFamily& family,
                                                          const std::vector<double>& length_scales,
                                                          const std::vector<double>& noise_variances);

}  // namespace shortgp
