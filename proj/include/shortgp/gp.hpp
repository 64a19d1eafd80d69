#pragma once

// Exact zero-mean GP regression on one-dimensional time series.

#include "shortgp/kernels.hpp"
#include "shortgp/linalg.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shortgp {

struct TimeSeries {
    std::string id;
    std::vector<double> times;   // strictly increasing for fitting
    std::vector<double> values;
    std::optional<std::vector<double>> noise_variances;  // known per-point variances

    std::size_t size() const { return times.size(); }
    /// Throws DataError if lengths differ, a value/variance is not finite or a
    /// variance is negative. With `require_increasing` times must also be
    /// strictly increasing; the regression core itself accepts any order.
    void validate(bool require_increasing = true) const;
};

/// Copy of `series` with the sample mean of the values subtracted. Not applied
/// by default; the model's mean function is zero.
TimeSeries centered(const TimeSeries& series);

/// Noise variance that the model assigns to an observation at time t. For an
/// estimated model this is the shared variance. For fixed per-point variances
/// it is the variance at a matching training time, otherwise linear
/// interpolation between neighbouring training times (end value outside).
double noise_variance_at(const NoiseModel& noise, const TimeSeries& series, double t);

struct Posterior {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> variance_latent;    // of f, excludes observation noise
    std::vector<double> variance_observed;  // variance_latent + noise
};

struct LikelihoodGradient {
    double log_signal_variance = 0.0;
    double log_length_scale = 0.0;
    std::optional<double> log_noise_variance;  // absent for fixed noise
};

/// A GP conditioned on a series: holds the factorized Gram matrix so repeated
/// predictions and likelihood queries do not refactorize.
class ConditionedGp {
public:
    /// Throws FactorizationError if the jitter policy cannot factorize K.
    ConditionedGp(TimeSeries series, KernelSpec kernel, NoiseModel noise);

    const TimeSeries& series() const { return series_; }
    const KernelSpec& kernel() const { return kernel_; }
    const NoiseModel& noise() const { return noise_; }
    double jitter() const { return factor_.jitter; }

    double log_marginal_likelihood() const;
    LikelihoodGradient log_marginal_likelihood_gradient() const;
    Posterior predict(std::span<const double> query_times) const;

private:
    TimeSeries series_;
    KernelSpec kernel_;
    NoiseModel noise_;
    JitteredCholesky factor_;
    Eigen::VectorXd weights_;  // K^{-1} y
};

/// -1/2 y' K^{-1} y - 1/2 log|K| - n/2 log(2 pi), K = Gram + noise diagonal.
double log_marginal_likelihood(const TimeSeries& series, const KernelSpec& kernel,
                               const NoiseModel& noise);

/// Gradient with respect to the log hyperparameters.
LikelihoodGradient log_marginal_likelihood_gradient(const TimeSeries& series,
                                                    const KernelSpec& kernel,
                                                    const NoiseModel& noise);

Posterior posterior_at(const TimeSeries& series, const KernelSpec& kernel, const NoiseModel& noise,
                       std::span<const double> query_times);

/// Floor applied to predictive variances before taking logs.
inline constexpr double kVarianceFloor = 1e-12;

/// Sum over test points of the Gaussian log-density of `test_values` under the
/// latent posterior at `test_times`.
double predictive_log_likelihood(const TimeSeries& series, const KernelSpec& kernel,
                                 const NoiseModel& noise, std::span<const double> test_times,
                                 std::span<const double> test_values);

/// Mean squared difference between the posterior mean and `true_values`.
double mse(const TimeSeries& series, const KernelSpec& kernel, const NoiseModel& noise,
           std::span<const double> test_times, std::span<const double> true_values);

/// Scoring helpers that take an already computed posterior.
double predictive_log_likelihood(const Posterior& posterior, std::span<const double> test_values);
double mse(const Posterior& posterior, std::span<const double> true_values);

}  // namespace shortgp
