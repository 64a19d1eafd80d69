#include "shortgp/gp.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace shortgp {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356065947281123527;

Eigen::VectorXd as_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("test times and values differ in length");
}

}  // namespace

void TimeSeries::validate(bool require_increasing) const {
    if (values.size() != times.size()) {
        throw DataError("series '" + id + "': times and values differ in length");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
            throw DataError("series '" + id + "': non-finite entry at index " + std::to_string(i));
        }
        if (require_increasing && i > 0 && !(times[i] > times[i - 1])) {
            throw DataError("series '" + id + "': times not strictly increasing at index " +
                            std::to_string(i));
        }
    }
    if (noise_variances) {
        if (noise_variances->size() != times.size()) {
            throw DataError("series '" + id + "': noise variances differ in length");
        }
        for (double v : *noise_variances) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw DataError("series '" + id + "': noise variances must be finite and >= 0");
            }
        }
    }
}

TimeSeries centered(const TimeSeries& series) {
    TimeSeries out = series;
    if (out.values.empty()) return out;
    const double mean =
        std::accumulate(out.values.begin(), out.values.end(), 0.0) / static_cast<double>(out.size());
    for (double& v : out.values) v -= mean;
    return out;
}

double noise_variance_at(const NoiseModel& noise, const TimeSeries& series, double t) {
    if (const auto* estimated = std::get_if<EstimatedNoise>(&noise)) return estimated->variance;
    const auto& variances = std::get<FixedNoise>(noise).variances;
    if (variances.empty() || variances.size() != series.size()) {
        throw DataError("fixed noise variances do not match the series length");
    }
    // Interpolate over the training points in time order.
    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return series.times[a] < series.times[b]; });
    if (t <= series.times[order.front()]) return variances[order.front()];
    if (t >= series.times[order.back()]) return variances[order.back()];
    std::size_t j = 1;
    while (series.times[order[j]] < t) ++j;
    const std::size_t hi = order[j];
    const std::size_t lo = order[j - 1];
    if (series.times[hi] == t) return variances[hi];
    const double w = (t - series.times[lo]) / (series.times[hi] - series.times[lo]);
    return (1.0 - w) * variances[lo] + w * variances[hi];
}

ConditionedGp::ConditionedGp(TimeSeries series, KernelSpec kernel, NoiseModel noise)
    : series_(std::move(series)), kernel_(kernel), noise_(std::move(noise)) {
    series_.validate(false);
    if (series_.size() == 0) throw DataError("cannot condition a GP on an empty series");
    const Eigen::MatrixXd k = covariance_matrix(kernel_, series_.times, noise_);
    factor_ = factorize_with_jitter(k, kernel_.signal_variance);
    weights_ = factor_.solve(as_vector(series_.values));
}

double ConditionedGp::log_marginal_likelihood() const {
    const Eigen::VectorXd y = as_vector(series_.values);
    const double n = static_cast<double>(series_.size());
    return -0.5 * y.dot(weights_) - 0.5 * factor_.log_determinant() - 0.5 * n * kLog2Pi;
}

LikelihoodGradient ConditionedGp::log_marginal_likelihood_gradient() const {
    // dL/dtheta = 1/2 tr((a a' - K^{-1}) dK/dtheta), a = K^{-1} y.
    const Eigen::MatrixXd w = weights_ * weights_.transpose() - factor_.inverse();
    const auto n = static_cast<Eigen::Index>(series_.size());

    // The jitter scales with sigma_f^2, so it belongs to the sigma_f^2 derivative.
    Eigen::MatrixXd d_signal = cross_covariance(kernel_, series_.times, series_.times);
    d_signal.diagonal().array() += factor_.jitter;
    const Eigen::MatrixXd d_length =
        kernel_.length_scale * covariance_matrix_length_scale_derivative(kernel_, series_.times);

    LikelihoodGradient g;
    g.log_signal_variance = 0.5 * w.cwiseProduct(d_signal).sum();
    g.log_length_scale = 0.5 * w.cwiseProduct(d_length).sum();
    if (const auto* estimated = std::get_if<EstimatedNoise>(&noise_)) {
        g.log_noise_variance = 0.5 * estimated->variance * w.diagonal().head(n).sum();
    }
    return g;
}

Posterior ConditionedGp::predict(std::span<const double> query_times) const {
    const Eigen::MatrixXd k_star = cross_covariance(kernel_, series_.times, query_times);
    const Eigen::MatrixXd v = factor_.llt.matrixL().solve(k_star);

    Posterior post;
    post.times.assign(query_times.begin(), query_times.end());
    post.mean.resize(query_times.size());
    post.variance_latent.resize(query_times.size());
    post.variance_observed.resize(query_times.size());
    for (std::size_t i = 0; i < query_times.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        post.mean[i] = k_star.col(col).dot(weights_);
        const double latent =
            std::max(0.0, kernel_.signal_variance - v.col(col).squaredNorm());
        post.variance_latent[i] = latent;
        post.variance_observed[i] = latent + noise_variance_at(noise_, series_, query_times[i]);
    }
    return post;
}

double log_marginal_likelihood(const TimeSeries& series, const KernelSpec& kernel,
                               const NoiseModel& noise) {
    return ConditionedGp(series, kernel, noise).log_marginal_likelihood();
}

LikelihoodGradient log_marginal_likelihood_gradient(const TimeSeries& series,
                                                    const KernelSpec& kernel,
                                                    const NoiseModel& noise) {
    return ConditionedGp(series, kernel, noise).log_marginal_likelihood_gradient();
}

Posterior posterior_at(const TimeSeries& series, const KernelSpec& kernel, const NoiseModel& noise,
                       std::span<const double> query_times) {
    return ConditionedGp(series, kernel, noise).predict(query_times);
}

double predictive_log_likelihood(const Posterior& posterior, std::span<const double> test_values) {
    require_same_length(posterior.mean, test_values);
    double total = 0.0;
    for (std::size_t i = 0; i < test_values.size(); ++i) {
        const double var = std::max(posterior.variance_latent[i], kVarianceFloor);
        const double diff = test_values[i] - posterior.mean[i];
        total += -0.5 * (kLog2Pi + std::log(var)) - 0.5 * diff * diff / var;
    }
    return total;
}

double mse(const Posterior& posterior, std::span<const double> true_values) {
    require_same_length(posterior.mean, true_values);
    if (true_values.empty()) throw DataError("mse needs at least one test point");
    double total = 0.0;
    for (std::size_t i = 0; i < true_values.size(); ++i) {
        const double diff = posterior.mean[i] - true_values[i];
        total += diff * diff;
    }
    return total / static_cast<double>(true_values.size());
}

double predictive_log_likelihood(const TimeSeries& series, const KernelSpec& kernel,
                                 const NoiseModel& noise, std::span<const double> test_times,
                                 std::span<const double> test_values) {
    require_same_length(test_times, test_values);
    return predictive_log_likelihood(posterior_at(series, kernel, noise, test_times), test_values);
}

double mse(const TimeSeries& series, const KernelSpec& kernel, const NoiseModel& noise,
           std::span<const double> test_times, std::span<const double> true_values) {
    require_same_length(test_times, true_values);
    return mse(posterior_at(series, kernel, noise, test_times), true_values);
}

}  // namespace shortgp
