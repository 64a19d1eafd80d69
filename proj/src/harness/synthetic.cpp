#include "shortgp/harness/synthetic.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/random.hpp"

#include <cmath>
#include <string>

namespace shortgp::harness {

void SyntheticConfig::validate() const {
    if (n_points < 2) throw ConfigError("n_points must be at least 2");
    if (!(interval_lo < interval_hi)) throw ConfigError("interval_lo must be below interval_hi");
    if (!(noise_variance >= 0.0)) throw ConfigError("noise_variance must be non-negative");
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (test_count < 1) throw ConfigError("test_count must be at least 1");
    if (test_count > 1 && !(test_lo < test_hi)) throw ConfigError("test_lo must be below test_hi");
}

double sinc(double t) {
    if (std::abs(t) < 1e-4) {
        const double t2 = t * t;
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    }
    return std::sin(t) / t;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] =
            i == count - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

TimeSeries generate_sinc_series(const SyntheticConfig& config, int replicate) {
    config.validate();
    TimeSeries series;
    series.id = "sinc-n" + std::to_string(config.n_points) + "-r" + std::to_string(replicate);
    series.times = linspace(config.interval_lo, config.interval_hi, config.n_points);
    series.values.reserve(series.times.size());
    const double sd = std::sqrt(config.noise_variance);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        const std::uint64_t k = random::key({config.seed, static_cast<std::uint64_t>(config.n_points),
                                             static_cast<std::uint64_t>(replicate), i});
        const double noise = sd == 0.0 ? 0.0 : sd * random::normal(k);
        series.values.push_back(sinc(series.times[i]) + noise);
    }
    return series;
}

std::vector<double> test_times(const SyntheticConfig& config) {
    return linspace(config.test_lo, config.test_hi, config.test_count);
}

std::vector<double> test_truth(const SyntheticConfig& config) {
    std::vector<double> truth;
    for (double t : test_times(config)) truth.push_back(sinc(t));
    return truth;
}

}  // namespace shortgp::harness
