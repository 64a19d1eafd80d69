#pragma once

// Many independent fits, aggregated into per-(scenario, n) statistics.

#include "shortgp/fit.hpp"
#include "shortgp/gp.hpp"
#include "shortgp/harness/synthetic.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shortgp::harness {

struct Thresholds {
    double alpha = kDefaultAlpha;
    double overfit_noise = kSyntheticNoiseThreshold;  // sigma_n^2 below this is over-fitted
    double low_loglik = -20.0;                         // predictive log-likelihood below this is poor
    double high_mse = 0.1;                             // MSE above this is poor
};

/// One (series, scenario) fit as it appears in the per-series results file.
struct SeriesRecord {
    std::string series_id;
    int n = 0;
    int replicate = -1;  // -1 for ingested data
    int scenario = 0;
    std::string scenario_label;
    bool failed = false;
    std::string error;

    double length_scale = 0.0;
    double signal_variance = 0.0;
    std::optional<double> noise_variance;  // absent for fixed noise or failures
    double log_marginal_likelihood = 0.0;
    double length_scale_bound = 0.0;
    bool length_scale_below_bound = false;
    bool tiny_noise = false;
    bool converged = false;
    std::optional<double> predictive_log_likelihood;
    std::optional<double> mse;

    std::optional<FitResult> fit;  // populated in memory only
};

struct ReportCell {
    int scenario = 0;
    int n = 0;
    int total = 0;   // fits attempted
    int failed = 0;  // fits that threw
    double overfit_length_scale = 0.0;  // fractions over successful fits
    double overfit_noise = 0.0;
    std::optional<double> low_loglik;
    std::optional<double> high_mse;
    std::optional<double> win_loglik;  // fractions over fully successful replicates
    std::optional<double> win_mse;
    int compared = 0;  // replicates entering the win counts
};

struct BatchReport {
    std::vector<std::string> scenario_labels;
    std::vector<int> n_values;
    std::vector<ReportCell> cells;  // scenario-major
    Thresholds thresholds;
    bool has_metrics = false;

    const ReportCell& cell(int scenario, int n) const;
};

struct BatchOutput {
    BatchReport report;
    std::vector<SeriesRecord> records;
};

/// Aggregates records into a report. Win counts compare the scenarios on each
/// replicate (records sharing series_id and n); a replicate with any failed
/// scenario is left out of the win counts. Ties within 1e-10 go to the
/// lowest-numbered scenario.
BatchReport aggregate(const std::vector<SeriesRecord>& records,
                      const std::vector<std::string>& scenario_labels, std::vector<int> n_values,
                      const Thresholds& thresholds, bool has_metrics);

struct ExperimentOptions {
    int restarts = 5;
    int parallelism = 1;
    Thresholds thresholds;
    std::vector<Scenario> scenarios;  // empty: the four synthetic scenarios
};

/// Fits every replicate for every n under every scenario. The same generated
/// series is shared by all scenarios of a replicate. Fit failures are counted,
/// never fatal. Output is independent of `parallelism`.
BatchOutput run_synthetic_experiment(const SyntheticConfig& config, const std::vector<int>& n_grid,
                                     const KernelFamily& family, const ExperimentOptions& options = {});

struct BatchOptions {
    int restarts = 5;
    int parallelism = 1;
    std::uint64_t seed = 1;
    Thresholds thresholds;
};

/// Seed used for a series in run_batch: depends on the id, not the position.
std::uint64_t series_seed(std::uint64_t base_seed, const std::string& id);

/// Fits each series under each scenario; n groups are series lengths. Each
/// series is diagnosed against its own a_ell.
BatchOutput run_batch(const std::vector<TimeSeries>& series_set, const std::vector<Scenario>& scenarios,
                      const KernelFamily& family, const BatchOptions& options = {});

/// Runs task(0..count-1) on up to `parallelism` threads. Tasks must not throw.
void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& task);

}  // namespace shortgp::harness
