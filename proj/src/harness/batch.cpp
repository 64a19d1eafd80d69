#include "shortgp/harness/batch.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/random.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

namespace shortgp::harness {

namespace {

constexpr double kTieTolerance = 1e-10;

SeriesRecord fit_record(const TimeSeries& series, int n, int replicate, int scenario_index,
                        const Scenario& scenario, const KernelFamily& family, std::uint64_t seed,
                        int restarts, const Thresholds& thresholds) {
    SeriesRecord rec;
    rec.series_id = series.id;
    rec.n = n;
    rec.replicate = replicate;
    rec.scenario = scenario_index;
    rec.scenario_label = scenario.label;
    try {
        FitOptions options;
        options.restarts = restarts;
        FitResult result = fit(series, family, scenario, seed, options);
        const Diagnostics diag =
            diagnose(result, result.bounds.sampling, thresholds.alpha, thresholds.overfit_noise);
        rec.length_scale = result.kernel.length_scale;
        rec.signal_variance = result.kernel.signal_variance;
        rec.noise_variance = result.noise_variance;
        rec.log_marginal_likelihood = result.log_marginal_likelihood;
        rec.length_scale_bound = diag.length_scale_bound;
        rec.length_scale_below_bound = diag.length_scale_below_bound;
        rec.tiny_noise = diag.tiny_noise;
        rec.converged = result.converged;
        rec.fit = std::move(result);
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

void score_record(SeriesRecord& rec, const TimeSeries& series, const std::vector<double>& times,
                  const std::vector<double>& truth) {
    if (rec.failed) return;
    try {
        const Posterior post =
            posterior_at(series, rec.fit->kernel, rec.fit->noise_model(series), times);
        rec.predictive_log_likelihood = predictive_log_likelihood(post, truth);
        rec.mse = mse(post, truth);
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
    }
}

// Index of the best scenario; lower index wins ties.
template <typename Better>
int winner(const std::vector<double>& metric, Better strictly_better) {
    int best = 0;
    for (int s = 1; s < static_cast<int>(metric.size()); ++s) {
        if (strictly_better(metric[static_cast<std::size_t>(s)], metric[static_cast<std::size_t>(best)])) {
            best = s;
        }
    }
    return best;
}

}  // namespace

const ReportCell& BatchReport::cell(int scenario, int n) const {
    for (const auto& c : cells) {
        if (c.scenario == scenario && c.n == n) return c;
    }
    throw DataError("report has no cell for scenario " + std::to_string(scenario) + ", n=" +
                    std::to_string(n));
}

BatchReport aggregate(const std::vector<SeriesRecord>& records,
                      const std::vector<std::string>& scenario_labels, std::vector<int> n_values,
                      const Thresholds& thresholds, bool has_metrics) {
    BatchReport report;
    report.scenario_labels = scenario_labels;
    report.n_values = std::move(n_values);
    report.thresholds = thresholds;
    report.has_metrics = has_metrics;
    const int scenarios = static_cast<int>(scenario_labels.size());

    struct Counts {
        int total = 0, failed = 0, ok = 0, over_l = 0, over_noise = 0, low_ll = 0, high_mse = 0;
        int win_ll = 0, win_mse = 0;
    };
    std::map<std::pair<int, int>, Counts> counts;  // (scenario, n)
    // replicate key (n, series id) -> per-scenario record
    std::map<std::pair<int, std::string>, std::vector<const SeriesRecord*>> replicates;

    for (const auto& r : records) {
        if (r.scenario < 0 || r.scenario >= scenarios) {
            throw DataError("record for series '" + r.series_id + "' has unknown scenario index");
        }
        Counts& c = counts[{r.scenario, r.n}];
        ++c.total;
        if (r.failed) {
            ++c.failed;
        } else {
            ++c.ok;
            c.over_l += r.length_scale_below_bound ? 1 : 0;
            c.over_noise += r.tiny_noise ? 1 : 0;
            if (has_metrics) {
                c.low_ll += r.predictive_log_likelihood.value_or(0.0) < thresholds.low_loglik ? 1 : 0;
                c.high_mse += r.mse.value_or(0.0) > thresholds.high_mse ? 1 : 0;
            }
        }
        auto& slot = replicates[{r.n, r.series_id}];
        slot.resize(static_cast<std::size_t>(scenarios), nullptr);
        slot[static_cast<std::size_t>(r.scenario)] = &r;
    }

    std::map<int, int> compared;
    if (has_metrics) {
        for (const auto& [key, slot] : replicates) {
            const bool complete = std::all_of(slot.begin(), slot.end(), [](const SeriesRecord* r) {
                return r && !r->failed && r->predictive_log_likelihood && r->mse;
            });
            if (!complete) continue;
            std::vector<double> ll, err;
            for (const auto* r : slot) {
                ll.push_back(*r->predictive_log_likelihood);
                err.push_back(*r->mse);
            }
            const int n = key.first;
            ++compared[n];
            ++counts[{winner(ll, [](double a, double b) { return a > b + kTieTolerance; }), n}].win_ll;
            ++counts[{winner(err, [](double a, double b) { return a < b - kTieTolerance; }), n}].win_mse;
        }
    }

    auto fraction = [](int k, int d) { return d > 0 ? static_cast<double>(k) / d : 0.0; };
    for (int s = 0; s < scenarios; ++s) {
        for (int n : report.n_values) {
            const Counts c = counts.count({s, n}) ? counts.at({s, n}) : Counts{};
            ReportCell cell;
            cell.scenario = s;
            cell.n = n;
            cell.total = c.total;
            cell.failed = c.failed;
            cell.overfit_length_scale = fraction(c.over_l, c.ok);
            cell.overfit_noise = fraction(c.over_noise, c.ok);
            if (has_metrics) {
                const int cmp = compared.count(n) ? compared.at(n) : 0;
                cell.low_loglik = fraction(c.low_ll, c.ok);
                cell.high_mse = fraction(c.high_mse, c.ok);
                cell.win_loglik = fraction(c.win_ll, cmp);
                cell.win_mse = fraction(c.win_mse, cmp);
                cell.compared = cmp;
            }
            report.cells.push_back(cell);
        }
    }
    return report;
}

void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
    }
}

BatchOutput run_synthetic_experiment(const SyntheticConfig& config, const std::vector<int>& n_grid,
                                     const KernelFamily& family, const ExperimentOptions& options) {
    config.validate();
    const std::vector<Scenario> scenarios =
        options.scenarios.empty() ? synthetic_scenarios(options.thresholds.alpha) : options.scenarios;
    for (const auto& s : scenarios) s.validate();
    const auto n_scenarios = scenarios.size();
    const auto replicates = static_cast<std::size_t>(config.replicates);

    const std::vector<double> times = test_times(config);
    const std::vector<double> truth = test_truth(config);

    std::vector<SeriesRecord> records(n_grid.size() * replicates * n_scenarios);
    parallel_for(n_grid.size() * replicates, options.parallelism, [&](std::size_t task) {
        const std::size_t n_index = task / replicates;
        const int replicate = static_cast<int>(task % replicates);
        SyntheticConfig local = config;
        local.n_points = n_grid[n_index];
        const TimeSeries series = generate_sinc_series(local, replicate);
        const std::uint64_t seed = random::key({config.seed, static_cast<std::uint64_t>(local.n_points),
                                                static_cast<std::uint64_t>(replicate), 0xf17});
        for (std::size_t s = 0; s < n_scenarios; ++s) {
            SeriesRecord rec = fit_record(series, local.n_points, replicate, static_cast<int>(s),
                                          scenarios[s], family, seed, options.restarts, options.thresholds);
            score_record(rec, series, times, truth);
            records[task * n_scenarios + s] = std::move(rec);
        }
    });

    std::vector<std::string> labels;
    for (const auto& s : scenarios) labels.push_back(s.label);
    BatchOutput out;
    out.report = aggregate(records, labels, n_grid, options.thresholds, true);
    out.records = std::move(records);
    return out;
}

std::uint64_t series_seed(std::uint64_t base_seed, const std::string& id) {
    return random::key({base_seed, random::hash_string(id)});
}

BatchOutput run_batch(const std::vector<TimeSeries>& series_set, const std::vector<Scenario>& scenarios,
                      const KernelFamily& family, const BatchOptions& options) {
    if (series_set.empty()) throw DataError("run_batch needs at least one series");
    if (scenarios.empty()) throw InvalidScenario("run_batch needs at least one scenario");
    for (const auto& s : scenarios) s.validate();
    const auto n_scenarios = scenarios.size();

    std::vector<SeriesRecord> records(series_set.size() * n_scenarios);
    parallel_for(series_set.size(), options.parallelism, [&](std::size_t i) {
        const TimeSeries& series = series_set[i];
        const std::uint64_t seed = series_seed(options.seed, series.id);
        for (std::size_t s = 0; s < n_scenarios; ++s) {
            records[i * n_scenarios + s] =
                fit_record(series, static_cast<int>(series.size()), -1, static_cast<int>(s), scenarios[s],
                           family, seed, options.restarts, options.thresholds);
        }
    });

    std::vector<int> n_values;
    for (const auto& s : series_set) n_values.push_back(static_cast<int>(s.size()));
    std::sort(n_values.begin(), n_values.end());
    n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());

    std::vector<std::string> labels;
    for (const auto& s : scenarios) labels.push_back(s.label);
    BatchOutput out;
    out.report = aggregate(records, labels, n_values, options.thresholds, false);
    out.records = std::move(records);
    return out;
}

}  // namespace shortgp::harness
