// Command-line front end. Exit codes: 0 success, 1 usage or configuration
// error, 2 data error, 3 numerical failure that left no usable result.

#include "shortgp/bound.hpp"
#include "shortgp/errors.hpp"
#include "shortgp/fit.hpp"
#include "shortgp/harness/batch.hpp"
#include "shortgp/harness/config.hpp"
#include "shortgp/harness/csv.hpp"
#include "shortgp/harness/report.hpp"
#include "shortgp/harness/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using namespace shortgp;
using namespace shortgp::harness;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Raised when every unit of work failed numerically.
struct AllFailed : Error {
    using Error::Error;
};

// A flag that overrides the config key of the same name ('-' for '_').
struct Override {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
};

class ConfigFlags {
public:
    void add(CLI::App* app, const std::string& key, const std::string& help) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        auto& o = overrides_.emplace_back(Override{key, {}, nullptr});
        o.option = app->add_option(flag, o.value, help);
    }

    void add_common(CLI::App* app) {
        app->add_option("--config", config_path_, "key = value configuration file; flags override it");
        add(app, "family", "kernel: se | matern12 | matern32 | matern52 | matern:<nu>");
        add(app, "alpha", "Nyquist energy fraction for the length-scale bound");
        add(app, "restarts", "optimizer restarts per fit");
        add(app, "parallelism", "worker threads");
        add(app, "seed", "base random seed");
        add(app, "noise_lo", "lower end of the noise-variance box");
        add(app, "noise_hi", "upper end of the noise-variance box");
        add(app, "overfit_noise_threshold", "noise variance below this counts as over-fitted");
        add(app, "center", "true | false: subtract each series' mean before fitting");
    }

    void add_metrics(CLI::App* app) {
        add(app, "low_loglik_threshold", "predictive log-likelihood below this is poor");
        add(app, "high_mse_threshold", "MSE above this is poor");
    }

    void add_synthetic(CLI::App* app) {
        add(app, "n_grid", "comma list of series lengths, e.g. 5,7,9");
        add(app, "replicates", "replicates per length");
        add(app, "interval_lo", "first sampling time");
        add(app, "interval_hi", "last sampling time");
        add(app, "noise_variance", "variance of the added Gaussian noise");
        add(app, "test_lo", "first test time");
        add(app, "test_hi", "last test time");
        add(app, "test_count", "number of test points");
    }

    HarnessConfig resolve() const {
        ConfigMap values;
        if (!config_path_.empty()) values = load_config(config_path_);
        for (const auto& o : overrides_) {
            if (o.option->count() > 0) values[o.key] = o.value;
        }
        return apply_config(HarnessConfig{}, values);
    }

private:
    std::string config_path_;
    std::deque<Override> overrides_;  // CLI11 holds references into the elements
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (text.empty()) return out;
    for (const auto& field : split_csv_line(text)) {
        double v = 0.0;
        if (!parse_double(field, v)) throw ConfigError("cannot parse '" + field + "' in " + what);
        out.push_back(v);
    }
    return out;
}

struct SeriesInput {
    std::string path;
    std::string layout = "auto";
    std::string id;
    std::string times;
    std::string values;
    std::string variances;

    void add(CLI::App* app, bool single) {
        app->add_option("--input", path, "series CSV (long: id,time,value[,variance]; wide: id,<t1>,<t2>,...)");
        app->add_option("--layout", layout, "auto | long | wide")->check(CLI::IsMember({"auto", "long", "wide"}));
        if (single) {
            app->add_option("--id", id, "series to use when the CSV holds several");
            app->add_option("--times", times, "comma list of times (instead of --input)");
            app->add_option("--values", values, "comma list of values");
            app->add_option("--variances", variances, "comma list of known noise variances");
        }
    }

    std::vector<TimeSeries> load_all() const {
        if (path.empty()) throw ConfigError("--input is required");
        CsvOptions options;
        options.layout = layout == "long" ? CsvLayout::Long : layout == "wide" ? CsvLayout::Wide : CsvLayout::Auto;
        return ingest_csv(path, options);
    }

    TimeSeries load_one() const {
        if (path.empty()) {
            if (times.empty()) throw ConfigError("give --input or --times/--values");
            TimeSeries s;
            s.id = id.empty() ? "series" : id;
            s.times = parse_list(times, "--times");
            s.values = parse_list(values, "--values");
            if (!variances.empty()) s.noise_variances = parse_list(variances, "--variances");
            s.validate();
            return s;
        }
        auto all = load_all();
        if (id.empty()) {
            if (all.size() != 1) throw ConfigError("the CSV holds " + std::to_string(all.size()) + " series; pick one with --id");
            return all.front();
        }
        for (auto& s : all) {
            if (s.id == id) return s;
        }
        throw DataError("no series with id '" + id + "' in " + path);
    }
};

std::vector<Scenario> pick_scenarios(const HarnessConfig& config, const std::string& set) {
    if (!config.scenarios.empty()) return config.scenarios;
    if (set == "expression") return expression_scenarios(config.thresholds.alpha);
    return config.effective_scenarios();
}

json fit_json(const TimeSeries& series, const FitResult& r, const Diagnostics& d, const std::string& label) {
    json j;
    j["series_id"] = series.id;
    j["n"] = series.size();
    j["scenario"] = label;
    j["family"] = r.kernel.family.name();
    j["length_scale"] = r.kernel.length_scale;
    j["signal_variance"] = r.kernel.signal_variance;
    j["noise_variance"] = r.noise_variance ? json(*r.noise_variance) : json(nullptr);
    j["log_marginal_likelihood"] = r.log_marginal_likelihood;
    j["bounds"] = {{"length_lower", r.bounds.length_lower},
                   {"length_upper", std::isfinite(r.bounds.length_upper) ? json(r.bounds.length_upper) : json(nullptr)},
                   {"noise_lower", r.bounds.noise_lower},
                   {"noise_upper", std::isfinite(r.bounds.noise_upper) ? json(r.bounds.noise_upper) : json(nullptr)},
                   {"noise_fixed", r.bounds.noise_fixed}};
    j["active"] = {{"length_lower", r.active.length_lower},
                   {"length_upper", r.active.length_upper},
                   {"noise_lower", r.active.noise_lower},
                   {"noise_upper", r.active.noise_upper}};
    j["length_scale_bound"] = d.length_scale_bound;
    j["delta_t"] = r.bounds.sampling.delta_t;
    j["overfit_length_scale"] = d.length_scale_below_bound;
    j["overfit_noise"] = d.tiny_noise;
    j["converged"] = r.converged;
    j["restarts_used"] = r.restarts_used;
    j["failed_restarts"] = r.failed_restarts;
    return j;
}

Scenario scenario_at(const std::vector<Scenario>& scenarios, int index) {
    if (index < 1 || index > static_cast<int>(scenarios.size())) {
        throw ConfigError("--scenario must lie in 1.." + std::to_string(scenarios.size()));
    }
    return scenarios[static_cast<std::size_t>(index - 1)];
}

FitResult fit_one(const TimeSeries& series, const HarnessConfig& config, const Scenario& scenario) {
    FitOptions options;
    options.restarts = config.restarts;
    return fit(series, config.family, scenario, series_seed(config.synthetic.seed, series.id), options);
}

void write_summary(const BatchOutput& out, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto files = emit_report(out.report, dir);
    const auto results = (std::filesystem::path(dir) / "results.csv").string();
    write_records_csv(results, out.records);
    std::ifstream summary(std::filesystem::path(dir) / "summary.txt");
    std::cout << summary.rdbuf();
    std::cout << "wrote " << files.size() + 1 << " files to " << dir << "\n";
    const bool any_ok = std::any_of(out.records.begin(), out.records.end(), [](const SeriesRecord& r) { return !r.failed; });
    if (!any_ok) throw AllFailed("every fit failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Length-scale-bounded GP regression for short time series"};
    app.require_subcommand(1);

    // bound
    auto* bound_cmd = app.add_subcommand("bound", "print the Nyquist length-scale bound a_l");
    std::string bound_times, bound_family = "se", gap_mode = "minimum";
    double bound_dt = 0.0, bound_alpha = kDefaultAlpha;
    bound_cmd->add_option("--times", bound_times, "comma list of sampling times");
    bound_cmd->add_option("--dt", bound_dt, "sampling interval (instead of --times)");
    bound_cmd->add_option("--alpha", bound_alpha, "energy fraction in (0, 1)");
    bound_cmd->add_option("--family", bound_family, "kernel family");
    bound_cmd->add_option("--gap-mode", gap_mode, "minimum | median")->check(CLI::IsMember({"minimum", "median"}));

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit one series under one scenario");
    ConfigFlags fit_flags;
    fit_flags.add_common(fit_cmd);
    SeriesInput fit_input;
    fit_input.add(fit_cmd, true);
    int fit_scenario = 4;
    std::string fit_set = "synthetic";
    fit_cmd->add_option("--scenario", fit_scenario, "1-based index into the scenario set");
    fit_cmd->add_option("--scenario-set", fit_set, "synthetic | expression")->check(CLI::IsMember({"synthetic", "expression"}));

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "run the synthetic sinc experiment");
    ConfigFlags synth_flags;
    synth_flags.add_common(synth_cmd);
    synth_flags.add_metrics(synth_cmd);
    synth_flags.add_synthetic(synth_cmd);
    std::string synth_out = "synth_report";
    synth_cmd->add_option("--out", synth_out, "output directory");

    // batch
    auto* batch_cmd = app.add_subcommand("batch", "fit every series of a CSV under every scenario");
    ConfigFlags batch_flags;
    batch_flags.add_common(batch_cmd);
    SeriesInput batch_input;
    batch_input.add(batch_cmd, false);
    std::string batch_out = "batch_report", batch_set = "synthetic";
    batch_cmd->add_option("--out", batch_out, "output directory");
    batch_cmd->add_option("--scenario-set", batch_set, "synthetic | expression")->check(CLI::IsMember({"synthetic", "expression"}));

    // plotdata
    auto* plot_cmd = app.add_subcommand("plotdata", "fit one series and write posterior curves");
    ConfigFlags plot_flags;
    plot_flags.add_common(plot_cmd);
    SeriesInput plot_input;
    plot_input.add(plot_cmd, true);
    int plot_scenario = 4, grid_points = 200;
    std::string plot_set = "synthetic", plot_out;
    plot_cmd->add_option("--scenario", plot_scenario, "1-based index into the scenario set");
    plot_cmd->add_option("--scenario-set", plot_set, "synthetic | expression")->check(CLI::IsMember({"synthetic", "expression"}));
    plot_cmd->add_option("--grid", grid_points, "equally spaced evaluation points")->check(CLI::Range(2, 1000000));
    plot_cmd->add_option("--out", plot_out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*bound_cmd) {
            const auto family = parse_kernel_family(bound_family);
            json j;
            double dt = bound_dt;
            if (!bound_times.empty()) {
                const auto times = parse_list(bound_times, "--times");
                const auto info = delta_t_from_times(times, gap_mode == "median" ? GapMode::Median : GapMode::Minimum);
                dt = info.delta_t;
                j["uniform"] = info.uniform;
            } else if (!(dt > 0.0)) {
                throw ConfigError("give --times or a positive --dt");
            }
            j["family"] = family.name();
            j["alpha"] = bound_alpha;
            j["delta_t"] = dt;
            j["nyquist_frequency"] = 1.0 / (2.0 * dt);
            j["length_scale_bound"] = length_scale_bound(family, bound_alpha, dt);
            std::cout << j.dump(2) << "\n";
        } else if (*fit_cmd) {
            const auto config = fit_flags.resolve();
            auto series = fit_input.load_one();
            if (config.center) series = centered(series);
            const auto scenario = scenario_at(pick_scenarios(config, fit_set), fit_scenario);
            const auto r = fit_one(series, config, scenario);
            const auto d = diagnose(r, r.bounds.sampling, scenario.alpha, config.thresholds.overfit_noise);
            std::cout << fit_json(series, r, d, scenario.label).dump(2) << "\n";
        } else if (*synth_cmd) {
            const auto config = synth_flags.resolve();
            ExperimentOptions options;
            options.restarts = config.restarts;
            options.parallelism = config.parallelism;
            options.thresholds = config.thresholds;
            options.scenarios = config.effective_scenarios();
            write_summary(run_synthetic_experiment(config.synthetic, config.n_grid, config.family, options), synth_out);
        } else if (*batch_cmd) {
            const auto config = batch_flags.resolve();
            auto set = batch_input.load_all();
            if (config.center) {
                for (auto& s : set) s = centered(s);
            }
            BatchOptions options;
            options.restarts = config.restarts;
            options.parallelism = config.parallelism;
            options.seed = config.synthetic.seed;
            options.thresholds = config.thresholds;
            write_summary(run_batch(set, pick_scenarios(config, batch_set), config.family, options), batch_out);
        } else if (*plot_cmd) {
            const auto config = plot_flags.resolve();
            auto series = plot_input.load_one();
            if (config.center) series = centered(series);
            const auto scenario = scenario_at(pick_scenarios(config, plot_set), plot_scenario);
            const auto r = fit_one(series, config, scenario);
            if (plot_out.empty()) {
                write_plotdata_csv(std::cout, fit_plotdata(series, r.kernel, r.noise_model(series), grid_points));
            } else {
                emit_fit_plotdata(series, r, grid_points, plot_out);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidScenario& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const AllFailed& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
