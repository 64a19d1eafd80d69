#include "shortgp/bound.hpp"
#include "shortgp/errors.hpp"
#include "shortgp/fit.hpp"
#include "shortgp/gp.hpp"
#include "shortgp/harness/batch.hpp"
#include "shortgp/harness/csv.hpp"
#include "shortgp/harness/report.hpp"
#include "shortgp/harness/synthetic.hpp"
#include "shortgp/kernels.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace shortgp;

namespace {

KernelFamily family_arg(const py::object& family) {
    if (py::isinstance<py::str>(family)) return parse_kernel_family(family.cast<std::string>());
    return family.cast<KernelFamily>();
}

TimeSeries make_series(std::vector<double> times, std::vector<double> values,
                       std::optional<std::vector<double>> noise_variances, std::string id) {
    TimeSeries s;
    s.id = std::move(id);
    s.times = std::move(times);
    s.values = std::move(values);
    s.noise_variances = std::move(noise_variances);
    s.validate();
    return s;
}

py::dict cell_dict(const harness::ReportCell& c) {
    py::dict d;
    d["scenario"] = c.scenario;
    d["n"] = c.n;
    d["total"] = c.total;
    d["failed"] = c.failed;
    d["overfit_length_scale"] = c.overfit_length_scale;
    d["overfit_noise"] = c.overfit_noise;
    d["low_loglik"] = c.low_loglik;
    d["high_mse"] = c.high_mse;
    d["win_loglik"] = c.win_loglik;
    d["win_mse"] = c.win_mse;
    d["compared"] = c.compared;
    return d;
}

py::dict record_dict(const harness::SeriesRecord& r) {
    py::dict d;
    d["series_id"] = r.series_id;
    d["n"] = r.n;
    d["replicate"] = r.replicate;
    d["scenario"] = r.scenario;
    d["scenario_label"] = r.scenario_label;
    d["failed"] = r.failed;
    d["error"] = r.error;
    d["length_scale"] = r.length_scale;
    d["signal_variance"] = r.signal_variance;
    d["noise_variance"] = r.noise_variance;
    d["log_marginal_likelihood"] = r.log_marginal_likelihood;
    d["length_scale_bound"] = r.length_scale_bound;
    d["overfit_length_scale"] = r.length_scale_below_bound;
    d["overfit_noise"] = r.tiny_noise;
    d["converged"] = r.converged;
    d["predictive_log_likelihood"] = r.predictive_log_likelihood;
    d["mse"] = r.mse;
    return d;
}

// Python-facing shape of a batch run: labels, n values, cells and records as plain dicts.
py::dict output_dict(const harness::BatchOutput& out) {
    py::dict d;
    d["scenario_labels"] = out.report.scenario_labels;
    d["n_values"] = out.report.n_values;
    py::list cells, records;
    for (const auto& c : out.report.cells) cells.append(cell_dict(c));
    for (const auto& r : out.records) records.append(record_dict(r));
    d["cells"] = cells;
    d["records"] = records;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian-process regression for short time series with a Nyquist length-scale bound";
    m.attr("__version__") = "0.1.0";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<InvalidScenario>(m, "InvalidScenario", base.ptr());
    py::register_exception<FitFailed>(m, "FitFailed", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<KernelFamily>(m, "KernelFamily")
        .def_static("squared_exponential", &KernelFamily::squared_exponential)
        .def_static("matern", &KernelFamily::matern, py::arg("nu"))
        .def_static("parse", &parse_kernel_family, py::arg("name"))
        .def_property_readonly("name", &KernelFamily::name)
        .def_property_readonly("nu", [](const KernelFamily& f) { return f.nu; })
        .def("__eq__", [](const KernelFamily& a, const KernelFamily& b) { return a == b; })
        .def("__repr__", [](const KernelFamily& f) { return "KernelFamily('" + f.name() + "')"; });

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init(&make_series), py::arg("times"), py::arg("values"), py::arg("noise_variances") = py::none(),
             py::arg("id") = "series")
        .def_readwrite("id", &TimeSeries::id)
        .def_readwrite("times", &TimeSeries::times)
        .def_readwrite("values", &TimeSeries::values)
        .def_readwrite("noise_variances", &TimeSeries::noise_variances)
        .def("__len__", &TimeSeries::size)
        .def("__repr__", [](const TimeSeries& s) { return "TimeSeries('" + s.id + "', n=" + std::to_string(s.size()) + ")"; });

    py::enum_<LowerRule>(m, "LowerRule").value("NONE", LowerRule::None).value("NYQUIST", LowerRule::Nyquist).value("VALUE", LowerRule::Value);
    py::enum_<UpperRule>(m, "UpperRule").value("NONE", UpperRule::None).value("SPAN", UpperRule::Span).value("VALUE", UpperRule::Value);
    py::enum_<NoiseRule>(m, "NoiseRule")
        .value("UNCONSTRAINED", NoiseRule::Unconstrained)
        .value("BOUNDED", NoiseRule::Bounded)
        .value("FIXED", NoiseRule::Fixed);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("label", &Scenario::label)
        .def_readwrite("length_lower", &Scenario::length_lower)
        .def_readwrite("length_lower_value", &Scenario::length_lower_value)
        .def_readwrite("length_upper", &Scenario::length_upper)
        .def_readwrite("length_upper_value", &Scenario::length_upper_value)
        .def_readwrite("noise", &Scenario::noise)
        .def_readwrite("noise_lo", &Scenario::noise_lo)
        .def_readwrite("noise_hi", &Scenario::noise_hi)
        .def_readwrite("alpha", &Scenario::alpha)
        .def("validate", &Scenario::validate)
        .def("__repr__", [](const Scenario& s) { return "Scenario('" + s.label + "')"; });

    m.def("synthetic_scenarios", &synthetic_scenarios, py::arg("alpha") = kDefaultAlpha,
          py::arg("noise_lo") = kSyntheticNoiseLower, py::arg("noise_hi") = kSyntheticNoiseUpper);
    m.def("expression_scenarios", &expression_scenarios, py::arg("alpha") = kDefaultAlpha);

    m.def(
        "length_scale_bound",
        [](const py::object& family, double alpha, double delta_t) { return length_scale_bound(family_arg(family), alpha, delta_t); },
        py::arg("family") = "se", py::arg("alpha") = kDefaultAlpha, py::arg("delta_t") = 1.0);
    m.def(
        "energy_fraction",
        [](const py::object& family, double length_scale, double delta_t) {
            return energy_fraction(family_arg(family), length_scale, delta_t);
        },
        py::arg("family"), py::arg("length_scale"), py::arg("delta_t") = 1.0);
    m.def(
        "sampling_interval", [](const std::vector<double>& times) { return delta_t_from_times(times).delta_t; },
        py::arg("times"));

    m.def(
        "log_marginal_likelihood",
        [](const TimeSeries& s, const py::object& family, double signal_variance, double length_scale,
           std::optional<double> noise_variance) {
            const KernelSpec k{family_arg(family), signal_variance, length_scale};
            if (noise_variance) return log_marginal_likelihood(s, k, EstimatedNoise{*noise_variance});
            if (!s.noise_variances) throw DataError("give noise_variance or a series with known variances");
            return log_marginal_likelihood(s, k, FixedNoise{*s.noise_variances});
        },
        py::arg("series"), py::arg("family"), py::arg("signal_variance"), py::arg("length_scale"),
        py::arg("noise_variance") = py::none());

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("family", [](const FitResult& r) { return r.kernel.family; })
        .def_property_readonly("length_scale", [](const FitResult& r) { return r.kernel.length_scale; })
        .def_property_readonly("signal_variance", [](const FitResult& r) { return r.kernel.signal_variance; })
        .def_readonly("noise_variance", &FitResult::noise_variance)
        .def_readonly("log_marginal_likelihood", &FitResult::log_marginal_likelihood)
        .def_property_readonly("length_scale_bound", [](const FitResult& r) { return r.bounds.nyquist_bound; })
        .def_property_readonly("length_bounds", [](const FitResult& r) { return py::make_tuple(r.bounds.length_lower, r.bounds.length_upper); })
        .def_property_readonly("noise_bounds", [](const FitResult& r) { return py::make_tuple(r.bounds.noise_lower, r.bounds.noise_upper); })
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("restarts_used", &FitResult::restarts_used)
        .def("__repr__", [](const FitResult& r) {
            return "FitResult(length_scale=" + std::to_string(r.kernel.length_scale) +
                   ", signal_variance=" + std::to_string(r.kernel.signal_variance) + ")";
        });

    m.def(
        "fit",
        [](const TimeSeries& s, const Scenario& scenario, const py::object& family, std::uint64_t seed, int restarts) {
            FitOptions options;
            options.restarts = restarts;
            py::gil_scoped_release release;
            return fit(s, family_arg(family), scenario, seed, options);
        },
        py::arg("series"), py::arg("scenario"), py::arg("family") = "se", py::arg("seed") = 1, py::arg("restarts") = 5);

    m.def(
        "predict",
        [](const TimeSeries& s, const FitResult& r, const std::vector<double>& times) {
            const auto p = posterior_at(s, r.kernel, r.noise_model(s), times);
            py::dict d;
            d["times"] = p.times;
            d["mean"] = p.mean;
            d["variance_latent"] = p.variance_latent;
            d["variance_observed"] = p.variance_observed;
            return d;
        },
        py::arg("series"), py::arg("fit"), py::arg("times"));

    m.def(
        "diagnose",
        [](const FitResult& r, double alpha, double noise_threshold) {
            const auto d = diagnose(r, r.bounds.sampling, alpha, noise_threshold);
            py::dict out;
            out["overfit_length_scale"] = d.length_scale_below_bound;
            out["overfit_noise"] = d.tiny_noise;
            out["length_scale_bound"] = d.length_scale_bound;
            return out;
        },
        py::arg("fit"), py::arg("alpha") = kDefaultAlpha,
        py::arg("noise_threshold") = kSyntheticNoiseThreshold);

    py::class_<harness::SyntheticConfig>(m, "SyntheticConfig")
        .def(py::init<>())
        .def_readwrite("n_points", &harness::SyntheticConfig::n_points)
        .def_readwrite("interval_lo", &harness::SyntheticConfig::interval_lo)
        .def_readwrite("interval_hi", &harness::SyntheticConfig::interval_hi)
        .def_readwrite("noise_variance", &harness::SyntheticConfig::noise_variance)
        .def_readwrite("replicates", &harness::SyntheticConfig::replicates)
        .def_readwrite("test_lo", &harness::SyntheticConfig::test_lo)
        .def_readwrite("test_hi", &harness::SyntheticConfig::test_hi)
        .def_readwrite("test_count", &harness::SyntheticConfig::test_count)
        .def_readwrite("seed", &harness::SyntheticConfig::seed);

    m.def("generate_sinc_series", &harness::generate_sinc_series, py::arg("config"), py::arg("replicate"));

    m.def(
        "run_synthetic_experiment",
        [](const harness::SyntheticConfig& config, const std::vector<int>& n_grid, const py::object& family, int restarts,
           int parallelism) {
            harness::ExperimentOptions options;
            options.restarts = restarts;
            options.parallelism = parallelism;
            const KernelFamily f = family_arg(family);
            harness::BatchOutput out;
            {
                py::gil_scoped_release release;
                out = harness::run_synthetic_experiment(config, n_grid, f, options);
            }
            return output_dict(out);
        },
        py::arg("config"), py::arg("n_grid"), py::arg("family") = "se", py::arg("restarts") = 5, py::arg("parallelism") = 1);

    m.def(
        "run_batch",
        [](const std::vector<TimeSeries>& set, const std::vector<Scenario>& scenarios, const py::object& family,
           int restarts, int parallelism, std::uint64_t seed) {
            harness::BatchOptions options;
            options.restarts = restarts;
            options.parallelism = parallelism;
            options.seed = seed;
            const KernelFamily f = family_arg(family);
            harness::BatchOutput out;
            {
                py::gil_scoped_release release;
                out = harness::run_batch(set, scenarios, f, options);
            }
            return output_dict(out);
        },
        py::arg("series"), py::arg("scenarios"), py::arg("family") = "se", py::arg("restarts") = 5,
        py::arg("parallelism") = 1, py::arg("seed") = 1);

    m.def("ingest_csv", [](const std::string& path) { return harness::ingest_csv(path); }, py::arg("path"));
    m.def("export_csv", &harness::export_csv, py::arg("path"), py::arg("series"));
}
