#include "shortgp/harness/report.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/harness/csv.hpp"
#include "shortgp/harness/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace shortgp::harness {

namespace {

namespace fs = std::filesystem;

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

void write_table(const fs::path& path, const BatchReport& report,
                 const std::function<std::string(const ReportCell&)>& value) {
    auto out = open_for_write(path);
    out << "scenario";
    for (int n : report.n_values) out << ",n=" << n;
    out << '\n';
    if (!report.n_values.empty()) {
        for (std::size_t s = 0; s < report.scenario_labels.size(); ++s) {
            out << quote_csv_field(report.scenario_labels[s]);
            for (int n : report.n_values) out << ',' << value(report.cell(static_cast<int>(s), n));
            out << '\n';
        }
    }
    finish(out, path);
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> opt_field(const std::string& text, std::size_t line) {
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    if (!parse_double(text, v)) throw ParseError("cannot parse '" + text + "'", line);
    return v;
}

double real_field(const std::string& text, std::size_t line) {
    const auto v = opt_field(text, line);
    if (!v) throw ParseError("missing number", line);
    return *v;
}

int int_field(const std::string& text, std::size_t line) {
    int v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ParseError("cannot parse integer '" + text + "'", line);
    return v;
}

bool bool_field(const std::string& text, std::size_t line) {
    if (text == "1") return true;
    if (text == "0") return false;
    throw ParseError("expected 0 or 1, found '" + text + "'", line);
}

constexpr const char* kRecordHeader =
    "series_id,n,replicate,scenario,scenario_label,failed,length_scale,signal_variance,noise_variance,"
    "log_marginal_likelihood,length_scale_bound,overfit_length_scale,overfit_noise,converged,"
    "predictive_log_likelihood,mse,error";

}  // namespace

std::string format_fraction(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 4);
    return std::string(buf, ptr);
}

std::vector<std::string> emit_report(const BatchReport& report, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create '" + out_dir + "': " + ec.message());

    std::vector<std::string> written;
    auto table = [&](const char* name, const std::function<std::string(const ReportCell&)>& value) {
        const fs::path path = dir / name;
        write_table(path, report, value);
        written.push_back(path.string());
    };
    table("table_overfit_length_scale.csv", [](const ReportCell& c) { return format_fraction(c.overfit_length_scale); });
    table("table_overfit_noise.csv", [](const ReportCell& c) { return format_fraction(c.overfit_noise); });
    if (report.has_metrics) {
        table("table_low_loglik.csv", [](const ReportCell& c) { return format_fraction(c.low_loglik.value_or(0.0)); });
        table("table_high_mse.csv", [](const ReportCell& c) { return format_fraction(c.high_mse.value_or(0.0)); });
        table("table_win_loglik.csv", [](const ReportCell& c) { return format_fraction(c.win_loglik.value_or(0.0)); });
        table("table_win_mse.csv", [](const ReportCell& c) { return format_fraction(c.win_mse.value_or(0.0)); });
    }
    table("table_failed.csv", [](const ReportCell& c) { return std::to_string(c.failed); });

    const fs::path summary_path = dir / "summary.txt";
    auto out = open_for_write(summary_path);
    const auto& th = report.thresholds;
    out << "scenarios: " << report.scenario_labels.size() << ", n values: " << report.n_values.size() << '\n';
    out << "alpha " << format_double(th.alpha) << ", noise threshold " << format_double(th.overfit_noise);
    if (report.has_metrics) {
        out << ", low log-likelihood below " << format_double(th.low_loglik) << ", high MSE above "
            << format_double(th.high_mse);
    }
    out << "\n\n";
    for (std::size_t s = 0; s < report.scenario_labels.size(); ++s) {
        out << "[" << s + 1 << "] " << report.scenario_labels[s] << '\n';
        for (int n : report.n_values) {
            const ReportCell& c = report.cell(static_cast<int>(s), n);
            out << "  n=" << n << ": fits " << c.total << ", failed " << c.failed << ", ell<a_ell "
                << format_fraction(c.overfit_length_scale) << ", tiny noise " << format_fraction(c.overfit_noise);
            if (report.has_metrics) {
                out << ", low loglik " << format_fraction(*c.low_loglik) << ", high mse "
                    << format_fraction(*c.high_mse) << ", wins loglik " << format_fraction(*c.win_loglik)
                    << ", wins mse " << format_fraction(*c.win_mse) << " of " << c.compared;
            }
            out << '\n';
        }
    }
    finish(out, summary_path);
    written.push_back(summary_path.string());
    return written;
}

ReportTable read_report_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    ReportTable table;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (number == 1) {
            if (fields.empty() || fields[0] != "scenario") throw ParseError("missing table header", number);
            for (std::size_t i = 1; i < fields.size(); ++i) {
                if (fields[i].rfind("n=", 0) != 0) throw ParseError("bad column '" + fields[i] + "'", number);
                table.n_values.push_back(int_field(fields[i].substr(2), number));
            }
            continue;
        }
        if (fields.size() != table.n_values.size() + 1) throw ParseError("wrong field count", number);
        table.scenario_labels.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(real_field(fields[i], number));
        table.values.push_back(std::move(row));
    }
    if (number == 0) throw ParseError("missing table header", 1);
    return table;
}

void write_records_csv(std::ostream& out, const std::vector<SeriesRecord>& records) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << quote_csv_field(r.series_id) << ',' << r.n << ',' << r.replicate << ',' << r.scenario << ','
            << quote_csv_field(r.scenario_label) << ',' << (r.failed ? 1 : 0) << ',';
        if (r.failed) {
            out << ",,,,,,,,,";
        } else {
            out << format_double(r.length_scale) << ',' << format_double(r.signal_variance) << ','
                << opt(r.noise_variance) << ',' << format_double(r.log_marginal_likelihood) << ','
                << format_double(r.length_scale_bound) << ',' << (r.length_scale_below_bound ? 1 : 0) << ','
                << (r.tiny_noise ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
                << opt(r.predictive_log_likelihood) << ',' << opt(r.mse);
        }
        out << ',' << quote_csv_field(r.error) << '\n';
    }
}

void write_records_csv(const std::string& path, const std::vector<SeriesRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_records_csv(out, records);
    out.flush();
    if (!out) throw DataError("write to '" + path + "' failed");
}

std::vector<SeriesRecord> read_records_csv(std::istream& in) {
    std::vector<SeriesRecord> records;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (number == 1) {
            if (line != kRecordHeader) throw ParseError("unexpected results header", number);
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        try {
            f = split_csv_line(line);
        } catch (const DataError& e) {
            throw ParseError(e.what(), number);
        }
        if (f.size() != 17) throw ParseError("expected 17 fields, found " + std::to_string(f.size()), number);
        SeriesRecord r;
        r.series_id = f[0];
        r.n = int_field(f[1], number);
        r.replicate = int_field(f[2], number);
        r.scenario = int_field(f[3], number);
        r.scenario_label = f[4];
        r.failed = bool_field(f[5], number);
        if (!r.failed) {
            r.length_scale = real_field(f[6], number);
            r.signal_variance = real_field(f[7], number);
            r.noise_variance = opt_field(f[8], number);
            r.log_marginal_likelihood = real_field(f[9], number);
            r.length_scale_bound = real_field(f[10], number);
            r.length_scale_below_bound = bool_field(f[11], number);
            r.tiny_noise = bool_field(f[12], number);
            r.converged = bool_field(f[13], number);
            r.predictive_log_likelihood = opt_field(f[14], number);
            r.mse = opt_field(f[15], number);
        }
        r.error = f[16];
        records.push_back(std::move(r));
    }
    if (number == 0) throw ParseError("missing results header", 1);
    return records;
}

std::vector<SeriesRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_records_csv(in);
}

std::vector<PlotRow> fit_plotdata(const TimeSeries& series, const KernelSpec& kernel,
                                  const NoiseModel& noise, int grid_points) {
    series.validate();
    if (series.size() == 0) throw DataError("plot data needs a non-empty series");
    if (grid_points < 2) throw DataError("plot grid needs at least 2 points");

    struct Entry {
        double time;
        std::optional<std::size_t> training;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < series.size(); ++i) entries.push_back({series.times[i], i});
    for (double t : linspace(series.times.front(), series.times.back(), grid_points)) {
        if (!std::binary_search(series.times.begin(), series.times.end(), t)) entries.push_back({t, std::nullopt});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.time < b.time; });

    std::vector<double> times;
    for (const auto& e : entries) times.push_back(e.time);
    const Posterior post = posterior_at(series, kernel, noise, times);

    std::vector<PlotRow> rows;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        PlotRow row;
        row.time = times[k];
        row.mean = post.mean[k];
        row.latent_sd = std::sqrt(std::max(post.variance_latent[k], 0.0));
        row.observed_sd = std::sqrt(std::max(post.variance_observed[k], 0.0));
        if (entries[k].training) {
            row.is_training_point = true;
            row.training_value = series.values[*entries[k].training];
        }
        rows.push_back(row);
    }
    return rows;
}

void write_plotdata_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
    out << "time,mean,latent_sd,observed_sd,is_training_point,training_value\n";
    for (const auto& r : rows) {
        out << format_double(r.time) << ',' << format_double(r.mean) << ',' << format_double(r.latent_sd) << ','
            << format_double(r.observed_sd) << ',' << (r.is_training_point ? 1 : 0) << ','
            << (r.is_training_point ? format_double(r.training_value) : std::string()) << '\n';
    }
}

void emit_fit_plotdata(const TimeSeries& series, const FitResult& result, int grid_points,
                       const std::string& path) {
    const auto rows = fit_plotdata(series, result.kernel, result.noise_model(series), grid_points);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_plotdata_csv(out, rows);
    out.flush();
    if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace shortgp::harness
