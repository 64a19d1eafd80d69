#pragma once

// Report files. All tables share one layout:
//
//   scenario,n=5,n=7,...
//   <scenario label>,<fraction>,<fraction>,...
//
// Fractions are written with 4 decimals. Files written by emit_report:
//   table_overfit_length_scale.csv  fitted ell below a_ell
//   table_overfit_noise.csv         estimated noise variance below the threshold
//   table_low_loglik.csv            predictive log-likelihood below the threshold (synthetic only)
//   table_high_mse.csv              MSE above the threshold (synthetic only)
//   table_win_loglik.csv            share of replicates where the scenario had the best log-likelihood
//   table_win_mse.csv               share of replicates where the scenario had the smallest MSE
//   table_failed.csv                failed fit counts (integers)
//   summary.txt                     human-readable digest

#include "shortgp/fit.hpp"
#include "shortgp/harness/batch.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace shortgp::harness {

/// Writes the table files and summary.txt into `out_dir`, creating it if
/// needed. Returns the paths written. Throws DataError on I/O failure.
std::vector<std::string> emit_report(const BatchReport& report, const std::string& out_dir);

std::string format_fraction(double value);

struct ReportTable {
    std::vector<std::string> scenario_labels;
    std::vector<int> n_values;
    std::vector<std::vector<double>> values;  // [scenario][n]
};

ReportTable read_report_table(const std::string& path);

/// Per-series results. Columns:
///   series_id,n,replicate,scenario,scenario_label,failed,length_scale,
///   signal_variance,noise_variance,log_marginal_likelihood,length_scale_bound,
///   overfit_length_scale,overfit_noise,converged,predictive_log_likelihood,mse,error
/// Reals are written with round-trip precision; absent values are empty.
void write_records_csv(std::ostream& out, const std::vector<SeriesRecord>& records);
void write_records_csv(const std::string& path, const std::vector<SeriesRecord>& records);
std::vector<SeriesRecord> read_records_csv(std::istream& in);
std::vector<SeriesRecord> read_records_csv(const std::string& path);

struct PlotRow {
    double time = 0.0;
    double mean = 0.0;
    double latent_sd = 0.0;
    double observed_sd = 0.0;
    bool is_training_point = false;
    double training_value = 0.0;  // meaningful for training rows only
};

/// Posterior on `grid_points` equally spaced times over the training span,
/// merged with the training times, sorted by time. A grid time equal to a
/// training time is reported once, as a training row.
std::vector<PlotRow> fit_plotdata(const TimeSeries& series, const KernelSpec& kernel,
                                  const NoiseModel& noise, int grid_points);

/// Columns: time,mean,latent_sd,observed_sd,is_training_point,training_value.
void write_plotdata_csv(std::ostream& out, const std::vector<PlotRow>& rows);
void emit_fit_plotdata(const TimeSeries& series, const FitResult& result, int grid_points,
                       const std::string& path);

}  // namespace shortgp::harness
