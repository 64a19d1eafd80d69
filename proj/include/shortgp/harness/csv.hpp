#pragma once

// Time-series CSV input and output.
//
// Long layout: header with columns id, time, value and optionally variance, in
// any order. Rows of one id form one series and may be interleaved with
// other ids; within an id, times must strictly increase.
//
// Wide layout: header "id,<t1>,<t2>,..." where each time cell is a number,
// optionally prefixed "t=". Variance columns are written "var:<t>". One row
// is one series; an empty cell drops that time point from the row.

#include "shortgp/gp.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace shortgp::harness {

enum class CsvLayout { Auto, Long, Wide };

struct CsvOptions {
    CsvLayout layout = CsvLayout::Auto;  // Auto: long if the header has both "time" and "value"
};

/// Throws ParseError (with a line number) for malformed content, missing
/// columns, non-increasing times or a partially present variance column.
std::vector<TimeSeries> read_series_csv(std::istream& in, const CsvOptions& options = {});
std::vector<TimeSeries> ingest_csv(const std::string& path, const CsvOptions& options = {});

/// Writes long layout; the variance column appears if any series has fixed
/// variances, in which case every series must.
void write_series_csv(std::ostream& out, const std::vector<TimeSeries>& series);
void export_csv(const std::string& path, const std::vector<TimeSeries>& series);

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);
std::string quote_csv_field(const std::string& field);

/// Locale-independent double parse of the whole (trimmed) text; false on failure.
bool parse_double(const std::string& text, double& value);
/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace shortgp::harness
