#include "shortgp/harness/csv.hpp"

#include "shortgp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace shortgp::harness {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Line {
    std::size_t number = 0;
    std::vector<std::string> fields;
};

// Non-blank records with their 1-based line numbers.
std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
        ++number;
        if (number == 1 && text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (trim(text).empty()) continue;
        try {
            lines.push_back({number, split_csv_line(text)});
        } catch (const DataError& e) {
            throw ParseError(e.what(), number);
        }
    }
    return lines;
}

double number_field(const std::string& text, const std::string& what, std::size_t line) {
    double v = 0.0;
    if (!parse_double(text, v)) throw ParseError("cannot parse " + what + " '" + text + "'", line);
    return v;
}

std::vector<TimeSeries> read_long(const std::vector<Line>& lines) {
    const auto& header = lines.front();
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        const std::string name = lower(trim(header.fields[i]));
        if (!column.emplace(name, i).second) {
            throw ParseError("duplicate column '" + name + "'", header.number);
        }
    }
    for (const char* required : {"id", "time", "value"}) {
        if (!column.count(required)) {
            throw ParseError(std::string("missing column '") + required + "'", header.number);
        }
    }
    const std::size_t id_col = column.at("id"), time_col = column.at("time"), value_col = column.at("value");
    const std::optional<std::size_t> var_col =
        column.count("variance") ? std::optional<std::size_t>(column.at("variance")) : std::nullopt;

    std::vector<TimeSeries> out;
    std::map<std::string, std::size_t> index;
    struct VarianceCell {
        std::optional<double> value;
        std::size_t line;
    };
    std::vector<std::vector<VarianceCell>> variances;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const Line& line = lines[k];
        if (line.fields.size() != header.fields.size()) {
            throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                                 std::to_string(line.fields.size()),
                             line.number);
        }
        const std::string id = trim(line.fields[id_col]);
        if (id.empty()) throw ParseError("empty id", line.number);
        const double t = number_field(line.fields[time_col], "time", line.number);
        const double v = number_field(line.fields[value_col], "value", line.number);

        auto [it, inserted] = index.emplace(id, out.size());
        if (inserted) {
            out.push_back(TimeSeries{id, {}, {}, std::nullopt});
            variances.emplace_back();
        }
        TimeSeries& s = out[it->second];
        if (!s.times.empty() && !(t > s.times.back())) {
            throw ParseError("times of series '" + id + "' are not strictly increasing", line.number);
        }
        s.times.push_back(t);
        s.values.push_back(v);
        if (var_col) {
            const std::string cell = trim(line.fields[*var_col]);
            std::optional<double> var;
            if (!cell.empty()) {
                var = number_field(cell, "variance", line.number);
                if (!(*var >= 0.0)) throw ParseError("negative variance", line.number);
            }
            variances[it->second].push_back({var, line.number});
        }
    }
    // A series takes variances from all of its rows or from none.
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& cells = variances[i];
        if (cells.empty() || !cells.front().value) {
            for (const auto& c : cells) {
                if (c.value) throw ParseError("series '" + out[i].id + "' has a missing variance", cells.front().line);
            }
            continue;
        }
        out[i].noise_variances.emplace();
        for (const auto& c : cells) {
            if (!c.value) throw ParseError("series '" + out[i].id + "' has a missing variance", c.line);
            out[i].noise_variances->push_back(*c.value);
        }
    }
    return out;
}

std::vector<TimeSeries> read_wide(const std::vector<Line>& lines) {
    const auto& header = lines.front();
    std::optional<std::size_t> id_col;
    std::vector<std::pair<std::size_t, double>> time_cols;
    std::map<double, std::size_t> var_cols;  // time -> column
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        std::string cell = trim(header.fields[i]);
        const std::string key = lower(cell);
        if (key == "id") {
            if (id_col) throw ParseError("duplicate column 'id'", header.number);
            id_col = i;
            continue;
        }
        bool variance = false;
        if (key.rfind("var:", 0) == 0) {
            variance = true;
            cell = trim(cell.substr(4));
        } else if (key.rfind("t=", 0) == 0) {
            cell = trim(cell.substr(2));
        }
        double t = 0.0;
        if (!parse_double(cell, t)) {
            throw ParseError("header cell '" + trim(header.fields[i]) + "' is not a time", header.number);
        }
        if (variance) {
            if (!var_cols.emplace(t, i).second) throw ParseError("duplicate variance column", header.number);
        } else {
            if (!time_cols.empty() && !(t > time_cols.back().second)) {
                throw ParseError("header times are not strictly increasing", header.number);
            }
            time_cols.emplace_back(i, t);
        }
    }
    if (!id_col) throw ParseError("missing column 'id'", header.number);
    if (time_cols.empty()) throw ParseError("no time columns", header.number);
    for (const auto& [t, col] : var_cols) {
        const bool known = std::any_of(time_cols.begin(), time_cols.end(), [t = t](const auto& tc) { return tc.second == t; });
        if (!known) throw ParseError("variance column without a matching time column", header.number);
    }

    std::vector<TimeSeries> out;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const Line& line = lines[k];
        if (line.fields.size() != header.fields.size()) {
            throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                                 std::to_string(line.fields.size()),
                             line.number);
        }
        TimeSeries s;
        s.id = trim(line.fields[*id_col]);
        if (s.id.empty()) throw ParseError("empty id", line.number);
        std::vector<double> variances;
        for (const auto& [col, t] : time_cols) {
            const std::string cell = trim(line.fields[col]);
            const auto var_it = var_cols.find(t);
            const std::string var_cell = var_it == var_cols.end() ? std::string() : trim(line.fields[var_it->second]);
            if (cell.empty()) {
                if (!var_cell.empty()) throw ParseError("variance given for a missing value", line.number);
                continue;
            }
            s.times.push_back(t);
            s.values.push_back(number_field(cell, "value", line.number));
            if (!var_cols.empty()) {
                if (var_cell.empty()) throw ParseError("series '" + s.id + "' has a missing variance", line.number);
                const double var = number_field(var_cell, "variance", line.number);
                if (!(var >= 0.0)) throw ParseError("negative variance", line.number);
                variances.push_back(var);
            }
        }
        if (!var_cols.empty()) s.noise_variances = std::move(variances);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw DataError("unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

std::string quote_csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

bool parse_double(const std::string& text, double& value) {
    std::string s = trim(text);
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::vector<TimeSeries> read_series_csv(std::istream& in, const CsvOptions& options) {
    const std::vector<Line> lines = read_lines(in);
    if (lines.empty()) throw ParseError("missing header row", 1);
    CsvLayout layout = options.layout;
    if (layout == CsvLayout::Auto) {
        bool has_time = false, has_value = false;
        for (const auto& f : lines.front().fields) {
            const std::string name = lower(trim(f));
            has_time = has_time || name == "time";
            has_value = has_value || name == "value";
        }
        layout = has_time && has_value ? CsvLayout::Long : CsvLayout::Wide;
    }
    std::vector<TimeSeries> out = layout == CsvLayout::Long ? read_long(lines) : read_wide(lines);
    for (const auto& s : out) {
        try {
            s.validate();
        } catch (const ParseError&) {
            throw;
        } catch (const DataError& e) {
            throw ParseError(e.what(), 0);
        }
    }
    return out;
}

std::vector<TimeSeries> ingest_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_series_csv(in, options);
}

void write_series_csv(std::ostream& out, const std::vector<TimeSeries>& series) {
    const bool variances = std::any_of(series.begin(), series.end(),
                                       [](const TimeSeries& s) { return s.noise_variances.has_value(); });
    for (const auto& s : series) {
        s.validate();
        if (variances && !s.noise_variances) {
            throw DataError("series '" + s.id + "' lacks noise variances while others have them");
        }
    }
    out << (variances ? "id,time,value,variance\n" : "id,time,value\n");
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << quote_csv_field(s.id) << ',' << format_double(s.times[i]) << ',' << format_double(s.values[i]);
            if (variances) out << ',' << format_double((*s.noise_variances)[i]);
            out << '\n';
        }
    }
}

void export_csv(const std::string& path, const std::vector<TimeSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_series_csv(out, series);
    if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace shortgp::harness
