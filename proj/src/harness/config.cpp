#include "shortgp/harness/config.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>

namespace shortgp::harness {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    if (!parse_double(text, v)) throw ConfigError(key + ": expected a number, found '" + text + "'");
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
    Int v{};
    const std::string t = trim(text);
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError(key + ": expected an integer, found '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + ": expected true or false, found '" + text + "'");
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
    ConfigMap out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
        if (!out.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

ConfigMap load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(to_int<int>("n_grid", item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<Scenario> HarnessConfig::effective_scenarios() const {
    if (!scenarios.empty()) return scenarios;
    return synthetic_scenarios(thresholds.alpha, noise_lo, noise_hi);
}

void HarnessConfig::validate() const {
    synthetic.validate();
    for (int n : n_grid) {
        if (n < 2) throw ConfigError("n_grid entries must be at least 2");
    }
    if (restarts < 1) throw ConfigError("restarts must be at least 1");
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    if (!(thresholds.alpha > 0.0 && thresholds.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(noise_lo > 0.0 && noise_lo <= noise_hi)) throw ConfigError("need 0 < noise_lo <= noise_hi");
    if (!(thresholds.overfit_noise >= 0.0)) throw ConfigError("overfit_noise_threshold must be >= 0");
    for (const auto& s : scenarios) {
        try {
            s.validate();
        } catch (const InvalidScenario& e) {
            throw ConfigError(e.what());
        }
    }
}

HarnessConfig apply_config(HarnessConfig c, const ConfigMap& values) {
    std::set<std::string> used;
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = values.find(key);
        if (it == values.end()) return nullptr;
        used.insert(key);
        return &it->second;
    };

    auto& syn = c.synthetic;
    if (auto v = get("n_points")) syn.n_points = to_int<int>("n_points", *v);
    if (auto v = get("interval_lo")) syn.interval_lo = to_double("interval_lo", *v);
    if (auto v = get("interval_hi")) syn.interval_hi = to_double("interval_hi", *v);
    if (auto v = get("noise_variance")) syn.noise_variance = to_double("noise_variance", *v);
    if (auto v = get("replicates")) syn.replicates = to_int<int>("replicates", *v);
    if (auto v = get("test_lo")) syn.test_lo = to_double("test_lo", *v);
    if (auto v = get("test_hi")) syn.test_hi = to_double("test_hi", *v);
    if (auto v = get("test_count")) syn.test_count = to_int<int>("test_count", *v);
    if (auto v = get("seed")) syn.seed = to_int<std::uint64_t>("seed", *v);
    if (auto v = get("n_grid")) c.n_grid = parse_int_list(*v);
    if (auto v = get("family")) {
        try {
            c.family = parse_kernel_family(*v);
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = get("alpha")) c.thresholds.alpha = to_double("alpha", *v);
    if (auto v = get("restarts")) c.restarts = to_int<int>("restarts", *v);
    if (auto v = get("parallelism")) c.parallelism = to_int<int>("parallelism", *v);
    if (auto v = get("noise_lo")) c.noise_lo = to_double("noise_lo", *v);
    if (auto v = get("noise_hi")) c.noise_hi = to_double("noise_hi", *v);
    if (auto v = get("overfit_noise_threshold")) c.thresholds.overfit_noise = to_double("overfit_noise_threshold", *v);
    if (auto v = get("low_loglik_threshold")) c.thresholds.low_loglik = to_double("low_loglik_threshold", *v);
    if (auto v = get("high_mse_threshold")) c.thresholds.high_mse = to_double("high_mse_threshold", *v);
    if (auto v = get("center")) c.center = to_bool("center", *v);
    if (auto v = get("scenarios")) {
        const int count = to_int<int>("scenarios", *v);
        if (count < 1) throw ConfigError("scenarios must be at least 1");
        c.scenarios.clear();
        for (int i = 1; i <= count; ++i) {
            const std::string prefix = "scenario." + std::to_string(i) + ".";
            for (const auto& [key, value] : values) {
                if (key.rfind(prefix, 0) == 0) used.insert(key);
            }
            try {
                c.scenarios.push_back(scenario_from_config(values, prefix));
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
        }
    }
    for (const auto& [key, value] : values) {
        if (!used.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

}  // namespace shortgp::harness
