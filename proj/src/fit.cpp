#include "shortgp/fit.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

namespace shortgp {

namespace {

// Maps an unconstrained coordinate onto a positive interval [lo, hi].
class BoxTransform {
public:
    BoxTransform(double lo, double hi) : lo_(lo), hi_(hi) {
        if (lo > 0.0 && hi < kInfinity) {
            kind_ = Kind::LogLogistic;
            log_lo_ = std::log(lo);
            log_width_ = std::log(hi) - log_lo_;
        } else if (lo > 0.0) {
            kind_ = Kind::ShiftedLog;
        } else if (hi < kInfinity) {
            kind_ = Kind::ScaledLogistic;
        } else {
            kind_ = Kind::Log;
        }
    }

    double natural(double theta) const {
        double p = 0.0;
        switch (kind_) {
            case Kind::Log: p = std::exp(theta); break;
            case Kind::ShiftedLog: p = lo_ + std::exp(theta); break;
            case Kind::LogLogistic: p = std::exp(log_lo_ + log_width_ * sigmoid(theta)); break;
            case Kind::ScaledLogistic: p = hi_ * sigmoid(theta); break;
        }
        // Exact feasibility, whatever the rounding above did.
        p = std::clamp(p, lo_, hi_);
        return std::max(p, std::numeric_limits<double>::min());
    }

    /// d log(p) / d theta
    double log_slope(double theta) const {
        switch (kind_) {
            case Kind::Log: return 1.0;
            case Kind::ShiftedLog: {
                const double e = std::exp(theta);
                return e / (lo_ + e);
            }
            case Kind::LogLogistic: {
                const double s = sigmoid(theta);
                return log_width_ * s * (1.0 - s);
            }
            case Kind::ScaledLogistic: return sigmoid(-theta);
        }
        return 1.0;
    }

    double internal(double p) const {
        switch (kind_) {
            case Kind::Log: return std::log(p);
            case Kind::ShiftedLog: return std::log(p - lo_);
            case Kind::LogLogistic: return logit((std::log(p) - log_lo_) / log_width_);
            case Kind::ScaledLogistic: return logit(p / hi_);
        }
        return std::log(p);
    }

    /// Moves a starting value strictly inside the box.
    double interior(double p) const {
        if (hi_ < kInfinity) {
            const double margin = 1e-3 * (hi_ - lo_);
            return std::clamp(p, lo_ + margin, hi_ - margin);
        }
        if (lo_ > 0.0) return std::max(p, lo_ * (1.0 + 1e-3));
        return p;
    }

private:
    enum class Kind { Log, ShiftedLog, LogLogistic, ScaledLogistic };

    static double sigmoid(double t) {
        if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
        const double e = std::exp(t);
        return e / (1.0 + e);
    }
    static double logit(double u) { return std::log(u / (1.0 - u)); }

    Kind kind_ = Kind::Log;
    double lo_;
    double hi_;
    double log_lo_ = 0.0;
    double log_width_ = 0.0;
};

double population_variance(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / n;
}

bool near(double value, double bound) {
    return std::isfinite(bound) && bound > 0.0 && std::abs(value - bound) <= 1e-6 * bound;
}

// Log-uniform draw over [lo, hi] intersected with the box [box_lo, box_hi].
double draw_in_box(std::uint64_t key, double lo, double hi, double box_lo, double box_hi) {
    lo = std::max(lo, box_lo);
    hi = std::min(hi, box_hi);
    if (!(hi > lo)) hi = box_hi < kInfinity && box_hi > lo ? box_hi : 10.0 * lo;
    return random::log_uniform(key, lo, hi);
}

struct Candidate {
    FitResult result;
    bool valid = false;
};

bool better(const FitResult& a, const FitResult& b) {
    const double diff = a.log_marginal_likelihood - b.log_marginal_likelihood;
    if (diff > 1e-10) return true;
    if (diff < -1e-10) return false;
    if (a.kernel.length_scale != b.kernel.length_scale) {
        return a.kernel.length_scale < b.kernel.length_scale;
    }
    return a.noise_variance.value_or(0.0) < b.noise_variance.value_or(0.0);
}

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

double parse_number(const std::string& text, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw InvalidScenario("bad number for '" + key + "': " + text);
    return v;
}

}  // namespace

void Scenario::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidScenario("scenario '" + label + "': alpha outside (0, 1)");
    if (length_lower == LowerRule::Value && !(length_lower_value > 0.0 && std::isfinite(length_lower_value))) {
        throw InvalidScenario("scenario '" + label + "': length-scale lower bound must be positive");
    }
    if (length_upper == UpperRule::Value && !(length_upper_value > 0.0)) {
        throw InvalidScenario("scenario '" + label + "': length-scale upper bound must be positive");
    }
    if (length_lower == LowerRule::Value && length_upper == UpperRule::Value &&
        !(length_lower_value < length_upper_value)) {
        throw InvalidScenario("scenario '" + label + "': empty length-scale interval");
    }
    if (noise == NoiseRule::Bounded && !(noise_lo >= 0.0 && noise_lo < noise_hi)) {
        throw InvalidScenario("scenario '" + label + "': noise bounds need 0 <= lo < hi");
    }
}

ResolvedBounds resolve_bounds(const Scenario& scenario, const TimeSeries& series,
                              const KernelFamily& family) {
    scenario.validate();
    ResolvedBounds b;
    b.sampling = delta_t_from_times(series.times, scenario.gap_mode);
    b.nyquist_bound = length_scale_bound(family, scenario.alpha, b.sampling.delta_t);

    switch (scenario.length_lower) {
        case LowerRule::None: b.length_lower = 0.0; break;
        case LowerRule::Nyquist: b.length_lower = b.nyquist_bound; break;
        case LowerRule::Value: b.length_lower = scenario.length_lower_value; break;
    }
    switch (scenario.length_upper) {
        case UpperRule::None: b.length_upper = kInfinity; break;
        case UpperRule::Span: b.length_upper = series.times.back() - series.times.front(); break;
        case UpperRule::Value: b.length_upper = scenario.length_upper_value; break;
    }
    if (!(b.length_lower < b.length_upper)) {
        throw InvalidScenario("scenario '" + scenario.label + "': length-scale interval [" +
                              format_number(b.length_lower) + ", " + format_number(b.length_upper) +
                              "] is empty for series '" + series.id + "'");
    }

    switch (scenario.noise) {
        case NoiseRule::Unconstrained: break;
        case NoiseRule::Bounded:
            b.noise_lower = scenario.noise_lo;
            b.noise_upper = scenario.noise_hi;
            break;
        case NoiseRule::Fixed:
            if (!series.noise_variances) {
                throw InvalidScenario("scenario '" + scenario.label + "' needs per-point noise variances, series '" +
                                      series.id + "' has none");
            }
            b.noise_fixed = true;
            break;
    }
    return b;
}

std::vector<Scenario> synthetic_scenarios(double alpha, double noise_lo, double noise_hi) {
    std::vector<Scenario> s(4);
    s[0].label = "no bounds";
    s[1].label = "l bounded";
    s[1].length_lower = LowerRule::Nyquist;
    s[2].label = "noise bounded";
    s[2].noise = NoiseRule::Bounded;
    s[3].label = "l and noise bounded";
    s[3].length_lower = LowerRule::Nyquist;
    s[3].noise = NoiseRule::Bounded;
    for (auto& sc : s) {
        sc.alpha = alpha;
        if (sc.noise == NoiseRule::Bounded) {
            sc.noise_lo = noise_lo;
            sc.noise_hi = noise_hi;
        }
    }
    return s;
}

std::vector<Scenario> expression_scenarios(double alpha) {
    auto s = synthetic_scenarios(alpha);
    s[2].label = "noise fixed";
    s[3].label = "l bounded, noise fixed";
    for (std::size_t i : {2u, 3u}) {
        s[i].noise = NoiseRule::Fixed;
        s[i].noise_lo = 0.0;
        s[i].noise_hi = kInfinity;
    }
    return s;
}

std::vector<ResolvedScenario> make_scenarios(const TimeSeries& series, const KernelFamily& family,
                                             double alpha) {
    std::vector<ResolvedScenario> out;
    for (const auto& s : synthetic_scenarios(alpha)) out.push_back({s, resolve_bounds(s, series, family)});
    return out;
}

std::map<std::string, std::string> scenario_to_config(const Scenario& s, const std::string& prefix) {
    std::map<std::string, std::string> c;
    c[prefix + "label"] = s.label;
    switch (s.length_lower) {
        case LowerRule::None: c[prefix + "length_lower"] = "none"; break;
        case LowerRule::Nyquist: c[prefix + "length_lower"] = "nyquist"; break;
        case LowerRule::Value: c[prefix + "length_lower"] = format_number(s.length_lower_value); break;
    }
    switch (s.length_upper) {
        case UpperRule::None: c[prefix + "length_upper"] = "none"; break;
        case UpperRule::Span: c[prefix + "length_upper"] = "span"; break;
        case UpperRule::Value: c[prefix + "length_upper"] = format_number(s.length_upper_value); break;
    }
    switch (s.noise) {
        case NoiseRule::Unconstrained: c[prefix + "noise"] = "unconstrained"; break;
        case NoiseRule::Bounded:
            c[prefix + "noise"] = "bounded";
            c[prefix + "noise_lo"] = format_number(s.noise_lo);
            c[prefix + "noise_hi"] = format_number(s.noise_hi);
            break;
        case NoiseRule::Fixed: c[prefix + "noise"] = "fixed"; break;
    }
    c[prefix + "alpha"] = format_number(s.alpha);
    c[prefix + "gap_mode"] = s.gap_mode == GapMode::Minimum ? "min" : "median";
    return c;
}

Scenario scenario_from_config(const std::map<std::string, std::string>& config,
                              const std::string& prefix) {
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = config.find(prefix + key);
        if (it == config.end()) return std::nullopt;
        return it->second;
    };
    Scenario s;
    s.label = get("label").value_or(prefix);
    if (auto v = get("length_lower")) {
        if (*v == "none") {
            s.length_lower = LowerRule::None;
        } else if (*v == "nyquist") {
            s.length_lower = LowerRule::Nyquist;
        } else {
            s.length_lower = LowerRule::Value;
            s.length_lower_value = parse_number(*v, prefix + "length_lower");
        }
    }
    if (auto v = get("length_upper")) {
        if (*v == "none") {
            s.length_upper = UpperRule::None;
        } else if (*v == "span") {
            s.length_upper = UpperRule::Span;
        } else {
            s.length_upper = UpperRule::Value;
            s.length_upper_value = parse_number(*v, prefix + "length_upper");
        }
    }
    if (auto v = get("noise")) {
        if (*v == "unconstrained") {
            s.noise = NoiseRule::Unconstrained;
        } else if (*v == "bounded") {
            s.noise = NoiseRule::Bounded;
            s.noise_lo = kSyntheticNoiseLower;
            s.noise_hi = kSyntheticNoiseUpper;
        } else if (*v == "fixed") {
            s.noise = NoiseRule::Fixed;
        } else {
            throw InvalidScenario("unknown noise mode '" + *v + "' for " + prefix + "noise");
        }
    }
    if (auto v = get("noise_lo")) s.noise_lo = parse_number(*v, prefix + "noise_lo");
    if (auto v = get("noise_hi")) s.noise_hi = parse_number(*v, prefix + "noise_hi");
    if (auto v = get("alpha")) s.alpha = parse_number(*v, prefix + "alpha");
    if (auto v = get("gap_mode")) {
        if (*v == "min") {
            s.gap_mode = GapMode::Minimum;
        } else if (*v == "median") {
            s.gap_mode = GapMode::Median;
        } else {
            throw InvalidScenario("unknown gap mode '" + *v + "'");
        }
    }
    s.validate();
    return s;
}

NoiseModel FitResult::noise_model(const TimeSeries& series) const {
    if (noise_variance) return EstimatedNoise{*noise_variance};
    if (!series.noise_variances) throw DataError("series '" + series.id + "' has no fixed noise variances");
    return FixedNoise{*series.noise_variances};
}

FitResult fit(const TimeSeries& series, const KernelFamily& family, const Scenario& scenario,
              std::uint64_t seed, const FitOptions& options) {
    series.validate();
    if (series.size() < 2) throw DataError("series '" + series.id + "': fitting needs at least two points");
    if (!family.has_closed_form()) {
        throw InvalidScenario("fitting supports the SE kernel and Matern 1/2, 3/2, 5/2 only");
    }
    if (options.restarts < 1) throw InvalidScenario("at least one restart is required");
    const ResolvedBounds bounds = resolve_bounds(scenario, series, family);

    const BoxTransform signal_box(0.0, kInfinity);
    const BoxTransform length_box(bounds.length_lower, bounds.length_upper);
    const BoxTransform noise_box(bounds.noise_lower, bounds.noise_upper);
    const bool estimate_noise = !bounds.noise_fixed;
    const Eigen::Index dim = estimate_noise ? 3 : 2;

    auto make_noise = [&](double variance) -> NoiseModel {
        if (estimate_noise) return EstimatedNoise{variance};
        return FixedNoise{*series.noise_variances};
    };
    auto kernel_at = [&](const Eigen::VectorXd& theta) {
        return KernelSpec{family, signal_box.natural(theta(0)), length_box.natural(theta(1))};
    };

    const Objective objective = [&](const Eigen::VectorXd& theta) -> std::optional<Evaluation> {
        try {
            const KernelSpec kernel = kernel_at(theta);
            const double noise = estimate_noise ? noise_box.natural(theta(2)) : 0.0;
            const ConditionedGp gp(series, kernel, make_noise(noise));
            const LikelihoodGradient g = gp.log_marginal_likelihood_gradient();
            Evaluation e;
            e.value = -gp.log_marginal_likelihood();
            e.gradient.resize(dim);
            e.gradient(0) = -g.log_signal_variance * signal_box.log_slope(theta(0));
            e.gradient(1) = -g.log_length_scale * length_box.log_slope(theta(1));
            if (estimate_noise) e.gradient(2) = -*g.log_noise_variance * noise_box.log_slope(theta(2));
            return e;
        } catch (const FactorizationError&) {
            return std::nullopt;
        }
    };

    double y_variance = population_variance(series.values);
    if (!(y_variance > 0.0) || !std::isfinite(y_variance)) y_variance = 1.0;
    const double span = series.times.back() - series.times.front();
    const double dt = bounds.sampling.delta_t;
    const double length_draw_lo = std::max(bounds.nyquist_bound / 10.0, dt / 10.0);

    Candidate best;
    int failed = 0;
    for (int r = 0; r < options.restarts; ++r) {
        const auto ur = static_cast<std::uint64_t>(r);
        Eigen::VectorXd start(dim);
        start(0) = signal_box.internal(y_variance);
        const double ell0 = draw_in_box(random::key({seed, ur, 1}), length_draw_lo, span,
                                        bounds.length_lower, bounds.length_upper);
        start(1) = length_box.internal(length_box.interior(ell0));
        if (estimate_noise) {
            const double noise0 = draw_in_box(random::key({seed, ur, 2}), 1e-4, std::max(y_variance, 2e-4),
                                              bounds.noise_lower, bounds.noise_upper);
            start(2) = noise_box.internal(noise_box.interior(noise0));
        }

        FitResult candidate;
        try {
            const OptimizerResult opt = minimize_bfgs(objective, start, options.optimizer);
            candidate.kernel = kernel_at(opt.x);
            if (estimate_noise) candidate.noise_variance = noise_box.natural(opt.x(2));
            candidate.log_marginal_likelihood = log_marginal_likelihood(
                series, candidate.kernel, make_noise(candidate.noise_variance.value_or(0.0)));
            candidate.iterations = opt.iterations;
            candidate.converged = opt.converged;
        } catch (const ConvergenceError&) {
            ++failed;
            continue;
        } catch (const FactorizationError&) {
            ++failed;
            continue;
        }
        if (!std::isfinite(candidate.log_marginal_likelihood)) {
            ++failed;
            continue;
        }
        if (!best.valid || better(candidate, best.result)) {
            best.result = candidate;
            best.valid = true;
        }
    }
    if (!best.valid) {
        throw FitFailed("all " + std::to_string(options.restarts) + " restarts failed for series '" +
                        series.id + "'");
    }

    FitResult& out = best.result;
    out.bounds = bounds;
    out.restarts_used = options.restarts;
    out.failed_restarts = failed;
    out.active.length_lower = near(out.kernel.length_scale, bounds.length_lower);
    out.active.length_upper = near(out.kernel.length_scale, bounds.length_upper);
    if (out.noise_variance) {
        out.active.noise_lower = near(*out.noise_variance, bounds.noise_lower);
        out.active.noise_upper = near(*out.noise_variance, bounds.noise_upper);
    }
    return out;
}

Diagnostics diagnose(const FitResult& result, const SamplingInfo& sampling, double alpha,
                     double noise_threshold) {
    Diagnostics d;
    d.alpha = alpha;
    d.noise_threshold = noise_threshold;
    d.length_scale_bound = length_scale_bound(result.kernel.family, alpha, sampling.delta_t);
    d.length_scale_below_bound = result.kernel.length_scale < d.length_scale_bound;
    d.tiny_noise = result.noise_variance.has_value() && *result.noise_variance < noise_threshold;
    return d;
}

ProfilePoint profile_signal_variance(const TimeSeries& series, const KernelFamily& family,
                                     double length_scale, double noise_variance) {
    const Objective objective = [&](const Eigen::VectorXd& theta) -> std::optional<Evaluation> {
        try {
            const ConditionedGp gp(series, KernelSpec{family, std::exp(theta(0)), length_scale},
                                   EstimatedNoise{noise_variance});
            Evaluation e;
            e.value = -gp.log_marginal_likelihood();
            e.gradient = Eigen::VectorXd::Constant(1, -gp.log_marginal_likelihood_gradient().log_signal_variance);
            return e;
        } catch (const FactorizationError&) {
            return std::nullopt;
        }
    };
    double y_variance = population_variance(series.values);
    if (!(y_variance > 0.0)) y_variance = 1.0;
    OptimizerOptions options;
    options.gradient_tolerance = 1e-9;
    options.relative_tolerance = 1e-14;
    const OptimizerResult opt =
        minimize_bfgs(objective, Eigen::VectorXd::Constant(1, std::log(y_variance)), options);
    return {std::exp(opt.x(0)), -opt.at.value};
}

std::vector<std::vector<ProfilePoint>> likelihood_surface(const TimeSeries& series,
                                                          const KernelFamily& family,
                                                          const std::vector<double>& length_scales,
                                                          const std::vector<double>& noise_variances) {
    std::vector<std::vector<ProfilePoint>> grid(length_scales.size());
    for (std::size_t i = 0; i < length_scales.size(); ++i) {
        grid[i].reserve(noise_variances.size());
        for (double noise : noise_variances) {
            grid[i].push_back(profile_signal_variance(series, family, length_scales[i], noise));
        }
    }
    return grid;
}

}  // namespace shortgp
