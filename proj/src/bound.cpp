#include "shortgp/bound.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace shortgp {

namespace {

using special::kPi;

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

double matern_bound_unit(double nu, double alpha) {
    // Solve in ell / dt with dt = 1; the caller rescales.
    double lo = kBisectionLow;
    double hi = kBisectionHigh;
    if (matern_energy_fraction(nu, lo, 1.0) >= alpha || matern_energy_fraction(nu, hi, 1.0) < alpha) {
        throw ConvergenceError("length_scale_bound: bisection bracket does not contain the root");
    }
    for (int i = 0; i < kBisectionMaxIterations; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (matern_energy_fraction(nu, mid, 1.0) < alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi / lo - 1.0 < kBisectionTolerance) return 0.5 * (lo + hi);
    }
    throw ConvergenceError("length_scale_bound: bisection did not converge");
}

}  // namespace

SamplingInfo delta_t_from_times(std::span<const double> times, GapMode mode) {
    if (times.size() < 2) throw DataError("need at least two time points to define a sampling interval");
    std::vector<double> gaps;
    gaps.reserve(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        if (!std::isfinite(gap)) throw DataError("time points must be finite");
        if (!(gap > 0.0)) {
            throw DataError("time points must be strictly increasing (index " + std::to_string(i) + ")");
        }
        gaps.push_back(gap);
    }
    const auto [min_it, max_it] = std::minmax_element(gaps.begin(), gaps.end());
    SamplingInfo info;
    info.uniform = (*max_it - *min_it) <= 1e-9 * *max_it;
    if (mode == GapMode::Minimum) {
        info.delta_t = *min_it;
    } else {
        std::sort(gaps.begin(), gaps.end());
        const std::size_t m = gaps.size();
        info.delta_t = m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
    }
    info.nyquist_frequency = 1.0 / (2.0 * info.delta_t);
    return info;
}

double se_energy_fraction(double length_scale, double delta_t) {
    require_positive(length_scale, "length-scale");
    require_positive(delta_t, "sampling interval");
    return special::erf(kPi * length_scale / (special::kSqrt2 * delta_t));
}

double matern_energy_fraction(double nu, double length_scale, double delta_t) {
    require_positive(nu, "Matern nu");
    require_positive(length_scale, "length-scale");
    require_positive(delta_t, "sampling interval");
    const KernelSpec unit{KernelFamily::matern(nu), 1.0, length_scale};
    auto density = [&](double s) { return spectral_density(unit, s); };

    // The density is even with total mass one. Below the corner frequency it is
    // flat; past it a power-law tail. When the band contains the corner the
    // peak can be far narrower than the band, so integrate the smooth tail
    // beyond f_N and subtract.
    const double nyquist = 1.0 / (2.0 * delta_t);
    const double corner = std::sqrt(2.0 * nu) / (2.0 * kPi * length_scale);
    constexpr double abs_tol = 1e-15;
    constexpr double rel_tol = 1e-13;
    if (corner < nyquist) {
        const double tail = special::integrate_to_infinity(density, nyquist, abs_tol, rel_tol).value;
        return std::clamp(1.0 - 2.0 * tail, 0.0, 1.0);
    }
    const double half = special::integrate_adaptive(density, 0.0, nyquist, abs_tol, rel_tol).value;
    return std::min(2.0 * half, 1.0);
}

double matern_energy_fraction_closed_form(double nu, double length_scale, double delta_t) {
    require_positive(nu, "Matern nu");
    require_positive(length_scale, "length-scale");
    require_positive(delta_t, "sampling interval");
    const double ratio = length_scale / delta_t;
    const double log_prefactor = 0.5 * std::log(2.0 * kPi) + special::log_gamma(nu + 0.5) -
                                 special::log_gamma(nu) - 0.5 * std::log(nu);
    const double x = -kPi * kPi * ratio * ratio / (2.0 * nu);
    return std::exp(log_prefactor) * ratio * special::hyp2f1(0.5, nu + 0.5, 1.5, x);
}

double energy_fraction(const KernelFamily& family, double length_scale, double delta_t) {
    if (family.is_matern()) return matern_energy_fraction(family.nu, length_scale, delta_t);
    return se_energy_fraction(length_scale, delta_t);
}

double length_scale_bound(const KernelFamily& family, double alpha, double delta_t) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("energy fraction alpha must lie in (0, 1)");
    require_positive(delta_t, "sampling interval");
    if (!family.is_matern()) return special::kSqrt2 * special::erfinv(alpha) / kPi * delta_t;
    return matern_bound_unit(family.nu, alpha) * delta_t;
}

BoundConfig make_bound_config(const KernelFamily& family, std::span<const double> times,
                              double alpha, bool span_upper, GapMode mode) {
    BoundConfig config;
    config.alpha = alpha;
    config.sampling = delta_t_from_times(times, mode);
    config.lower = length_scale_bound(family, alpha, config.sampling.delta_t);
    if (span_upper) {
        config.upper = times.back() - times.front();
        if (!(config.upper > config.lower)) {
            throw DataError("length-scale interval [a_l, t_n - t_1] is empty for this sampling");
        }
    }
    return config;
}

}  // namespace shortgp
