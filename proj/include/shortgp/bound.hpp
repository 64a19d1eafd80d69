#pragma once

// Nyquist spectral-energy lower bound on the kernel length-scale.
//
// A length-scale ell is admissible when at least a fraction alpha of the
// kernel's spectral energy lies below the Nyquist frequency 1/(2 dt) of the
// sampling grid. The smallest admissible ell is the bound a_ell(alpha).

#include "shortgp/kernels.hpp"

#include <limits>
#include <optional>
#include <span>

namespace shortgp {

inline constexpr double kDefaultAlpha = 0.99;

/// How the sampling interval is read off irregular time points. The minimum
/// gap gives the least restrictive bound; the median gap is an opt-in heuristic.
enum class GapMode { Minimum, Median };

struct SamplingInfo {
    double delta_t = 0.0;
    double nyquist_frequency = 0.0;  // 1 / (2 delta_t)
    bool uniform = false;
};

/// Sampling interval from strictly increasing times (at least two).
/// Throws DataError on too few points or non-increasing times.
SamplingInfo delta_t_from_times(std::span<const double> times, GapMode mode = GapMode::Minimum);

/// Energy fraction of the SE kernel inside the Nyquist band: erf(pi ell / (sqrt 2 dt)).
double se_energy_fraction(double length_scale, double delta_t);

/// Energy fraction of the Matern kernel inside the Nyquist band, by adaptive
/// quadrature of its spectral density.
double matern_energy_fraction(double nu, double length_scale, double delta_t);

/// The same fraction through the Gauss hypergeometric function:
///   sqrt(2 pi) Gamma(nu+1/2) ell / (Gamma(nu) sqrt(nu) dt) * 2F1(1/2, nu+1/2; 3/2; -pi^2 ell^2 / (2 nu dt^2)).
double matern_energy_fraction_closed_form(double nu, double length_scale, double delta_t);

/// Dispatches on the family (quadrature for Matern).
double energy_fraction(const KernelFamily& family, double length_scale, double delta_t);

inline constexpr double kBisectionLow = 1e-6;     // in units of dt
inline constexpr double kBisectionHigh = 1e6;     // in units of dt
inline constexpr double kBisectionTolerance = 1e-10;  // relative, in ell
inline constexpr int kBisectionMaxIterations = 200;

/// Smallest ell whose energy fraction reaches alpha. Closed form for SE,
/// bisection on the (monotone) quadrature fraction for Matern. Exactly linear
/// in delta_t. Throws DomainError for alpha outside (0, 1) or dt <= 0 and
/// ConvergenceError if the bisection bracket or iteration cap fails.
double length_scale_bound(const KernelFamily& family, double alpha, double delta_t);

/// Box for the length-scale: [lower, upper], upper possibly infinite.
struct BoundConfig {
    double alpha = kDefaultAlpha;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    SamplingInfo sampling;

    bool has_upper() const { return upper != std::numeric_limits<double>::infinity(); }
};

/// Lower bound from the sampling of `times`; with `span_upper` the upper end
/// is t_n - t_1. Throws DataError if the resulting interval is empty.
BoundConfig make_bound_config(const KernelFamily& family, std::span<const double> times,
                              double alpha = kDefaultAlpha, bool span_upper = false,
                              GapMode mode = GapMode::Minimum);

}  // namespace shortgp
