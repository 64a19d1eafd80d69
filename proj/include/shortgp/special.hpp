#pragma once

// Scalar special functions and adaptive quadrature. Everything here is a pure
// function of its arguments.

#include <cstddef>
#include <functional>

namespace shortgp::special {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrtPi = 1.77245385090551602729816748334114518;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

/// Error function, absolute error below 1e-15 on the real line.
double erf(double x);

/// Complementary error function 1 - erf(x), accurate in the upper tail.
double erfc(double x);

/// Inverse error function on (-1, 1). Throws DomainError for |p| >= 1.
double erfinv(double p);

/// log Gamma(x) for x > 0. Throws DomainError for x <= 0.
double log_gamma(double x);

/// Gamma(x) on the whole real line except the poles (DomainError there).
double gamma(double x);

/// 1 / Gamma(x); zero at the non-positive integers.
double reciprocal_gamma(double x);

/// Modified Bessel function of the second kind K_nu(x) for real nu, x > 0.
/// Half-integer orders use the terminating closed form, other orders the
/// integral representation int_0^inf exp(-x cosh t) cosh(nu t) dt.
double bessel_k(double nu, double x);

/// Gauss hypergeometric 2F1(a, b; c; x) on the branch x <= 0.
double hyp2f1(double a, double b, double c, double x);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  // absolute
    std::size_t evaluations = 0;
};

inline constexpr std::size_t kQuadratureBudget = 1'000'000;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [lo, hi].
/// Stops once the summed error estimate is below max(abs_tol, rel_tol*|value|);
/// throws QuadratureError if `max_evaluations` integrand calls are not enough.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double abs_tol, double rel_tol,
                                    std::size_t max_evaluations = kQuadratureBudget);

/// Integral over [lo, +inf) through the map s = lo + u / (1 - u), u in [0, 1).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double lo,
                                       double abs_tol, double rel_tol,
                                       std::size_t max_evaluations = kQuadratureBudget);

}  // namespace shortgp::special
