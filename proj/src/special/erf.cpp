#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace shortgp::special {

namespace {

// Below this |x| the positive-term series is used, above it the continued fraction.
constexpr double kSeriesLimit = 2.5;

// erf(x) = 2x/sqrt(pi) * exp(-x^2) * sum_n (2x^2)^n / (1*3*...*(2n+1)), all terms positive.
double erf_series(double x) {
    const double two_x2 = 2.0 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 500; ++n) {
        term *= two_x2 / (2.0 * n + 1.0);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return 2.0 / kSqrtPi * x * std::exp(-x * x) * sum;
}

// erfc(x) for x >= kSeriesLimit via the Laplace continued fraction
// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
double erfc_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) / (kSqrtPi * f);
}

// Acklam's rational approximation of the standard normal quantile for q in [0.5, 1),
// with the upper tail passed as `tail` = 1 - q to avoid cancellation. Relative error ~1.2e-9.
double normal_quantile_upper(double tail) {
    constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                         -2.759285104469687e+02, 1.383577518672690e+02,
                                         -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                         -1.556989798598866e+02, 6.680131188771972e+01,
                                         -1.328068155288572e+01};
    constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                         -2.400758277161838e+00, -2.549732539343734e+00,
                                         4.374664141464968e+00,  2.938163982698783e+00};
    constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                         2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (tail < low) {
        const double r = std::sqrt(-2.0 * std::log(tail));
        return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
               ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    const double q = 0.5 - tail;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double erf(double x) {
    if (std::isnan(x)) return x;
    const double ax = std::abs(x);
    double value;
    if (ax < kSeriesLimit) {
        value = erf_series(ax);
    } else if (ax > 6.5) {
        value = 1.0;
    } else {
        value = 1.0 - erfc_continued_fraction(ax);
    }
    return x < 0 ? -value : value;
}

double erfc(double x) {
    if (std::isnan(x)) return x;
    if (x < kSeriesLimit) return 1.0 - erf(x);
    if (x > 27.3) return 0.0;
    return erfc_continued_fraction(x);
}

double erfinv(double p) {
    if (!(std::abs(p) < 1.0)) throw DomainError("erfinv: argument must lie in (-1, 1)");
    if (p == 0.0) return 0.0;
    const double ap = std::abs(p);
    const double one_minus = 1.0 - ap;

    // erf(x) = 2 Phi(x sqrt 2) - 1, so erfinv(p) = Phi^{-1}((1 + p)/2) / sqrt 2.
    double x = normal_quantile_upper(0.5 * one_minus) / kSqrt2;

    // One Newton step on erf; the residual is taken in the erfc form for the upper half.
    const double residual = ap < 0.5 ? erf(x) - ap : one_minus - erfc(x);
    const double slope = 2.0 / kSqrtPi * std::exp(-x * x);
    x -= residual / slope;
    return p < 0 ? -x : x;
}

}  // namespace shortgp::special
