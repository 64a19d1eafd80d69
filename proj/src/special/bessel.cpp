#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <cmath>

namespace shortgp::special {

namespace {

// Drop of the log-integrand below its peak at which the tail is truncated.
constexpr double kTailDepth = 60.0;

bool is_half_integer(double nu) {
    const double twice = 2.0 * nu;
    return twice == std::floor(twice) && std::fmod(twice, 2.0) == 1.0;
}

// K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_{k=0}^{n} (n+k)! / (k! (n-k)!) (2x)^{-k}
double bessel_k_half_integer(double nu, double x) {
    const int n = static_cast<int>(nu - 0.5);
    double coefficient = 1.0;
    double power = 1.0;
    double sum = 1.0;
    const double inv_2x = 0.5 / x;
    for (int k = 0; k < n; ++k) {
        coefficient *= static_cast<double>(n + k + 1) * static_cast<double>(n - k) /
                       static_cast<double>(k + 1);
        power *= inv_2x;
        sum += coefficient * power;
    }
    return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, integrated with the exponent
// shifted by its maximum so that the integrand peaks at ~1.
double bessel_k_integral(double nu, double x) {
    const double peak_t = nu > 0.0 ? std::asinh(nu / x) : 0.0;
    const double exponent = [&](double t) { return nu * t - x * std::cosh(t); }(peak_t);
    auto log_integrand = [&](double t) { return nu * t - x * std::cosh(t) - exponent; };
    auto integrand = [&](double t) {
        const double main = std::exp(log_integrand(t));
        const double mirror = std::exp(-nu * t - x * std::cosh(t) - exponent);
        return 0.5 * (main + mirror);
    };

    double width = 1.0;
    while (log_integrand(peak_t + width) > -kTailDepth) width *= 2.0;
    const double upper = peak_t + width;

    double total = 0.0;
    if (peak_t > 0.0) total += integrate_adaptive(integrand, 0.0, peak_t, 1e-300, 1e-13).value;
    total += integrate_adaptive(integrand, peak_t, upper, 1e-300, 1e-13).value;
    return std::exp(exponent) * total;
}

}  // namespace

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    nu = std::abs(nu);  // K_{-nu} = K_nu
    if (is_half_integer(nu)) return bessel_k_half_integer(nu, x);
    return bessel_k_integral(nu, x);
}

}  // namespace shortgp::special
