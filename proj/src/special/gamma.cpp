#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <array>
#include <cmath>

namespace shortgp::special {

namespace {

// Lanczos approximation, g = 7, nine coefficients.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

double lanczos_log_gamma(double x) {
    // Valid for x >= 0.5.
    x -= 1.0;
    double a = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (x + static_cast<double>(i));
    const double t = x + kLanczosG + 0.5;
    return kHalfLog2Pi + (x + 0.5) * std::log(t) - t + std::log(a);
}

bool is_non_positive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x < 0.5) return lanczos_log_gamma(x + 1.0) - std::log(x);
    return lanczos_log_gamma(x);
}

double gamma(double x) {
    if (std::isnan(x)) return x;
    if (is_non_positive_integer(x)) throw DomainError("gamma: pole at non-positive integer");
    if (x > 0.0) {
        if (x == std::floor(x) && x <= 20.0) {
            double f = 1.0;
            for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
            return f;
        }
        return std::exp(log_gamma(x));
    }
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    return kPi / (std::sin(kPi * x) * gamma(1.0 - x));
}

double reciprocal_gamma(double x) {
    if (is_non_positive_integer(x)) return 0.0;
    return 1.0 / gamma(x);
}

}  // namespace shortgp::special
