#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <array>
#include <cmath>

namespace shortgp::special {

namespace {

// Beyond |x| = 1/2 the direct series is replaced by the Pfaff transformation.
constexpr double kDirectSeriesLimit = 0.5;
// After Pfaff, z = x/(x-1) above this switches to the expansion around z = 1.
constexpr double kNearOneLimit = 0.75;
// Distance of c-a-b from an integer below which the connection formula is
// replaced by interpolation in b.
constexpr double kDegenerateWidth = 1e-3;
constexpr double kInterpolationStep = 4e-3;

bool is_non_positive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Plain hypergeometric series; terminates when a or b is a non-positive integer.
double series(double a, double b, double c, double z) {
    double term = 1.0;
    double sum = 1.0;
    int small_terms = 0;
    for (int k = 0; k < 20000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (term == 0.0) return sum;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) {
            if (++small_terms == 2) return sum;
        } else {
            small_terms = 0;
        }
    }
    throw ConvergenceError("hyp2f1: series did not converge");
}

// 2F1(a,b;c;z) for z in (0.75, 1) through the connection with w = 1 - z.
// `w` is passed separately because 1 - z is known more accurately than z.
double connection(double a, double b, double c, double w) {
    const double s = c - a - b;
    const double first = gamma(c) * gamma(s) * reciprocal_gamma(c - a) * reciprocal_gamma(c - b) *
                         series(a, b, 1.0 - s, w);
    const double second = std::pow(w, s) * gamma(c) * gamma(-s) * reciprocal_gamma(a) *
                          reciprocal_gamma(b) * series(c - a, c - b, 1.0 + s, w);
    return first + second;
}

double near_one(double a, double b, double c, double w) {
    if (is_non_positive_integer(a) || is_non_positive_integer(b)) {
        return series(a, b, c, 1.0 - w);
    }
    const double s = c - a - b;
    const double nearest = std::round(s);
    const double offset = s - nearest;
    if (std::abs(offset) >= kDegenerateWidth) return connection(a, b, c, w);

    // The function is analytic in b; interpolate from nodes where c-a-b sits
    // safely between integers.
    constexpr std::array<double, 4> nodes = {-2.0, -1.0, 1.0, 2.0};
    double value = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double node = nodes[i] * kInterpolationStep;
        double weight = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j == i) continue;
            const double other = nodes[j] * kInterpolationStep;
            weight *= (offset - other) / (node - other);
        }
        // s = nearest + node  <=>  b' = c - a - nearest - node
        value += weight * connection(a, c - a - nearest - node, c, w);
    }
    return value;
}

}  // namespace

double hyp2f1(double a, double b, double c, double x) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(x)) {
        throw DomainError("hyp2f1: arguments must be finite");
    }
    if (is_non_positive_integer(c)) throw DomainError("hyp2f1: c is a non-positive integer");
    if (x > 0.0) throw DomainError("hyp2f1: only the branch x <= 0 is supported");
    if (x == 0.0) return 1.0;
    if (-x <= kDirectSeriesLimit) return series(a, b, c, x);

    // Pfaff: 2F1(a,b;c;x) = (1-x)^{-a} 2F1(a, c-b; c; x/(x-1)).
    const double w = 1.0 / (1.0 - x);  // 1 - z
    const double z = -x * w;
    const double prefactor = std::pow(w, a);
    if (z <= kNearOneLimit) return prefactor * series(a, c - b, c, z);
    return prefactor * near_one(a, c - b, c, w);
}

}  // namespace shortgp::special
