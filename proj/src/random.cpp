#include "shortgp/random.hpp"

#include "shortgp/special.hpp"

#include <cmath>

namespace shortgp::random {

double uniform(std::uint64_t k) {
    // 53 random mantissa bits, shifted off zero.
    const std::uint64_t bits = mix(k) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t k) {
    const double u1 = uniform(key({k, 1}));
    const double u2 = uniform(key({k, 2}));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * special::kPi * u2);
}

double log_uniform(std::uint64_t k, double lo, double hi) {
    const double a = std::log(lo);
    const double b = std::log(hi);
    return std::exp(a + (b - a) * uniform(k));
}

}  // namespace shortgp::random
