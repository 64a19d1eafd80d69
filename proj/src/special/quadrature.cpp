#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace shortgp::special {

namespace {

// Kronrod 15-point abscissae; odd entries (1, 3, 5, 7) are the Gauss 7-point nodes.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;

    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod)) {
        throw QuadratureError("integrand is not finite on [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double abs_tol, double rel_tol,
                                    std::size_t max_evaluations) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("integrate_adaptive: need finite lo < hi");
    }
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || !(abs_tol > 0.0 || rel_tol > 0.0)) {
        throw DomainError("integrate_adaptive: tolerances must be non-negative, one of them positive");
    }
    constexpr std::size_t kPerSegment = 15;

    std::priority_queue<Segment> work;
    work.push(gauss_kronrod(f, lo, hi));
    std::size_t evaluations = kPerSegment;
    double value = work.top().value;
    double error = work.top().error;
    // Segments too narrow to split further no longer compete for refinement.
    double frozen_value = 0.0;
    double frozen_error = 0.0;

    while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
        if (work.empty()) break;
        if (evaluations + 2 * kPerSegment > max_evaluations) {
            throw QuadratureError("integrate_adaptive: no convergence within " +
                                  std::to_string(max_evaluations) + " evaluations (error estimate " +
                                  std::to_string(error) + ")");
        }
        const Segment worst = work.top();
        work.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi)) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        const Segment left = gauss_kronrod(f, worst.lo, mid);
        const Segment right = gauss_kronrod(f, mid, worst.hi);
        evaluations += 2 * kPerSegment;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        work.push(left);
        work.push(right);
    }

    // Re-sum from scratch to shed the drift of the running updates.
    double total = frozen_value;
    double total_error = frozen_error;
    while (!work.empty()) {
        total += work.top().value;
        total_error += work.top().error;
        work.pop();
    }
    if (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
        throw QuadratureError("integrate_adaptive: reached round-off limit with error estimate " +
                              std::to_string(total_error));
    }
    return {total, total_error, evaluations};
}

QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double lo,
                                       double abs_tol, double rel_tol,
                                       std::size_t max_evaluations) {
    auto mapped = [&](double u) {
        const double one_minus = 1.0 - u;
        const double s = lo + u / one_minus;
        const double value = f(s);
        return value == 0.0 ? 0.0 : value / (one_minus * one_minus);
    };
    return integrate_adaptive(mapped, 0.0, 1.0, abs_tol, rel_tol, max_evaluations);
}

}  // namespace shortgp::special
