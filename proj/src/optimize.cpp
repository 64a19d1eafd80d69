#include "shortgp/optimize.hpp"

#include "shortgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shortgp {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr int kMaxBracketSteps = 40;
constexpr int kMaxZoomSteps = 40;

struct LineSearch {
    const Objective& objective;
    const Eigen::VectorXd& x;
    const Eigen::VectorXd& direction;
    double f0;
    double slope0;  // directional derivative at 0, negative
    int evaluations = 0;

    struct Point {
        double alpha = 0.0;
        std::optional<Evaluation> eval;
        double phi = std::numeric_limits<double>::infinity();
        double dphi = 0.0;
    };

    Point probe(double alpha) {
        Point p;
        p.alpha = alpha;
        ++evaluations;
        p.eval = objective(x + alpha * direction);
        if (p.eval && std::isfinite(p.eval->value) && p.eval->gradient.allFinite()) {
            p.phi = p.eval->value;
            p.dphi = p.eval->gradient.dot(direction);
        } else {
            p.eval.reset();
        }
        return p;
    }

    bool sufficient(const Point& p) const { return p.eval && p.phi <= f0 + kArmijo * p.alpha * slope0; }
    bool curved(const Point& p) const { return std::abs(p.dphi) <= -kCurvature * slope0; }

    // Returns a point satisfying the strong Wolfe conditions, or failing that
    // the best point with sufficient decrease seen, or nothing.
    std::optional<Point> run(double first_alpha, double max_alpha) {
        Point previous;
        previous.alpha = 0.0;
        previous.phi = f0;
        previous.dphi = slope0;
        previous.eval = Evaluation{};  // marker: phi(0) is finite
        std::optional<Point> best;

        double alpha = first_alpha;
        for (int i = 0; i < kMaxBracketSteps; ++i) {
            Point current = probe(alpha);
            if (sufficient(current) && (!best || current.phi < best->phi)) best = current;
            if (!sufficient(current) || (i > 0 && current.phi >= previous.phi)) {
                return zoom(previous, current, best);
            }
            if (curved(current)) return current;
            if (current.dphi >= 0.0) return zoom(current, previous, best);
            if (alpha >= max_alpha) return best;
            previous = current;
            alpha = std::min(2.0 * alpha, max_alpha);
        }
        return best;
    }

    std::optional<Point> zoom(Point lo, Point hi, std::optional<Point> best) {
        for (int i = 0; i < kMaxZoomSteps; ++i) {
            const double width = hi.alpha - lo.alpha;
            double alpha = 0.5 * (lo.alpha + hi.alpha);
            if (hi.eval) {
                // Minimizer of the quadratic through phi(lo), phi'(lo), phi(hi).
                const double denom = 2.0 * (hi.phi - lo.phi - lo.dphi * width);
                if (denom > 0.0) {
                    const double candidate = lo.alpha - lo.dphi * width * width / denom;
                    const double a = std::min(lo.alpha, hi.alpha);
                    const double b = std::max(lo.alpha, hi.alpha);
                    const double margin = 0.1 * (b - a);
                    if (candidate > a + margin && candidate < b - margin) alpha = candidate;
                }
            }
            if (std::abs(width) < 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
            Point current = probe(alpha);
            if (sufficient(current) && (!best || current.phi < best->phi)) best = current;
            if (!sufficient(current) || current.phi >= lo.phi) {
                hi = current;
            } else {
                if (curved(current)) return current;
                if (current.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = current;
            }
        }
        return best;
    }
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

OptimizerResult minimize_bfgs(const Objective& objective, Eigen::VectorXd start,
                              const OptimizerOptions& options) {
    OptimizerResult result;
    auto first = objective(start);
    result.evaluations = 1;
    if (!first || !std::isfinite(first->value) || !first->gradient.allFinite()) {
        throw ConvergenceError("optimizer: objective is not finite at the starting point");
    }
    result.x = std::move(start);
    result.at = std::move(*first);

    const auto dim = result.x.size();
    Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(dim, dim);
    bool identity_hessian = true;

    for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
        const Eigen::VectorXd& g = result.at.gradient;
        if (inf_norm(g) < options.gradient_tolerance) {
            result.converged = true;
            result.status = "gradient tolerance reached";
            return result;
        }
        Eigen::VectorXd direction = -inverse_hessian * g;
        double slope = g.dot(direction);
        if (!(slope < 0.0)) {
            inverse_hessian.setIdentity();
            identity_hessian = true;
            direction = -g;
            slope = -g.squaredNorm();
        }
        const double max_alpha = options.max_step / inf_norm(direction);
        LineSearch search{objective, result.x, direction, result.at.value, slope};
        auto step = search.run(std::min(1.0, max_alpha), max_alpha);
        result.evaluations += search.evaluations;

        if (!step) {
            if (!identity_hessian) {
                inverse_hessian.setIdentity();
                identity_hessian = true;
                continue;
            }
            result.status = "line search failed";
            return result;
        }

        const Eigen::VectorXd s = step->alpha * direction;
        const Eigen::VectorXd y = step->eval->gradient - g;
        const double previous_value = result.at.value;
        result.x += s;
        result.at = std::move(*step->eval);

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (identity_hessian) inverse_hessian *= sy / y.squaredNorm();
            identity_hessian = false;
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
            inverse_hessian = left * inverse_hessian * left.transpose() + rho * s * s.transpose();
        }

        const double change = std::abs(result.at.value - previous_value);
        if (change < options.relative_tolerance * std::max(1.0, std::abs(previous_value))) {
            result.converged = true;
            result.status = "objective change below tolerance";
            ++result.iterations;
            return result;
        }
    }
    result.converged = inf_norm(result.at.gradient) < options.gradient_tolerance;
    result.status = result.converged ? "gradient tolerance reached" : "iteration limit reached";
    return result;
}

}  // namespace shortgp
