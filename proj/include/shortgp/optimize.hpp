#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>

namespace shortgp {

struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Objective to minimize. Returning nullopt marks the point as infeasible
/// (e.g. the covariance could not be factorized); the line search backs off.
using Objective = std::function<std::optional<Evaluation>(const Eigen::VectorXd&)>;

struct OptimizerOptions {
    double gradient_tolerance = 1e-6;   // on the infinity norm
    double relative_tolerance = 1e-10;  // on the objective change per iteration
    int max_iterations = 500;
    double max_step = 4.0;              // largest coordinate change per line search
};

struct OptimizerResult {
    Eigen::VectorXd x;
    Evaluation at;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string status;
};

/// BFGS with a strong-Wolfe line search. Throws ConvergenceError only if the
/// starting point itself is infeasible.
OptimizerResult minimize_bfgs(const Objective& objective, Eigen::VectorXd start,
                              const OptimizerOptions& options = {});

}  // namespace shortgp
