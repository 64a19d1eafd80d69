#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace shortgp {

/// Cholesky factor of a symmetric positive-definite matrix, with whatever
/// diagonal jitter was needed to obtain it.
struct JitteredCholesky {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;  // added to every diagonal element

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt.solve(rhs); }
    Eigen::MatrixXd inverse() const;
    double log_determinant() const;
};

inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterLimit = 1e-4;

/// Factorizes `matrix`; on failure retries with jitter 1e-10 * scale, growing
/// by 10x up to 1e-4 * scale. Throws FactorizationError when all attempts fail.
JitteredCholesky factorize_with_jitter(const Eigen::MatrixXd& matrix, double scale);

}  // namespace shortgp
