#include "shortgp/linalg.hpp"

#include "shortgp/errors.hpp"

#include <cmath>
#include <string>

namespace shortgp {

namespace {

// A pivot this small relative to the largest diagonal entry means the matrix
// is numerically singular even if the factorization formally succeeded.
constexpr double kPivotFloor = 1e-13;

bool usable(const Eigen::LLT<Eigen::MatrixXd>& llt, double max_diagonal) {
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < pivots.size(); ++i) {
        const double p = pivots(i);
        if (!std::isfinite(p) || p * p <= kPivotFloor * max_diagonal) return false;
    }
    return true;
}

}  // namespace

Eigen::MatrixXd JitteredCholesky::inverse() const {
    return llt.solve(Eigen::MatrixXd::Identity(llt.rows(), llt.cols()));
}

double JitteredCholesky::log_determinant() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

JitteredCholesky factorize_with_jitter(const Eigen::MatrixXd& matrix, double scale) {
    if (!matrix.allFinite()) throw FactorizationError("covariance matrix has non-finite entries");
    const double max_diagonal = matrix.diagonal().maxCoeff();
    JitteredCholesky result;
    result.llt.compute(matrix);
    if (usable(result.llt, max_diagonal)) return result;

    for (double factor = kJitterStart; factor <= kJitterLimit * (1.0 + 1e-9); factor *= 10.0) {
        const double jitter = factor * scale;
        Eigen::MatrixXd jittered = matrix;
        jittered.diagonal().array() += jitter;
        result.llt.compute(jittered);
        if (usable(result.llt, max_diagonal + jitter)) {
            result.jitter = jitter;
            return result;
        }
    }
    throw FactorizationError("Cholesky factorization failed after jitter up to " +
                             std::to_string(kJitterLimit * scale));
}

}  // namespace shortgp
