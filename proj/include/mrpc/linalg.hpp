#pragma once

#include <Eigen/Dense>

#include "mrpc/rng.hpp"

namespace mrpc::linalg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Condition number above which a ridge is added before inversion.
inline constexpr double kMaxCondition = 1e12;
/// Ridge size relative to trace / dimension.
inline constexpr double kRidgeScale = 1e-8;

RowVectorXd column_means(const MatrixXd& a);
MatrixXd center(const MatrixXd& a, const RowVectorXd& means);

/// Cross-product a'b / (n - 1) of already centered blocks.
MatrixXd cross_covariance(const MatrixXd& a_centered, const MatrixXd& b_centered);

MatrixXd symmetrize(const MatrixXd& a);

/// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the
/// smallest eigenvalue is not positive.
double condition_number(const MatrixXd& sym);

/// Returns `sym` unchanged when well conditioned, otherwise
/// sym + 1e-8 * trace / dim * I.
MatrixXd regularize(const MatrixXd& sym);

/// Solves sym * X = rhs for symmetric positive (semi)definite `sym`,
/// applying the ridge rule first.
MatrixXd spd_solve(const MatrixXd& sym, const MatrixXd& rhs);
MatrixXd spd_inverse(const MatrixXd& sym);

/// Haar-distributed orthogonal matrix: QR of a standard normal matrix with
/// the triangular factor's diagonal forced positive.
MatrixXd random_orthogonal(Index k, Rng& rng);

/// Numerical rank from singular values (descending) of an n x p matrix.
Index numerical_rank(const VectorXd& singular_values, Index rows, Index cols);

/// log det of a symmetric positive definite matrix; +inf when the Cholesky
/// factorization fails or a pivot is not positive.
double log_det_spd(const MatrixXd& sym);

}  // namespace mrpc::linalg
