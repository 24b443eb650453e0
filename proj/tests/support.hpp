#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "mrpc/rng.hpp"

namespace mrpc::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> nd;
    MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = nd(rng);
    }
    return out;
}

inline MatrixXd center_columns(const MatrixXd& a) { return a.rowwise() - a.colwise().mean(); }

/// Least squares via the normal equations on centered data.
inline MatrixXd ols(const MatrixXd& x, const MatrixXd& y) {
    const MatrixXd xc = center_columns(x);
    const MatrixXd yc = center_columns(y);
    return (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
}

inline double frobenius_gap(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm(); }

/// Correlated predictors and a noisy linear response, full rank for n > p.
struct Instance {
    MatrixXd x;
    MatrixXd y;
    MatrixXd beta;
};

inline Instance random_instance(int n, int p, int m, std::uint64_t seed, double noise = 0.5) {
    Rng rng(seed);
    Instance inst;
    const MatrixXd mix = standard_normal(p, p, rng) * 0.4 + MatrixXd::Identity(p, p);
    inst.x = standard_normal(n, p, rng) * mix;
    inst.x.rowwise() += standard_normal(1, p, rng).row(0);
    inst.beta = standard_normal(p, m, rng);
    inst.y = inst.x * inst.beta + noise * standard_normal(n, m, rng);
    return inst;
}

/// Random orthonormal d x k basis.
inline MatrixXd random_basis(int d, int k, Rng& rng) {
    Eigen::HouseholderQR<MatrixXd> qr(standard_normal(d, d, rng));
    return MatrixXd(qr.householderQ()).leftCols(k);
}

/// Largest principal angle between the spans of two orthonormal bases.
inline double max_principal_angle(const MatrixXd& a, const MatrixXd& b) {
    Eigen::JacobiSVD<MatrixXd> svd(a.transpose() * b);
    const double smin = std::min(1.0, svd.singularValues().minCoeff());
    return std::acos(smin);
}

}  // namespace mrpc::testing
