#include "mrpc/linalg.hpp"

#include <cmath>
#include <limits>

namespace mrpc::linalg {

RowVectorXd column_means(const MatrixXd& a) {
    if (a.rows() == 0) {
        return RowVectorXd::Zero(a.cols());
    }
    return a.colwise().mean();
}

MatrixXd center(const MatrixXd& a, const RowVectorXd& means) {
    return a.rowwise() - means;
}

MatrixXd cross_covariance(const MatrixXd& a_centered, const MatrixXd& b_centered) {
    const double denom = static_cast<double>(a_centered.rows() - 1);
    return (a_centered.transpose() * b_centered) / denom;
}

MatrixXd symmetrize(const MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

double condition_number(const MatrixXd& sym) {
    if (sym.rows() == 0) {
        return 1.0;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(sym.rows() - 1);
    if (!(lo > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

MatrixXd regularize(const MatrixXd& sym) {
    if (sym.rows() == 0 || condition_number(sym) <= kMaxCondition) {
        return sym;
    }
    const double ridge = kRidgeScale * sym.trace() / static_cast<double>(sym.rows());
    MatrixXd out = sym;
    out.diagonal().array() += ridge;
    return out;
}

MatrixXd spd_solve(const MatrixXd& sym, const MatrixXd& rhs) {
    const MatrixXd a = regularize(sym);
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        // Indefinite after the ridge: fall back to a pivoted LDL^T.
        return a.ldlt().solve(rhs);
    }
    return llt.solve(rhs);
}

MatrixXd spd_inverse(const MatrixXd& sym) {
    return symmetrize(spd_solve(sym, MatrixXd::Identity(sym.rows(), sym.cols())));
}

MatrixXd random_orthogonal(Index k, Rng& rng) {
    if (k == 0) {
        return MatrixXd(0, 0);
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd a(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            a(i, j) = normal(rng);
        }
    }
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ();
    const MatrixXd& r = qr.matrixQR();
    for (Index j = 0; j < k; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

Index numerical_rank(const VectorXd& singular_values, Index rows, Index cols) {
    if (singular_values.size() == 0) {
        return 0;
    }
    const double tol = static_cast<double>(std::max(rows, cols)) *
                       std::numeric_limits<double>::epsilon() * singular_values(0);
    Index r = 0;
    for (Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values(i) > tol) {
            ++r;
        }
    }
    return r;
}

double log_det_spd(const MatrixXd& sym) {
    if (sym.rows() == 0) {
        return 0.0;
    }
    Eigen::LLT<MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const auto diag = llt.matrixLLT().diagonal();
    double out = 0.0;
    for (Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0) || !std::isfinite(diag(i))) {
            return std::numeric_limits<double>::infinity();
        }
        out += 2.0 * std::log(diag(i));
    }
    return out;
}

}  // namespace mrpc::linalg
