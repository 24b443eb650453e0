#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace mrpc {

using Eigen::MatrixXd;

/// log det(G' M G) + log det(G' N^-1 G) over d x u semi-orthogonal G.
///
/// For a predictor envelope M is the conditional covariance S_{x|y} and N
/// the marginal S_x; the response envelope swaps the roles of x and y.
struct EnvelopeObjective {
    MatrixXd m_mat;
    MatrixXd n_mat;
    int dim = 0;

    int ambient() const { return static_cast<int>(m_mat.rows()); }
    /// Throws ParameterError unless both matrices are symmetric, N is PD and
    /// 0 <= dim <= d.
    void validate() const;
};

/// Returns +inf when G' M G is singular or G has the wrong shape for `obj`.
double objective_value(const EnvelopeObjective& obj, const MatrixXd& g);

struct MinimizeOptions {
    double armijo = 1e-4;
    double shrink = 0.5;
    double tolerance = 1e-9;
    int max_iterations = 500;
};

struct OptimizerTracePoint {
    int direction = 0;  // 0-based index of the basis vector being solved
    int iteration = 0;
    double objective = 0.0;  // one-dimensional objective of that step
};

struct EnvelopeSolution {
    MatrixXd basis;  // d x u, orthonormal columns
    /// Best one-dimensional objective reached for each direction.
    std::vector<double> direction_objectives;
    /// Index into the deterministic restart order that won each direction.
    std::vector<int> winning_restart;
    /// Iterates of the winning restart of every direction.
    std::vector<OptimizerTracePoint> trace;
};

/// Greedy sequential construction: direction k minimizes
///   log(w' A_k w) + log(w' B_k^-1 w),  A_k = G0' M G0,  B_k = G0' N G0,
/// over unit w, where G0 spans the orthogonal complement of the directions
/// already found. Each solve is a projected descent on the sphere (Newton
/// direction of the tangent Hessian when it is positive definite, gradient
/// otherwise) with Armijo backtracking, started from every eigenvector of
/// A_k and B_k (ascending eigenvalue order); the lowest objective wins, ties
/// to the earliest restart. The first k columns of a dim-u solution are the
/// dim-k solution.
EnvelopeSolution minimize_envelope(const EnvelopeObjective& obj, const MinimizeOptions& options = {});

/// Basis only.
MatrixXd minimize(const EnvelopeObjective& obj, const MinimizeOptions& options = {});

void write_trace_csv(std::ostream& os, const std::vector<OptimizerTracePoint>& trace);

}  // namespace mrpc
