#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpc/rng.hpp"

namespace mrpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Parameters of the multi-response linear model simulation.
///
/// Index sets are 1-based, as users write them. `relpos` lists the predictor
/// components that carry covariance with the single informative response
/// component; `ypos` partitions the response components into groups that are
/// mixed together by the response rotation.
struct SimulationParams {
    int n = 100;
    int p = 20;
    int m = 4;
    int q = 20;
    std::vector<int> relpos{1, 2, 3, 4};
    std::vector<std::vector<int>> ypos{{1, 2, 3, 4}};
    double eta = 0.0;
    double gamma = 0.2;
    double r2 = 0.8;
    std::uint64_t master_seed = 0;

    /// Throws ParameterError on the first violated invariant.
    void validate() const;
};

/// True parameters of the joint Gaussian model of (y, x) and its latent
/// rotation (w, z) = (Q y, R x). Means are zero.
struct PopulationModel {
    VectorXd lambda;          // predictor component eigenvalues, diag of Sigma_zz
    VectorXd kappa;           // response component eigenvalues, diag of Sigma_ww
    MatrixXd sigma_zw;        // p x m latent cross-covariance
    MatrixXd rot_R;           // p x p, z = R x
    MatrixXd rot_Q;           // m x m, w = Q y
    MatrixXd sigma_xx;
    MatrixXd sigma_yy;
    MatrixXd sigma_xy;
    MatrixXd beta;            // p x m
    MatrixXd sigma_y_given_x; // m x m
    VectorXd sigma2_cond;     // diagonal of sigma_y_given_x
    VectorXd mu_x;
    VectorXd mu_y;

    int p() const { return static_cast<int>(lambda.size()); }
    int m() const { return static_cast<int>(kappa.size()); }

    /// diag(lambda)^-1 * sigma_zw, the latent regression coefficients.
    MatrixXd latent_alpha() const;
    /// (m + p) square covariance of the latent vector (w, z).
    MatrixXd latent_joint_covariance() const;
    /// (m + p) square covariance of the observed vector (y, x).
    MatrixXd joint_covariance() const;
    /// Latent coefficient of determination of a response component (0-based).
    double latent_r2(int component = 0) const;
};

struct Dataset {
    MatrixXd x;
    MatrixXd y;
    int design_id = 0;
    int replicate_id = 0;
};

/// lambda_i = exp(-gamma (i - 1)), i = 1..p.
VectorXd eigenvalues_gamma(int p, double gamma);
/// kappa_j = exp(-eta (j - 1)), j = 1..m.
VectorXd eigenvalues_eta(int m, double eta);

struct PopulationOptions {
    bool identity_rotations = false;  // test hook: R = I, Q = I
};

/// Derives every covariance block from the latent description. Throws
/// NumericalError when the joint covariance is not positive definite.
PopulationModel assemble_population(VectorXd lambda, VectorXd kappa, MatrixXd sigma_zw,
                                    MatrixXd rot_R, MatrixXd rot_Q);

PopulationModel build_population(const SimulationParams& params, Rng& rng,
                                 const PopulationOptions& options = {});

/// n i.i.d. rows from the joint Gaussian: latent (w, z) via the Cholesky
/// factor of the latent covariance, then y = Q' w and x = R' z.
Dataset sample_dataset(const PopulationModel& pop, int n, Rng& rng);

/// Scaled absolute covariance tables, each normalized to max 1 (all-zero
/// tables stay zero). Rows index predictors, columns responses.
struct CovarianceDiagnostics {
    MatrixXd pop_components;         // |cov(z, w)|
    MatrixXd pop_component_response; // |cov(z, y)|
    VectorXd pop_eigenvalues;        // lambda
    bool has_sample = false;
    MatrixXd sample_component_response; // |cov(sample PC scores, y)|
    MatrixXd sample_variable_response;  // |cov(x, y)|
    VectorXd sample_eigenvalues;        // of centered x'x / (n - 1), descending
};

CovarianceDiagnostics covariance_diagnostics(const PopulationModel& pop,
                                             const Dataset* sample = nullptr);

/// Text dump: one `#block <name> <rows> <cols>` header per matrix followed by
/// CSV rows with 17 significant digits. `#meta` lines carry free-form context.
void write_population(std::ostream& os, const PopulationModel& pop,
                      const std::vector<std::pair<std::string, std::string>>& meta = {});
PopulationModel read_population(std::istream& is);

void write_dataset_csv(std::ostream& os, const Dataset& data);

}  // namespace mrpc
