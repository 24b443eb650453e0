#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mrpc {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

enum class Method { PCR, PLS1, PLS2, Xenv, Senv };

std::string_view method_name(Method m);
/// Case-insensitive; throws ParameterError on unknown names.
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();
int method_index(Method m);

/// Leading principal directions of the centered predictors.
struct PreReduction {
    MatrixXd e_k;          // p x k, orthonormal columns
    int k = 0;
    double explained = 0.0;  // cumulative variance fraction of the k components
    RowVectorXd x_mean;
};

struct PreReducedData {
    MatrixXd scores;  // centered x * e_k
    PreReduction reduction;
};

struct FittedModel {
    Method method = Method::PCR;
    int ncomp = 0;         // components actually used
    MatrixXd beta_hat;     // p x m
    VectorXd intercept;    // m
    bool prereduced = false;
    int reduced_k = 0;
    bool saturated = false;  // requested more components than the data supports

    MatrixXd predict(const MatrixXd& x) const;
};

struct EstimatorOptions {
    double prereduce_threshold = 0.975;
    int senv_resp_dim = 2;
};

/// SIMPLS weights R (p x A) and y-loadings Q (m x A) on centered data;
/// coefficients with a components are R_a Q_a'. Fewer than the requested
/// components are returned when x'y is exhausted (the fit is then already
/// the least-squares fit).
struct SimplsResult {
    MatrixXd weights;
    MatrixXd y_loadings;
    int ncomp = 0;

    MatrixXd coefficients(int a) const;
};

SimplsResult simpls(const MatrixXd& x_centered, const MatrixXd& y_centered, int ncomp);

FittedModel fit_pcr(const MatrixXd& x, const MatrixXd& y, int ncomp);
FittedModel fit_pls1(const MatrixXd& x, const MatrixXd& y, int ncomp);
FittedModel fit_pls2(const MatrixXd& x, const MatrixXd& y, int ncomp);

/// Smallest k whose cumulative explained variance reaches `threshold`.
PreReducedData pca_prereduce(const MatrixXd& x, double threshold = 0.975);
/// e_k * alpha_hat.
MatrixXd backtransform(const PreReduction& pre, const MatrixXd& alpha_hat);

/// Predictor envelope. Predictors are replaced by pre-reduction scores when
/// p >= n, in which case ncomp <= k is required.
FittedModel fit_xenv(const MatrixXd& x, const MatrixXd& y, int ncomp, double threshold = 0.975);
/// Simultaneous envelope with response-envelope dimension resp_dim.
FittedModel fit_senv(const MatrixXd& x, const MatrixXd& y, int ncomp, int resp_dim = 2,
                     double threshold = 0.975);

FittedModel fit(Method method, const MatrixXd& x, const MatrixXd& y, int ncomp,
                const EstimatorOptions& options = {});

/// Largest component count `method` accepts on (x, y).
int max_components(Method method, const MatrixXd& x, const MatrixXd& y,
                   const EstimatorOptions& options = {});

struct PathEntry {
    std::optional<FittedModel> model;
    std::string error;  // set when the fit failed
};

/// Fits for ncomp = 0..lmax sharing decompositions across counts. Counts
/// beyond max_components reuse the largest feasible fit, flagged saturated.
/// A failure at one count never affects the others.
std::vector<PathEntry> fit_path(Method method, const MatrixXd& x, const MatrixXd& y, int lmax,
                                const EstimatorOptions& options = {});

/// Header line `# method=...,ncomp=...` then term rows (intercept, x1..xp).
void write_fitted_model_csv(std::ostream& os, const FittedModel& model);

}  // namespace mrpc
