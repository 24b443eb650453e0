#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Rows of categorical factors plus a multivariate response.
struct FactorTable {
    std::vector<std::string> factor_names;
    std::vector<std::vector<std::string>> levels;  // per factor, in level order
    std::vector<std::vector<int>> codes;           // per factor, per row: index into levels
    MatrixXd responses;                            // rows x m
    std::vector<std::string> response_names;

    std::size_t rows() const { return static_cast<std::size_t>(responses.rows()); }
    int factor_position(const std::string& name) const;  // throws ParameterError
    /// Appends a factor, assigning level codes in order of first appearance
    /// unless `order` is given.
    void add_factor(const std::string& name, const std::vector<std::string>& values,
                    const std::vector<std::string>& order = {});
};

struct PcaResult {
    MatrixXd scores;              // n x rank
    MatrixXd loadings;            // m x rank, orthonormal columns
    VectorXd explained_variance;  // rank, non-increasing
    VectorXd explained_fraction;
    Eigen::RowVectorXd mean;
    int rank = 0;
    std::vector<std::string> warnings;
};

/// PCA on the sample covariance of centered data. Each loading's
/// largest-magnitude entry is made positive. Components with negligible
/// variance are dropped with a warning.
PcaResult pca_scores(const MatrixXd& data);

/// tr((E + H)^-1 H). Throws NumericalError when E + H is singular.
double pillai(const MatrixXd& h, const MatrixXd& e);
/// Sum of v / (1 + v) over eigenvalues v of E^-1 H (E positive definite).
double pillai_from_eigenvalues(const MatrixXd& h, const MatrixXd& e);

struct PillaiF {
    double f = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
};

/// F approximation for Pillai's trace with s = min(df_h, m),
/// m* = (|df_h - m| - 1) / 2 and n* = (df_e - m - 1) / 2.
PillaiF pillai_f_approx(double v, int df_h, int m, int df_e);

/// I_x(a, b) by continued fraction (relative tolerance 1e-12).
double regularized_incomplete_beta(double a, double b, double x);
/// P(F > f) for an F(df1, df2) variable.
double f_upper_tail(double f, double df1, double df2);

struct ManovaTerm {
    std::string name;          // factor names joined by ':'
    std::vector<int> factors;  // positions in the factor table
    int df = 0;
    MatrixXd h;
    double pillai = 0.0;
    double f_approx = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
};

struct ManovaResult {
    std::vector<ManovaTerm> terms;  // main effects, then 2-way, then 3-way, ...
    MatrixXd e;
    int residual_df = 0;
    MatrixXd total_ssp;  // centered total sums of squares and products
};

/// Balanced full-factorial MANOVA with sum-to-zero contrasts and all
/// interactions up to `max_order`. Throws ParameterError on unbalanced data.
ManovaResult manova(const FactorTable& data, int max_order = 3);

struct EffectCell {
    std::vector<std::string> levels;  // one per grouping factor
    std::size_t count = 0;
    VectorXd mean;
    VectorXd se;  // sd / sqrt(count); NaN for single-row cells
};

/// Cell means of every response per combination of the named factors. An
/// empty factor list gives the grand mean.
std::vector<EffectCell> effect_means(const FactorTable& data, const std::vector<std::string>& factors);

}  // namespace mrpc
