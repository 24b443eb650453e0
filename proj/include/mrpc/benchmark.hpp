#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mrpc/estimators.hpp"
#include "mrpc/simrel.hpp"

namespace mrpc {

struct DesignPoint {
    int design_id = 1;
    int p = 20;
    double gamma = 0.2;
    double eta = 0.0;
    std::vector<int> relpos{1, 2, 3, 4};
    int n = 100;
    int m = 4;
    double r2 = 0.8;
    int q = 0;  // 0 means q = p

    SimulationParams params() const;
    std::string relpos_label() const;
};

/// Factor levels of the simulation grid. Common parameters default to the
/// benchmark's fixed values (n = 100, m = 4, R^2 = 0.8).
struct GridLevels {
    std::vector<int> p{20, 250};
    std::vector<double> gamma{0.2, 0.9};
    std::vector<double> eta{0.0, 0.4, 0.8, 1.2};
    std::vector<std::vector<int>> relpos{{1, 2, 3, 4}, {5, 6, 7, 8}};
    int n = 100;
    int m = 4;
    double r2 = 0.8;
    std::optional<int> q;
};

/// Full factorial in the order p (slowest), gamma, eta, relpos (fastest);
/// design ids are 1-based positions in that order.
std::vector<DesignPoint> design_grid(const GridLevels& levels = {});

/// Evaluates 1 + (b - b_hat)' S (b - b_hat) / s2 per response against
/// fixed true parameters; the Cholesky factor of S is computed once.
class PredictionErrorEvaluator {
public:
    PredictionErrorEvaluator(Eigen::MatrixXd beta_true, const Eigen::MatrixXd& sigma_xx,
                             Eigen::VectorXd sigma2_cond);
    /// Uses the exact factor Lambda^(1/2) R of sigma_xx = R' Lambda R, so a
    /// numerically singular sigma_xx is fine.
    static PredictionErrorEvaluator for_population(const PopulationModel& pop);
    Eigen::VectorXd operator()(const Eigen::MatrixXd& beta_hat) const;

private:
    PredictionErrorEvaluator() = default;
    void check_shapes() const;

    Eigen::MatrixXd beta_true_;
    Eigen::MatrixXd chol_upper_;  // U with S = U'U
    Eigen::VectorXd sigma2_cond_;
};

Eigen::VectorXd prediction_error(const Eigen::MatrixXd& beta_true, const Eigen::MatrixXd& beta_hat,
                                 const Eigen::MatrixXd& sigma_xx, const Eigen::VectorXd& sigma2_cond);

enum class RowStatus { Ok, Saturated, Failed, DryRun };
std::string_view status_name(RowStatus s);

struct PERow {
    int design_id = 0;
    Method method = Method::PCR;
    int rep = 0;
    int ncomp = 0;
    Eigen::VectorXd pe;  // NaN entries when the fit failed
    RowStatus status = RowStatus::Ok;
};

struct PETable {
    std::vector<DesignPoint> designs;
    std::vector<Method> methods;
    int replicates = 0;
    int lmax = 0;
    int m = 0;
    std::vector<PERow> rows;  // ordered by (design, method, rep, ncomp)
    std::vector<std::string> failures;

    const DesignPoint& design(int design_id) const;
};

struct ExperimentConfig {
    int replicates = 50;
    int lmax = 10;
    std::uint64_t master_seed = 1;
    std::vector<Method> methods = all_methods();
    EstimatorOptions estimator;
    int workers = 1;
    /// When false every method gets its own independently simulated
    /// population and training set per replicate.
    bool shared_datasets = false;
    /// Enumerate the row keys only; pe is set to 1 and nothing is fitted.
    bool dry_run = false;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct TaskSeeds {
    std::uint64_t population = 0;
    std::uint64_t sample = 0;
};

/// method_slot is 0 for datasets shared by all methods and
/// 1 + method_index otherwise.
TaskSeeds task_seeds(std::uint64_t master_seed, int design_id, int rep, int method_slot);

PETable run_experiment(const std::vector<DesignPoint>& grid, const ExperimentConfig& config);

struct CellMinimum {
    int design_id = 0;
    Method method = Method::PCR;
    int response = 0;       // 0-based
    int ncomp = 0;          // l_o
    double mean_pe = 0.0;   // minimized replicate average
};

struct ErrorRow {
    int design_id = 0;
    Method method = Method::PCR;
    int rep = 0;
    Eigen::VectorXd u;
    std::vector<int> selected;  // l_o per response
};

struct ErrorDataset {
    std::vector<DesignPoint> designs;
    int m = 0;
    std::vector<ErrorRow> rows;
    std::vector<CellMinimum> minima;
};

struct ComponentRow {
    int design_id = 0;
    Method method = Method::PCR;
    int rep = 0;
    std::vector<int> v;      // per-replicate argmin of pe over ncomp
    Eigen::VectorXd min_pe;  // pe at v
};

struct ComponentDataset {
    std::vector<DesignPoint> designs;
    int m = 0;
    std::vector<ComponentRow> rows;
};

/// Per (design, method, response): replicate-average pe for every ncomp
/// (missing values excluded, denominators adjusted), l_o = argmin with ties
/// to the smallest count; each replicate's pe at l_o becomes u.
ErrorDataset build_error_dataset(const PETable& table);
ComponentDataset build_component_dataset(const PETable& table);

void write_raw_pe_csv(std::ostream& os, const PETable& table);
void write_error_dataset_csv(std::ostream& os, const ErrorDataset& data);
void write_component_dataset_csv(std::ostream& os, const ComponentDataset& data);

}  // namespace mrpc
