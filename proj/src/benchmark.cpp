#include "mrpc/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "mrpc/csv.hpp"
#include "mrpc/errors.hpp"

namespace mrpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SimulationParams DesignPoint::params() const {
    SimulationParams sp;
    sp.n = n;
    sp.p = p;
    sp.m = m;
    sp.q = q > 0 ? q : p;
    sp.relpos = relpos;
    sp.ypos = {{}};
    for (int j = 1; j <= m; ++j) sp.ypos[0].push_back(j);
    sp.eta = eta;
    sp.gamma = gamma;
    sp.r2 = r2;
    return sp;
}

std::string DesignPoint::relpos_label() const {
    return csv::format_index_set(relpos);
}

std::vector<DesignPoint> design_grid(const GridLevels& levels) {
    std::vector<DesignPoint> out;
    int id = 0;
    for (int p : levels.p) {
        for (double g : levels.gamma) {
            for (double e : levels.eta) {
                for (const auto& rp : levels.relpos) {
                    DesignPoint d;
                    d.design_id = ++id;
                    d.p = p;
                    d.gamma = g;
                    d.eta = e;
                    d.relpos = rp;
                    d.n = levels.n;
                    d.m = levels.m;
                    d.r2 = levels.r2;
                    d.q = levels.q.value_or(0);
                    out.push_back(std::move(d));
                }
            }
        }
    }
    return out;
}

PredictionErrorEvaluator::PredictionErrorEvaluator(MatrixXd beta_true, const MatrixXd& sigma_xx,
                                                   VectorXd sigma2_cond)
    : beta_true_(std::move(beta_true)), sigma2_cond_(std::move(sigma2_cond)) {
    if (sigma_xx.rows() != beta_true_.rows() || sigma_xx.cols() != beta_true_.rows()) {
        throw ParameterError("prediction error: dimension mismatch");
    }
    check_shapes();
    Eigen::LLT<MatrixXd> llt(sigma_xx);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("prediction error: sigma_xx is not positive definite");
    }
    chol_upper_ = llt.matrixU();
}

PredictionErrorEvaluator PredictionErrorEvaluator::for_population(const PopulationModel& pop) {
    if ((pop.lambda.array() <= 0.0).any()) {
        throw NumericalError("prediction error: predictor eigenvalues must be positive");
    }
    PredictionErrorEvaluator ev;
    ev.beta_true_ = pop.beta;
    ev.sigma2_cond_ = pop.sigma2_cond;
    if (pop.rot_R.rows() != pop.beta.rows()) throw ParameterError("prediction error: dimension mismatch");
    ev.check_shapes();
    ev.chol_upper_ = pop.lambda.cwiseSqrt().asDiagonal() * pop.rot_R;
    return ev;
}

void PredictionErrorEvaluator::check_shapes() const {
    if (sigma2_cond_.size() != beta_true_.cols()) throw ParameterError("prediction error: dimension mismatch");
    if ((sigma2_cond_.array() <= 0.0).any()) {
        throw ParameterError("prediction error: conditional variances must be positive");
    }
}

VectorXd PredictionErrorEvaluator::operator()(const MatrixXd& beta_hat) const {
    if (beta_hat.rows() != beta_true_.rows() || beta_hat.cols() != beta_true_.cols()) {
        throw ParameterError("prediction error: beta_hat has the wrong shape");
    }
    // ||U d||^2 is a sum of squares, so every entry is >= 1 in floating point.
    const MatrixXd ud = chol_upper_ * (beta_true_ - beta_hat);
    VectorXd out(beta_true_.cols());
    for (Index j = 0; j < out.size(); ++j) {
        out(j) = 1.0 + ud.col(j).squaredNorm() / sigma2_cond_(j);
    }
    return out;
}

VectorXd prediction_error(const MatrixXd& beta_true, const MatrixXd& beta_hat, const MatrixXd& sigma_xx,
                          const VectorXd& sigma2_cond) {
    return PredictionErrorEvaluator(beta_true, sigma_xx, sigma2_cond)(beta_hat);
}

std::string_view status_name(RowStatus s) {
    switch (s) {
        case RowStatus::Ok: return "ok";
        case RowStatus::Saturated: return "saturated";
        case RowStatus::Failed: return "failed";
        case RowStatus::DryRun: return "dry_run";
    }
    return "?";
}

const DesignPoint& PETable::design(int design_id) const {
    for (const auto& d : designs) {
        if (d.design_id == design_id) return d;
    }
    throw InputError("unknown design id " + std::to_string(design_id));
}

TaskSeeds task_seeds(std::uint64_t master_seed, int design_id, int rep, int method_slot) {
    const auto d = static_cast<std::uint64_t>(design_id);
    const auto r = static_cast<std::uint64_t>(rep);
    const auto s = static_cast<std::uint64_t>(method_slot);
    return {derive_seed(master_seed, {d, r, s, 0}), derive_seed(master_seed, {d, r, s, 1})};
}

namespace {

struct Task {
    std::size_t design_pos;
    Method method;
    int rep;
};

struct TaskResult {
    std::vector<PERow> rows;
    std::vector<std::string> failures;
};

TaskResult execute_task(const DesignPoint& design, const Task& task, const ExperimentConfig& cfg, int m) {
    TaskResult out;
    const int slot = cfg.shared_datasets ? 0 : 1 + method_index(task.method);
    auto make_row = [&](int l) {
        PERow row;
        row.design_id = design.design_id;
        row.method = task.method;
        row.rep = task.rep;
        row.ncomp = l;
        return row;
    };
    if (cfg.dry_run) {
        for (int l = 0; l <= cfg.lmax; ++l) {
            auto row = make_row(l);
            row.pe = VectorXd::Ones(m);
            row.status = RowStatus::DryRun;
            out.rows.push_back(std::move(row));
        }
        return out;
    }
    auto tag = [&](int l) {
        return "design " + std::to_string(design.design_id) + " method " +
               std::string(method_name(task.method)) + " rep " + std::to_string(task.rep) +
               (l >= 0 ? " ncomp " + std::to_string(l) : std::string()) + ": ";
    };
    try {
        const auto seeds = task_seeds(cfg.master_seed, design.design_id, task.rep, slot);
        Rng pop_rng(seeds.population);
        const auto pop = build_population(design.params(), pop_rng);
        Rng sample_rng(seeds.sample);
        const auto data = sample_dataset(pop, design.n, sample_rng);
        const auto evaluate = PredictionErrorEvaluator::for_population(pop);
        const auto path = fit_path(task.method, data.x, data.y, cfg.lmax, cfg.estimator);
        for (int l = 0; l <= cfg.lmax; ++l) {
            const auto& entry = path[static_cast<std::size_t>(l)];
            auto row = make_row(l);
            if (entry.model) {
                row.pe = evaluate(entry.model->beta_hat);
                row.status = entry.model->saturated ? RowStatus::Saturated : RowStatus::Ok;
            } else {
                row.pe = VectorXd::Constant(m, kNaN);
                row.status = RowStatus::Failed;
                out.failures.push_back(tag(l) + entry.error);
            }
            out.rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        out.rows.clear();
        for (int l = 0; l <= cfg.lmax; ++l) {
            auto row = make_row(l);
            row.pe = VectorXd::Constant(m, kNaN);
            row.status = RowStatus::Failed;
            out.rows.push_back(std::move(row));
        }
        out.failures.push_back(tag(-1) + e.what());
    }
    return out;
}

}  // namespace

PETable run_experiment(const std::vector<DesignPoint>& grid, const ExperimentConfig& cfg) {
    if (grid.empty()) throw ParameterError("design grid is empty");
    if (cfg.methods.empty()) throw ParameterError("no methods requested");
    if (cfg.replicates < 1) throw ParameterError("replicates must be >= 1");
    if (cfg.lmax < 0) throw ParameterError("lmax must be >= 0");
    const int m = grid.front().m;
    for (const auto& d : grid) {
        if (d.m != m) throw ParameterError("all designs must share the response count");
        d.params().validate();
    }

    std::vector<Task> tasks;
    for (std::size_t di = 0; di < grid.size(); ++di) {
        for (Method method : cfg.methods) {
            for (int r = 1; r <= cfg.replicates; ++r) tasks.push_back({di, method, r});
        }
    }
    std::vector<TaskResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            results[i] = execute_task(grid[tasks[i].design_pos], tasks[i], cfg, m);
            const std::size_t finished = done.fetch_add(1) + 1;
            if (cfg.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                cfg.progress(finished, tasks.size());
            }
        }
    };
    const int nworkers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(tasks.size())));
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    PETable table;
    table.designs = grid;
    table.methods = cfg.methods;
    table.replicates = cfg.replicates;
    table.lmax = cfg.lmax;
    table.m = m;
    table.rows.reserve(tasks.size() * static_cast<std::size_t>(cfg.lmax + 1));
    for (auto& res : results) {
        for (auto& row : res.rows) table.rows.push_back(std::move(row));
        for (auto& f : res.failures) table.failures.push_back(std::move(f));
    }
    return table;
}

namespace {

using CellKey = std::tuple<int, int, int, int>;  // design, method, rep, ncomp

struct IndexedTable {
    std::map<CellKey, const PERow*> rows;
    std::vector<int> reps;
};

IndexedTable index_table(const PETable& table) {
    IndexedTable idx;
    for (const auto& row : table.rows) {
        idx.rows[{row.design_id, method_index(row.method), row.rep, row.ncomp}] = &row;
    }
    for (int r = 1; r <= table.replicates; ++r) idx.reps.push_back(r);
    for (const auto& d : table.designs) {
        for (Method meth : table.methods) {
            for (int r : idx.reps) {
                for (int l = 0; l <= table.lmax; ++l) {
                    if (!idx.rows.count({d.design_id, method_index(meth), r, l})) {
                        throw InputError("incomplete replicate set: design " + std::to_string(d.design_id) +
                                         ", method " + std::string(method_name(meth)) + ", rep " +
                                         std::to_string(r) + ", ncomp " + std::to_string(l) + " missing");
                    }
                }
            }
        }
    }
    return idx;
}

std::string cell_name(int design_id, Method method, int response) {
    return "design " + std::to_string(design_id) + ", method " + std::string(method_name(method)) +
           ", response y" + std::to_string(response + 1);
}

}  // namespace

ErrorDataset build_error_dataset(const PETable& table) {
    const auto idx = index_table(table);
    ErrorDataset out;
    out.designs = table.designs;
    out.m = table.m;
    for (const auto& d : table.designs) {
        for (Method meth : table.methods) {
            const int mi = method_index(meth);
            std::vector<int> lo(static_cast<std::size_t>(table.m), -1);
            for (int j = 0; j < table.m; ++j) {
                double best = std::numeric_limits<double>::infinity();
                for (int l = 0; l <= table.lmax; ++l) {
                    double sum = 0.0;
                    int count = 0;
                    for (int r : idx.reps) {
                        const double v = idx.rows.at({d.design_id, mi, r, l})->pe(j);
                        if (std::isfinite(v)) {
                            sum += v;
                            ++count;
                        }
                    }
                    if (count == 0) continue;
                    const double mean = sum / count;
                    if (mean < best) {
                        best = mean;
                        lo[static_cast<std::size_t>(j)] = l;
                    }
                }
                if (lo[static_cast<std::size_t>(j)] < 0) {
                    throw NumericalError("no finite prediction errors for " + cell_name(d.design_id, meth, j));
                }
                out.minima.push_back({d.design_id, meth, j, lo[static_cast<std::size_t>(j)], best});
            }
            for (int r : idx.reps) {
                ErrorRow row;
                row.design_id = d.design_id;
                row.method = meth;
                row.rep = r;
                row.u = VectorXd(table.m);
                row.selected = lo;
                for (int j = 0; j < table.m; ++j) {
                    row.u(j) = idx.rows.at({d.design_id, mi, r, lo[static_cast<std::size_t>(j)]})->pe(j);
                }
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

ComponentDataset build_component_dataset(const PETable& table) {
    const auto idx = index_table(table);
    ComponentDataset out;
    out.designs = table.designs;
    out.m = table.m;
    for (const auto& d : table.designs) {
        for (Method meth : table.methods) {
            const int mi = method_index(meth);
            for (int r : idx.reps) {
                ComponentRow row;
                row.design_id = d.design_id;
                row.method = meth;
                row.rep = r;
                row.v.assign(static_cast<std::size_t>(table.m), -1);
                row.min_pe = VectorXd(table.m);
                for (int j = 0; j < table.m; ++j) {
                    double best = std::numeric_limits<double>::infinity();
                    for (int l = 0; l <= table.lmax; ++l) {
                        const double v = idx.rows.at({d.design_id, mi, r, l})->pe(j);
                        if (std::isfinite(v) && v < best) {
                            best = v;
                            row.v[static_cast<std::size_t>(j)] = l;
                        }
                    }
                    if (row.v[static_cast<std::size_t>(j)] < 0) {
                        throw NumericalError("no finite prediction errors for " + cell_name(d.design_id, meth, j) +
                                             ", rep " + std::to_string(r));
                    }
                    row.min_pe(j) = best;
                }
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

namespace {

void write_key(std::ostream& os, const DesignPoint& d, Method method, int rep) {
    os << d.design_id << ',' << d.p << ',' << csv::format_double(d.gamma) << ','
       << csv::format_double(d.eta) << ',' << d.relpos_label() << ',' << method_name(method) << ','
       << rep;
}

std::map<int, const DesignPoint*> design_lookup(const std::vector<DesignPoint>& designs) {
    std::map<int, const DesignPoint*> out;
    for (const auto& d : designs) out[d.design_id] = &d;
    return out;
}

}  // namespace

void write_raw_pe_csv(std::ostream& os, const PETable& table) {
    os << "design,p,gamma,eta,relpos,method,rep,ncomp";
    for (int j = 1; j <= table.m; ++j) os << ",pe_y" << j;
    os << ",status\n";
    const auto designs = design_lookup(table.designs);
    for (const auto& row : table.rows) {
        write_key(os, *designs.at(row.design_id), row.method, row.rep);
        os << ',' << row.ncomp;
        for (Index j = 0; j < row.pe.size(); ++j) os << ',' << csv::format_double(row.pe(j));
        os << ',' << status_name(row.status) << '\n';
    }
}

void write_error_dataset_csv(std::ostream& os, const ErrorDataset& data) {
    os << "design,p,gamma,eta,relpos,method,rep";
    for (int j = 1; j <= data.m; ++j) os << ",u_y" << j;
    for (int j = 1; j <= data.m; ++j) os << ",ncomp_y" << j;
    os << '\n';
    const auto designs = design_lookup(data.designs);
    for (const auto& row : data.rows) {
        write_key(os, *designs.at(row.design_id), row.method, row.rep);
        for (Index j = 0; j < row.u.size(); ++j) os << ',' << csv::format_double(row.u(j));
        for (int l : row.selected) os << ',' << l;
        os << '\n';
    }
}

void write_component_dataset_csv(std::ostream& os, const ComponentDataset& data) {
    os << "design,p,gamma,eta,relpos,method,rep";
    for (int j = 1; j <= data.m; ++j) os << ",v_y" << j;
    for (int j = 1; j <= data.m; ++j) os << ",pe_y" << j;
    os << '\n';
    const auto designs = design_lookup(data.designs);
    for (const auto& row : data.rows) {
        write_key(os, *designs.at(row.design_id), row.method, row.rep);
        for (int l : row.v) os << ',' << l;
        for (Index j = 0; j < row.min_pe.size(); ++j) os << ',' << csv::format_double(row.min_pe(j));
        os << '\n';
    }
}

}  // namespace mrpc
