#include "mrpc/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "mrpc/analysis.hpp"
#include "mrpc/benchmark.hpp"
#include "mrpc/cli/config.hpp"
#include "mrpc/cli/svg.hpp"
#include "mrpc/csv.hpp"
#include "mrpc/errors.hpp"

namespace mrpc::cli {

namespace fs = std::filesystem;
using Eigen::Index;

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

void write_text(const fs::path& path, const std::string& text) {
    auto os = open_output(path);
    os << text;
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

csv::Table read_csv_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path.string() + "'");
    return csv::read_table(in, path.string());
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) {
        const Method m = parse_method(n);
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ParameterError("method '" + n + "' listed twice");
        }
        out.push_back(m);
    }
    return out;
}

RunConfig resolve_config(const CommandOptions& o) {
    RunConfig cfg = o.config ? load_config(*o.config) : RunConfig{};
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.workers) {
        if (*o.workers < 1) throw ParameterError("--workers must be >= 1");
        cfg.workers = *o.workers;
    }
    if (o.out) cfg.output_dir = *o.out;
    if (o.lmax) {
        if (*o.lmax < 0) throw ParameterError("--lmax must be >= 0");
        cfg.lmax = *o.lmax;
    }
    if (!o.methods.empty()) cfg.methods = parse_methods(o.methods);
    return cfg;
}

std::string design_tag(int id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%02d", id);
    return buf;
}

std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out.empty() ? "col" : out;
}

}  // namespace

void cmd_simulate(const CommandOptions& options, std::ostream& log) {
    const RunConfig cfg = resolve_config(options);
    const auto designs = cfg.designs();
    if (designs.empty()) {
        log << "no designs requested; nothing written\n";
        return;
    }
    const fs::path out = cfg.output_dir;
    for (const auto& d : designs) {
        const auto seeds = task_seeds(cfg.master_seed, d.design_id, 1, 0);
        Rng pop_rng(seeds.population);
        const auto pop = build_population(d.params(), pop_rng);
        Rng sample_rng(seeds.sample);
        auto data = sample_dataset(pop, d.n, sample_rng);
        data.design_id = d.design_id;
        data.replicate_id = 1;
        const std::string tag = design_tag(d.design_id);
        {
            auto os = open_output(out / ("population_" + tag + ".txt"));
            write_population(os, pop,
                             {{"design", std::to_string(d.design_id)},
                              {"p", std::to_string(d.p)},
                              {"gamma", csv::format_double(d.gamma)},
                              {"eta", csv::format_double(d.eta)},
                              {"relpos", d.relpos_label()},
                              {"master_seed", std::to_string(cfg.master_seed)}});
        }
        {
            auto os = open_output(out / ("dataset_" + tag + ".csv"));
            write_dataset_csv(os, data);
        }
    }
    log << "wrote " << designs.size() << " population dumps and datasets to " << out.string() << '\n';
}

void cmd_run(const CommandOptions& options, std::ostream& log) {
    const RunConfig cfg = resolve_config(options);
    const auto designs = cfg.designs();
    if (designs.empty()) throw ParameterError("no designs requested");

    ExperimentConfig ec;
    ec.replicates = cfg.replicates;
    ec.lmax = cfg.lmax;
    ec.master_seed = cfg.master_seed;
    ec.methods = cfg.methods;
    ec.estimator = cfg.estimator;
    ec.workers = cfg.workers;
    ec.shared_datasets = cfg.shared_datasets;
    ec.dry_run = options.dry_run;
    if (!options.quiet && !options.dry_run) {
        ec.progress = [&log, last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
            const std::size_t pct = total ? done * 100 / total : 100;
            if (pct >= last + 5 || done == total) {
                last = pct;
                log << "progress " << done << '/' << total << " (" << pct << "%)\n" << std::flush;
            }
        };
    }

    const auto t0 = std::chrono::steady_clock::now();
    const PETable table = run_experiment(designs, ec);
    const ErrorDataset err = build_error_dataset(table);
    const ComponentDataset comp = build_component_dataset(table);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::size_t failed = 0;
    std::size_t saturated = 0;
    for (const auto& r : table.rows) {
        if (r.status == RowStatus::Failed) ++failed;
        if (r.status == RowStatus::Saturated) ++saturated;
    }
    const fs::path out = cfg.output_dir;
    if (!options.dry_run) {
        {
            auto os = open_output(out / "raw_pe.csv");
            write_raw_pe_csv(os, table);
        }
        {
            auto os = open_output(out / "error_dataset.csv");
            write_error_dataset_csv(os, err);
        }
        {
            auto os = open_output(out / "component_dataset.csv");
            write_component_dataset_csv(os, comp);
        }
    }

    std::ostringstream rep;
    rep << "mode: " << (options.dry_run ? "dry-run" : "full") << '\n';
    rep << "master_seed: " << cfg.master_seed << '\n';
    rep << "designs: " << designs.size() << '\n';
    rep << "methods:";
    for (Method m : cfg.methods) rep << ' ' << method_name(m);
    rep << '\n';
    rep << "replicates: " << cfg.replicates << '\n';
    rep << "lmax: " << cfg.lmax << '\n';
    rep << "workers: " << cfg.workers << '\n';
    rep << "shared_datasets: " << (cfg.shared_datasets ? "true" : "false") << '\n';
    rep << "raw_rows: " << table.rows.size() << '\n';
    rep << "error_rows: " << err.rows.size() << '\n';
    rep << "component_rows: " << comp.rows.size() << '\n';
    rep << "saturated_rows: " << saturated << '\n';
    rep << "failed_rows: " << failed << '\n';
    rep << "wall_time_seconds: " << csv::format_double(wall) << '\n';
    for (const auto& f : table.failures) rep << "failure: " << f << '\n';
    write_text(out / "run_report.txt", rep.str());

    log << "raw rows: " << table.rows.size() << ", error rows: " << err.rows.size()
        << ", component rows: " << comp.rows.size() << ", failed rows: " << failed << '\n';
}

namespace {

const std::vector<std::string> kFactorNames{"p", "gamma", "eta", "relpos", "method"};

struct LoadedDataset {
    FactorTable table;
    std::vector<std::string> keys;  // "design,method,rep" per row
};

LoadedDataset load_factor_dataset(const fs::path& path, const std::string& prefix) {
    const csv::Table t = read_csv_file(path);
    LoadedDataset out;
    std::vector<std::size_t> resp_cols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c].rfind(prefix, 0) == 0) {
            resp_cols.push_back(c);
            out.table.response_names.push_back(t.header[c]);
        }
    }
    if (resp_cols.empty()) throw InputError(path.string() + ": no '" + prefix + "*' response columns");
    for (const auto& f : kFactorNames) {
        const std::size_t c = t.column(f);
        std::vector<std::string> values;
        for (const auto& row : t.rows) values.push_back(row[c]);
        out.table.add_factor(f, values);
    }
    const std::size_t cd = t.column("design");
    const std::size_t cm = t.column("method");
    const std::size_t cr = t.column("rep");
    out.table.responses.resize(static_cast<Index>(t.rows.size()), static_cast<Index>(resp_cols.size()));
    std::size_t missing = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < resp_cols.size(); ++j) {
            const double v = csv::parse_double(t.rows[i][resp_cols[j]]);
            if (!std::isfinite(v)) ++missing;
            out.table.responses(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
        out.keys.push_back(t.rows[i][cd] + "," + t.rows[i][cm] + "," + t.rows[i][cr]);
    }
    if (missing > 0) {
        throw InputError(path.string() + ": " + std::to_string(missing) + " missing response values");
    }
    return out;
}

/// Drops single-level factors, which carry no contrast.
FactorTable manova_view(const FactorTable& t, std::vector<std::string>& dropped) {
    FactorTable out;
    out.responses = t.responses;
    out.response_names = t.response_names;
    for (std::size_t f = 0; f < t.factor_names.size(); ++f) {
        if (t.levels[f].size() < 2) {
            dropped.push_back(t.factor_names[f]);
            continue;
        }
        out.factor_names.push_back(t.factor_names[f]);
        out.levels.push_back(t.levels[f]);
        out.codes.push_back(t.codes[f]);
    }
    return out;
}

void write_manova_csv(const fs::path& path, const ManovaResult& res) {
    auto os = open_output(path);
    os << "term,df,pillai,f,df1,df2,pvalue\n";
    for (const auto& t : res.terms) {
        os << t.name << ',' << t.df << ',' << csv::format_double(t.pillai) << ',' << csv::format_double(t.f_approx)
           << ',' << csv::format_double(t.df1) << ',' << csv::format_double(t.df2) << ','
           << csv::format_double(t.p_value) << '\n';
    }
    os << "Residuals," << res.residual_df << ",NA,NA,NA,NA,NA\n";
}

void write_pca(const fs::path& dir, const std::string& name, const LoadedDataset& data, const PcaResult& pca) {
    {
        auto os = open_output(dir / ("pca_scores_" + name + ".csv"));
        os << "design,method,rep";
        for (int k = 1; k <= pca.rank; ++k) os << ",pc" << k;
        os << '\n';
        for (Index i = 0; i < pca.scores.rows(); ++i) {
            os << data.keys[static_cast<std::size_t>(i)];
            for (Index k = 0; k < pca.scores.cols(); ++k) os << ',' << csv::format_double(pca.scores(i, k));
            os << '\n';
        }
    }
    auto os = open_output(dir / ("pca_summary_" + name + ".csv"));
    os << "component,variance,fraction";
    for (const auto& r : data.table.response_names) os << ",loading_" << r;
    os << '\n';
    for (int k = 0; k < pca.rank; ++k) {
        os << "pc" << (k + 1) << ',' << csv::format_double(pca.explained_variance(k)) << ','
           << csv::format_double(pca.explained_fraction(k));
        for (Index j = 0; j < pca.loadings.rows(); ++j) os << ',' << csv::format_double(pca.loadings(j, k));
        os << '\n';
    }
}

void write_effects_csv(const fs::path& path, const FactorTable& t, const std::vector<std::string>& factors,
                       const std::vector<EffectCell>& cells) {
    auto os = open_output(path);
    for (const auto& f : factors) os << f << ',';
    os << "count";
    for (const auto& r : t.response_names) os << ",mean_" << r;
    for (const auto& r : t.response_names) os << ",se_" << r;
    os << '\n';
    for (const auto& c : cells) {
        for (const auto& l : c.levels) os << l << ',';
        os << c.count;
        for (Index j = 0; j < c.mean.size(); ++j) os << ',' << csv::format_double(c.mean(j));
        for (Index j = 0; j < c.se.size(); ++j) os << ',' << csv::format_double(c.se(j));
        os << '\n';
    }
}

/// Effect plot: one panel per (response, panel factor level), x over the
/// levels of `x_factor`, one line per method.
std::string effect_svg(const FactorTable& t, const std::vector<std::string>& factors,
                       const std::vector<EffectCell>& cells, const std::string& title) {
    const std::size_t method_pos = 0;
    const std::size_t x_pos = factors.size() - 1;
    const bool has_panel_factor = factors.size() == 3;
    const auto& x_levels = t.levels[static_cast<std::size_t>(t.factor_position(factors[x_pos]))];
    std::vector<std::string> panel_levels{""};
    if (has_panel_factor) panel_levels = t.levels[static_cast<std::size_t>(t.factor_position(factors[1]))];

    std::vector<svg::Panel> panels;
    for (std::size_t r = 0; r < t.response_names.size(); ++r) {
        for (const auto& pl : panel_levels) {
            svg::Panel panel;
            panel.title = t.response_names[r] + (has_panel_factor ? " | " + factors[1] + "=" + pl : "");
            panel.x_ticks = x_levels;
            std::map<std::string, svg::Series> by_method;
            std::vector<std::string> order;
            for (const auto& c : cells) {
                if (has_panel_factor && c.levels[1] != pl) continue;
                const std::string& m = c.levels[method_pos];
                if (!by_method.count(m)) {
                    order.push_back(m);
                    by_method[m].label = m;
                }
                const auto xi = std::find(x_levels.begin(), x_levels.end(), c.levels[x_pos]) - x_levels.begin();
                by_method[m].x.push_back(static_cast<double>(xi));
                by_method[m].y.push_back(c.mean(static_cast<Index>(r)));
            }
            for (const auto& m : order) panel.series.push_back(by_method[m]);
            panels.push_back(std::move(panel));
        }
    }
    svg::PlotSpec spec;
    spec.title = title;
    spec.x_label = factors[x_pos];
    spec.y_label = "mean";
    spec.columns = static_cast<int>(panel_levels.size());
    return svg::line_plot(panels, spec);
}

/// Density of the first score per method, one curve per relpos level.
std::string density_svg(const FactorTable& t, const PcaResult& pca, const std::string& title) {
    const int fm = t.factor_position("method");
    const int fr = t.factor_position("relpos");
    std::vector<svg::Panel> panels;
    for (std::size_t m = 0; m < t.levels[static_cast<std::size_t>(fm)].size(); ++m) {
        svg::Panel panel;
        panel.title = t.levels[static_cast<std::size_t>(fm)][m];
        for (std::size_t r = 0; r < t.levels[static_cast<std::size_t>(fr)].size(); ++r) {
            std::vector<double> sample;
            for (std::size_t i = 0; i < t.rows(); ++i) {
                if (t.codes[static_cast<std::size_t>(fm)][i] == static_cast<int>(m) &&
                    t.codes[static_cast<std::size_t>(fr)][i] == static_cast<int>(r)) {
                    sample.push_back(pca.scores(static_cast<Index>(i), 0));
                }
            }
            if (sample.empty()) continue;
            const double bw = svg::silverman_bandwidth(sample);
            svg::Series s;
            s.label = "relpos " + t.levels[static_cast<std::size_t>(fr)][r];
            s.x = svg::kde_grid(sample, bw);
            s.y = svg::kde(sample, s.x, bw);
            panel.series.push_back(std::move(s));
        }
        panels.push_back(std::move(panel));
    }
    svg::PlotSpec spec;
    spec.title = title;
    spec.x_label = "PC1 score";
    spec.y_label = "density";
    return svg::line_plot(panels, spec);
}

void analyze_one(const fs::path& in, const fs::path& out, const std::string& file, const std::string& prefix,
                 const std::string& name, std::ostream& log) {
    const LoadedDataset data = load_factor_dataset(in / file, prefix);
    std::vector<std::string> dropped;
    const FactorTable view = manova_view(data.table, dropped);
    for (const auto& d : dropped) log << name << ": factor '" << d << "' has one level; left out of MANOVA\n";
    const ManovaResult res = manova(view, 3);
    write_manova_csv(out / ("manova_" + name + ".csv"), res);

    const PcaResult pca = pca_scores(data.table.responses);
    for (const auto& w : pca.warnings) log << name << ": PCA: " << w << '\n';
    write_pca(out, name, data, pca);
    write_text(out / ("density_" + name + "_pc1.svg"), density_svg(data.table, pca, "PC1 score density (" + name + ")"));

    const std::vector<std::vector<std::string>> effect_sets{{"method", "relpos", "eta"}, {"method", "gamma"}};
    for (const auto& fs_ : effect_sets) {
        std::string stem = "effects_" + name;
        for (const auto& f : fs_) stem += "_" + f;
        const auto cells = effect_means(data.table, fs_);
        write_effects_csv(out / (stem + ".csv"), data.table, fs_, cells);
        std::string title = name + ": ";
        for (std::size_t i = 0; i < fs_.size(); ++i) title += (i ? " x " : "") + fs_[i];
        write_text(out / (stem + ".svg"), effect_svg(data.table, fs_, cells, title));
    }
    log << name << ": " << res.terms.size() << " MANOVA terms, residual df " << res.residual_df << '\n';
}

}  // namespace

void cmd_analyze(const CommandOptions& options, std::ostream& log) {
    const fs::path in = !options.input_dir.empty() ? fs::path(options.input_dir)
                                                   : fs::path(options.out.value_or("results"));
    const fs::path out = options.out ? fs::path(*options.out) : in;
    for (const char* f : {"error_dataset.csv", "component_dataset.csv"}) {
        if (!fs::exists(in / f)) throw InputError("missing input file '" + (in / f).string() + "'");
    }
    analyze_one(in, out, "error_dataset.csv", "u_y", "error", log);
    analyze_one(in, out, "component_dataset.csv", "v_y", "component", log);
}

namespace {

struct RmsepRow {
    Method method;
    int ncomp;
    std::string response;
    double train;
    double test;
    std::string status;
};

void write_rmsep_svgs(const fs::path& out, const std::vector<RmsepRow>& rows,
                      const std::vector<std::string>& responses) {
    for (const auto& resp : responses) {
        std::map<std::string, svg::Series> series;
        std::vector<std::string> order;
        for (const auto& r : rows) {
            if (r.response != resp) continue;
            const std::string m(method_name(r.method));
            if (!series.count(m)) {
                order.push_back(m);
                series[m].label = m;
            }
            series[m].x.push_back(r.ncomp);
            series[m].y.push_back(r.test);
        }
        svg::Panel panel;
        panel.title = resp;
        for (const auto& m : order) panel.series.push_back(series[m]);
        svg::PlotSpec spec;
        spec.title = "Test RMSEP: " + resp;
        spec.x_label = "components";
        spec.y_label = "RMSEP";
        write_text(out / ("rmsep_" + safe_name(resp) + ".svg"), svg::line_plot({panel}, spec));
    }
}

MatrixXd numeric_block(const csv::Table& t, const std::vector<std::size_t>& cols, const std::string& source) {
    MatrixXd out(static_cast<Index>(t.rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double v = csv::parse_double(t.rows[i][cols[j]]);
            if (!std::isfinite(v)) {
                throw InputError(source + ": missing or non-finite value in row " + std::to_string(i + 2) +
                                 ", column '" + t.header[cols[j]] + "'");
            }
            out(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
    }
    return out;
}

}  // namespace

void cmd_rmsep(const CommandOptions& options, std::ostream& log) {
    if (options.train.empty() || options.test.empty()) throw ParameterError("rmsep needs --train and --test");
    if (options.y_cols.empty()) throw ParameterError("rmsep needs --y-cols");
    const int lmax = options.lmax.value_or(15);
    if (lmax < 1) throw ParameterError("--lmax must be >= 1");
    const std::vector<Method> methods = options.methods.empty() ? all_methods() : parse_methods(options.methods);
    EstimatorOptions est;
    if (options.config) {
        const RunConfig cfg = load_config(*options.config);
        est = cfg.estimator;
    }

    const csv::Table train = read_csv_file(options.train);
    const csv::Table test = read_csv_file(options.test);
    std::vector<std::size_t> ytr, yte, xtr, xte;
    for (const auto& y : options.y_cols) {
        if (!train.has_column(y)) throw InputError(options.train + ": response column '" + y + "' not found");
        if (!test.has_column(y)) throw InputError(options.test + ": response column '" + y + "' not found");
        ytr.push_back(train.column(y));
        yte.push_back(test.column(y));
    }
    for (std::size_t c = 0; c < train.header.size(); ++c) {
        const auto& name = train.header[c];
        if (std::find(options.y_cols.begin(), options.y_cols.end(), name) != options.y_cols.end()) continue;
        if (!test.has_column(name)) {
            throw InputError("column mismatch: predictor '" + name + "' is in '" + options.train + "' but not in '" +
                             options.test + "'");
        }
        xtr.push_back(c);
        xte.push_back(test.column(name));
    }
    const std::size_t test_predictors = test.header.size() - yte.size();
    if (xte.size() != test_predictors) {
        throw InputError("column mismatch: '" + options.test + "' has " + std::to_string(test_predictors) +
                         " predictors, '" + options.train + "' has " + std::to_string(xtr.size()));
    }
    if (xtr.empty()) throw InputError("no predictor columns in '" + options.train + "'");
    if (train.rows.size() < 3) throw InputError("rmsep needs at least 3 training rows");
    if (test.rows.empty()) throw InputError("'" + options.test + "' has no rows");

    const MatrixXd x_train = numeric_block(train, xtr, options.train);
    const MatrixXd y_train = numeric_block(train, ytr, options.train);
    const MatrixXd x_test = numeric_block(test, xte, options.test);
    const MatrixXd y_test = numeric_block(test, yte, options.test);

    auto rmsep = [](const MatrixXd& y, const MatrixXd& yhat) {
        return VectorXd(((y - yhat).array().square().colwise().mean()).sqrt().transpose());
    };

    std::vector<RmsepRow> rows;
    for (Method m : methods) {
        const auto path = fit_path(m, x_train, y_train, lmax, est);
        for (int a = 1; a <= lmax; ++a) {
            const auto& entry = path[static_cast<std::size_t>(a)];
            VectorXd tr = VectorXd::Constant(y_train.cols(), std::nan(""));
            VectorXd te = tr;
            std::string status = "failed";
            if (entry.model) {
                tr = rmsep(y_train, entry.model->predict(x_train));
                te = rmsep(y_test, entry.model->predict(x_test));
                status = entry.model->saturated ? "saturated" : "ok";
            } else {
                log << method_name(m) << " ncomp " << a << ": " << entry.error << '\n';
            }
            for (std::size_t j = 0; j < options.y_cols.size(); ++j) {
                rows.push_back({m, a, options.y_cols[j], tr(static_cast<Index>(j)), te(static_cast<Index>(j)), status});
            }
        }
    }

    const fs::path out = options.out.value_or("results");
    {
        auto os = open_output(out / "rmsep.csv");
        os << "method,ncomp,response,train_rmsep,test_rmsep,status\n";
        for (const auto& r : rows) {
            os << method_name(r.method) << ',' << r.ncomp << ',' << r.response << ',' << csv::format_double(r.train)
               << ',' << csv::format_double(r.test) << ',' << r.status << '\n';
        }
    }
    {
        auto os = open_output(out / "rmsep_summary.csv");
        os << "method,response,ncomp,min_test_rmsep\n";
        for (Method m : methods) {
            for (const auto& resp : options.y_cols) {
                const RmsepRow* best = nullptr;
                for (const auto& r : rows) {
                    if (r.method != m || r.response != resp || !std::isfinite(r.test)) continue;
                    if (!best || r.test < best->test) best = &r;
                }
                os << method_name(m) << ',' << resp << ',';
                if (best) {
                    os << best->ncomp << ',' << csv::format_double(best->test) << '\n';
                    log << method_name(m) << " " << resp << ": minimum test RMSEP " << csv::format_double(best->test)
                        << " at " << best->ncomp << " components\n";
                } else {
                    os << "NA,NA\n";
                }
            }
        }
    }
    write_rmsep_svgs(out, rows, options.y_cols);
}

void cmd_plot(const CommandOptions& options, std::ostream& log) {
    const fs::path in = !options.input_dir.empty() ? fs::path(options.input_dir)
                                                   : fs::path(options.out.value_or("results"));
    const fs::path out = options.out ? fs::path(*options.out) : in;
    bool any = false;
    if (fs::exists(in / "raw_pe.csv")) {
        any = true;
        const csv::Table t = read_csv_file(in / "raw_pe.csv");
        std::vector<std::size_t> pe_cols;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (t.header[c].rfind("pe_y", 0) == 0) {
                pe_cols.push_back(c);
                names.push_back(t.header[c]);
            }
        }
        const std::size_t cm = t.column("method");
        const std::size_t cn = t.column("ncomp");
        // (method, ncomp) -> per-response sum and count of finite values.
        std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<int>>> acc;
        std::vector<std::string> order;
        for (const auto& row : t.rows) {
            const auto key = std::make_pair(row[cm], csv::parse_int(row[cn]));
            if (std::find(order.begin(), order.end(), row[cm]) == order.end()) order.push_back(row[cm]);
            auto& a = acc[key];
            a.first.resize(pe_cols.size(), 0.0);
            a.second.resize(pe_cols.size(), 0);
            for (std::size_t j = 0; j < pe_cols.size(); ++j) {
                const double v = csv::parse_double(row[pe_cols[j]]);
                if (std::isfinite(v)) {
                    a.first[j] += v;
                    ++a.second[j];
                }
            }
        }
        std::vector<svg::Panel> panels;
        for (std::size_t j = 0; j < pe_cols.size(); ++j) {
            svg::Panel panel;
            panel.title = names[j];
            for (const auto& m : order) {
                svg::Series s;
                s.label = m;
                for (const auto& [key, a] : acc) {
                    if (key.first != m) continue;
                    s.x.push_back(key.second);
                    s.y.push_back(a.second[j] ? a.first[j] / a.second[j] : std::nan(""));
                }
                panel.series.push_back(std::move(s));
            }
            panels.push_back(std::move(panel));
        }
        svg::PlotSpec spec;
        spec.title = "Mean scaled prediction error";
        spec.x_label = "components";
        spec.y_label = "mean PE";
        write_text(out / "pe_curves.svg", svg::line_plot(panels, spec));
        log << "wrote " << (out / "pe_curves.svg").string() << '\n';
    }
    if (fs::exists(in / "rmsep.csv")) {
        any = true;
        const csv::Table t = read_csv_file(in / "rmsep.csv");
        const std::size_t cm = t.column("method"), cn = t.column("ncomp"), cr = t.column("response"),
                          ct = t.column("test_rmsep");
        std::vector<RmsepRow> rows;
        std::vector<std::string> responses;
        for (const auto& row : t.rows) {
            rows.push_back({parse_method(row[cm]), csv::parse_int(row[cn]), row[cr], std::nan(""),
                            csv::parse_double(row[ct]), ""});
            if (std::find(responses.begin(), responses.end(), row[cr]) == responses.end()) responses.push_back(row[cr]);
        }
        write_rmsep_svgs(out, rows, responses);
        log << "wrote " << responses.size() << " RMSEP plots\n";
    }
    if (!any) throw InputError("no raw_pe.csv or rmsep.csv found in '" + in.string() + "'");
}

int dispatch(const std::string& command, const CommandOptions& options, std::ostream& log, std::ostream& err) {
    try {
        if (command == "simulate") {
            cmd_simulate(options, log);
        } else if (command == "run") {
            cmd_run(options, log);
        } else if (command == "analyze") {
            cmd_analyze(options, log);
        } else if (command == "rmsep") {
            cmd_rmsep(options, log);
        } else if (command == "plot") {
            cmd_plot(options, log);
        } else {
            err << "error: unknown command '" << command << "'\n";
            return kInputFailure;
        }
        return kSuccess;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kInputFailure;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kComputeFailure;
    }
}

}  // namespace mrpc::cli
