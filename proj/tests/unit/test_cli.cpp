#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mrpc/benchmark.hpp"
#include "mrpc/cli/commands.hpp"
#include "mrpc/cli/config.hpp"
#include "mrpc/csv.hpp"
#include "mrpc/errors.hpp"
#include "mrpc/simrel.hpp"
#include "support.hpp"

using namespace mrpc;
using namespace mrpc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const fs::path p = fs::temp_directory_path() /
                       ("mrpc_cli_" + std::to_string(::getpid()) + "_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

csv::Table read_csv(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    return csv::read_table(is, p.string());
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(MRPC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cmd(const std::string& name, const CommandOptions& o, std::string* err_text = nullptr) {
    std::ostringstream log, err;
    const int code = dispatch(name, o, log, err);
    if (err_text) *err_text = err.str();
    return code;
}

void write_matrix_csv(const fs::path& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    std::ofstream os(p);
    for (Eigen::Index j = 0; j < x.cols(); ++j) os << "x" << j + 1 << ',';
    for (Eigen::Index j = 0; j < y.cols(); ++j) os << "y" << j + 1 << (j + 1 < y.cols() ? "," : "\n");
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) os << csv::format_double(x(i, j)) << ',';
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            os << csv::format_double(y(i, j)) << (j + 1 < y.cols() ? "," : "\n");
        }
    }
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("defaults cover the full grid") {
        const auto cfg = parse_config("{}");
        CHECK(cfg.designs().size() == 32);
        CHECK(cfg.replicates == 50);
        CHECK(cfg.lmax == 10);
        CHECK(cfg.estimator.prereduce_threshold == 0.975);
        CHECK(cfg.estimator.senv_resp_dim == 2);
        CHECK(cfg.methods.size() == 5);
    }

    TEST_CASE("level overrides and design lists") {
        const auto cfg = parse_config(R"({"p": 20, "gamma": [0.9], "eta": [0, 1.2], "replicates": 3,
            "methods": ["pcr", "Xenv"], "master_seed": 9})");
        const auto ds = cfg.designs();
        REQUIRE(ds.size() == 4);
        CHECK(ds[0].gamma == 0.9);
        CHECK(ds[3].relpos == std::vector<int>{5, 6, 7, 8});
        CHECK(cfg.methods == std::vector<Method>{Method::PCR, Method::Xenv});
        CHECK(cfg.master_seed == 9);
        const auto picked = parse_config(R"({"designs": [1, 17, {"id": 40, "p": 30, "gamma": 0.5, "eta": 0.4,
            "relpos": [2, 3]}]})").designs();
        REQUIRE(picked.size() == 3);
        CHECK(picked[1].p == 250);
        CHECK(picked[2].design_id == 40);
        CHECK(picked[2].relpos == std::vector<int>{2, 3});
        CHECK(parse_config(R"({"designs": []})").designs().empty());
    }

    TEST_CASE("errors carry line numbers") {
        CHECK(error_of("{\n  \"gama\": 0.2\n}") == "cfg.json:2: unknown config key 'gama'");
        CHECK(error_of("{\n \"replicates\": 0\n}").rfind("cfg.json:2:", 0) == 0);
        CHECK(error_of("{\n\n \"prereduce_threshold\": 1.5}").rfind("cfg.json:3:", 0) == 0);
        CHECK(error_of("{\"senv_resp_dim\": 5}").find("senv_resp_dim") != std::string::npos);
        CHECK(error_of("{\"methods\": [\"ridge\"]}").find("ridge") != std::string::npos);
        CHECK(error_of("{\"designs\": [1, 1]}").find("listed twice") != std::string::npos);
        CHECK(error_of("{\"designs\": [99]}").find("99") != std::string::npos);
        CHECK_FALSE(error_of("{\"p\": [20,").empty());
        CHECK_THROWS_AS(parse_config("{\"gamma\": [-1]}"), ParameterError);
        CHECK_THROWS_AS(load_config("/nonexistent/mrpc.json"), InputError);
    }
}

TEST_SUITE("simulate") {
    TEST_CASE("population dump carries the eigenvalues") {
        const auto dir = scratch_dir("sim");
        write_file(dir / "c.json", R"({"designs": [1, 11]})");
        CommandOptions o;
        o.config = (dir / "c.json").string();
        o.out = (dir / "a").string();
        REQUIRE(run_cmd("simulate", o) == kSuccess);
        std::ifstream is(dir / "a" / "population_d01.txt");
        const auto pop = read_population(is);
        REQUIRE(pop.p() == 20);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(pop.lambda(i) - std::exp(-0.2 * i)) < 1e-12);
        std::ifstream is11(dir / "a" / "population_d11.txt");
        const auto pop11 = read_population(is11);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(pop11.lambda(i) - std::exp(-0.9 * i)) < 1e-12);
        CHECK(std::abs(pop11.kappa(1) - std::exp(-0.4)) < 1e-12);
        CHECK(fs::exists(dir / "a" / "dataset_d01.csv"));
        o.out = (dir / "b").string();
        REQUIRE(run_cmd("simulate", o) == kSuccess);
        for (const char* f : {"population_d01.txt", "dataset_d01.csv", "population_d11.txt", "dataset_d11.csv"}) {
            CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        }
        fs::remove_all(dir);
    }

    TEST_CASE("zero designs writes nothing") {
        const auto dir = scratch_dir("zero");
        write_file(dir / "c.json", R"({"designs": []})");
        CommandOptions o;
        o.config = (dir / "c.json").string();
        o.out = (dir / "out").string();
        std::ostringstream log, err;
        CHECK(dispatch("simulate", o, log, err) == kSuccess);
        CHECK(log.str().find("no designs") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "out"));
        fs::remove_all(dir);
    }
}

TEST_SUITE("run") {
    TEST_CASE("reduced configuration") {
        const auto dir = scratch_dir("run");
        write_file(dir / "c.json",
                   R"({"designs": [1, 26], "methods": ["PCR", "Senv"], "replicates": 3, "lmax": 4, "master_seed": 5})");
        CommandOptions o;
        o.config = (dir / "c.json").string();
        o.out = (dir / "a").string();
        o.quiet = true;
        REQUIRE(run_cmd("run", o) == kSuccess);
        const auto raw = read_csv(dir / "a" / "raw_pe.csv");
        CHECK(raw.rows.size() == 60);
        CHECK(read_csv(dir / "a" / "error_dataset.csv").rows.size() == 12);
        CHECK(read_csv(dir / "a" / "component_dataset.csv").rows.size() == 12);
        const std::string report = slurp(dir / "a" / "run_report.txt");
        CHECK(report.find("master_seed: 5") != std::string::npos);
        CHECK(report.find("wall_time_seconds") != std::string::npos);
        const auto pe1 = raw.column("pe_y1");
        for (const auto& row : raw.rows) {
            const double v = csv::parse_double(row[pe1]);
            if (std::isfinite(v)) CHECK(v >= 1.0);
        }
        o.out = (dir / "b").string();
        o.workers = 2;
        REQUIRE(run_cmd("run", o) == kSuccess);
        for (const char* f : {"raw_pe.csv", "error_dataset.csv", "component_dataset.csv"}) {
            CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        }
        CommandOptions p;
        p.input_dir = (dir / "a").string();
        CHECK(run_cmd("plot", p) == kSuccess);
        CHECK(fs::exists(dir / "a" / "pe_curves.svg"));
        fs::remove_all(dir);
    }

    TEST_CASE("dry run reports full counts") {
        const auto dir = scratch_dir("dry");
        CommandOptions o;
        o.out = dir.string();
        o.dry_run = true;
        o.quiet = true;
        REQUIRE(run_cmd("run", o) == kSuccess);
        const std::string report = slurp(dir / "run_report.txt");
        CHECK(report.find("raw_rows: 88000") != std::string::npos);
        CHECK(report.find("error_rows: 8000") != std::string::npos);
        CHECK(report.find("component_rows: 8000") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "raw_pe.csv"));
        fs::remove_all(dir);
    }
}

TEST_SUITE("analyze") {
    TEST_CASE("full scale noise dataset") {
        const auto dir = scratch_dir("analyze");
        ExperimentConfig cfg;
        cfg.dry_run = true;
        auto table = run_experiment(design_grid(), cfg);
        Rng rng(77);
        std::exponential_distribution<double> ex(1.0);
        for (auto& row : table.rows) {
            for (Eigen::Index j = 0; j < row.pe.size(); ++j) row.pe(j) = 1.0 + ex(rng);
            row.status = RowStatus::Ok;
        }
        {
            std::ofstream a(dir / "error_dataset.csv");
            write_error_dataset_csv(a, build_error_dataset(table));
            std::ofstream b(dir / "component_dataset.csv");
            write_component_dataset_csv(b, build_component_dataset(table));
        }
        CommandOptions o;
        o.input_dir = dir.string();
        REQUIRE(run_cmd("analyze", o) == kSuccess);
        for (const char* name : {"manova_error.csv", "manova_component.csv"}) {
            const auto t = read_csv(dir / name);
            const auto term = t.column("term");
            const auto pil = t.column("pillai");
            int terms = 0;
            double max_pillai = 0.0;
            bool residual = false;
            for (const auto& row : t.rows) {
                if (row[term] == "Residuals") {
                    residual = true;
                    continue;
                }
                ++terms;
                max_pillai = std::max(max_pillai, csv::parse_double(row[pil]));
            }
            CHECK(terms == 25);
            CHECK(residual);
            CHECK(max_pillai < 0.05);
        }
        const auto scores = read_csv(dir / "pca_scores_error.csv");
        CHECK(scores.rows.size() == 8000);
        CHECK(scores.has_column("pc1"));
        CHECK(fs::exists(dir / "density_error_pc1.svg"));
        CHECK(fs::exists(dir / "effects_error_method_relpos_eta.csv"));
        CHECK(fs::exists(dir / "effects_component_method_gamma.svg"));
        fs::remove_all(dir);
    }

    TEST_CASE("missing input names the file") {
        const auto dir = scratch_dir("missing");
        CommandOptions o;
        o.input_dir = dir.string();
        std::string err;
        CHECK(run_cmd("analyze", o, &err) == kInputFailure);
        CHECK(err.find("error_dataset.csv") != std::string::npos);
        fs::remove_all(dir);
    }
}

TEST_SUITE("rmsep") {
    TEST_CASE("identical train and test sets") {
        const auto dir = scratch_dir("rm1");
        const auto inst = mrpc::testing::random_instance(40, 5, 2, 31);
        write_matrix_csv(dir / "train.csv", inst.x, inst.y);
        CommandOptions o;
        o.train = (dir / "train.csv").string();
        o.test = o.train;
        o.y_cols = {"y1", "y2"};
        o.lmax = 5;
        o.out = dir.string();
        REQUIRE(run_cmd("rmsep", o) == kSuccess);
        const auto t = read_csv(dir / "rmsep.csv");
        CHECK(t.rows.size() == 5 * 5 * 2);
        const auto tr = t.column("train_rmsep");
        const auto te = t.column("test_rmsep");
        const auto nc = t.column("ncomp");
        for (const auto& row : t.rows) {
            if (row[nc] != "5") continue;
            CHECK(std::abs(csv::parse_double(row[tr]) - csv::parse_double(row[te])) < 1e-10);
        }
        CHECK(read_csv(dir / "rmsep_summary.csv").rows.size() == 10);
        CHECK(fs::exists(dir / "rmsep_y1.svg"));
        fs::remove_all(dir);
    }

    TEST_CASE("noiseless data is fitted exactly") {
        const auto dir = scratch_dir("rm2");
        Rng rng(32);
        const Eigen::MatrixXd b = mrpc::testing::standard_normal(6, 2, rng);
        const Eigen::MatrixXd xtr = mrpc::testing::standard_normal(30, 6, rng);
        const Eigen::MatrixXd xte = mrpc::testing::standard_normal(20, 6, rng);
        write_matrix_csv(dir / "train.csv", xtr, xtr * b);
        write_matrix_csv(dir / "test.csv", xte, xte * b);
        CommandOptions o;
        o.train = (dir / "train.csv").string();
        o.test = (dir / "test.csv").string();
        o.y_cols = {"y1", "y2"};
        o.lmax = 6;
        o.out = dir.string();
        REQUIRE(run_cmd("rmsep", o) == kSuccess);
        const auto s = read_csv(dir / "rmsep_summary.csv");
        REQUIRE(s.rows.size() == 10);
        const auto mn = s.column("min_test_rmsep");
        for (const auto& row : s.rows) CHECK(csv::parse_double(row[mn]) < 1e-6);
        fs::remove_all(dir);
    }

    TEST_CASE("input errors") {
        const auto dir = scratch_dir("rm3");
        const auto inst = mrpc::testing::random_instance(10, 3, 1, 33);
        write_matrix_csv(dir / "train.csv", inst.x, inst.y);
        write_matrix_csv(dir / "wide.csv", Eigen::MatrixXd::Ones(4, 4), inst.y.topRows(4));
        write_matrix_csv(dir / "tiny.csv", inst.x.topRows(2), inst.y.topRows(2));
        CommandOptions o;
        o.train = (dir / "train.csv").string();
        o.test = (dir / "wide.csv").string();
        o.y_cols = {"y1"};
        o.out = dir.string();
        std::string err;
        CHECK(run_cmd("rmsep", o, &err) == kInputFailure);
        CHECK(err.find("column mismatch") != std::string::npos);
        o.test = o.train;
        o.train = (dir / "tiny.csv").string();
        CHECK(run_cmd("rmsep", o, &err) == kInputFailure);
        CHECK(err.find("3 training rows") != std::string::npos);
        o.train = o.test;
        o.y_cols = {"nope"};
        CHECK(run_cmd("rmsep", o) == kInputFailure);
        fs::remove_all(dir);
    }
}

TEST_SUITE("exit codes") {
    TEST_CASE("command line tool") {
        const auto dir = scratch_dir("exit");
        write_file(dir / "bad.json", "{\n \"gama\": 1}\n");
        write_file(dir / "ok.json", R"({"designs": [1]})");
        CHECK(run_tool("analyze " + (dir / "nothing").string()) == kInputFailure);
        CHECK(run_tool("simulate --config " + (dir / "bad.json").string()) == kInputFailure);
        CHECK(run_tool("simulate --config " + (dir / "nope.json").string()) == kInputFailure);
        CHECK(run_tool("bogus") == kInputFailure);
        CHECK(run_tool("simulate --quiet --config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()) ==
              kSuccess);
        CHECK(fs::exists(dir / "o" / "population_d01.txt"));
        CHECK(run_tool("run --dry-run --quiet --out " + (dir / "d").string() + " --methods PCR,Foo") ==
              kInputFailure);
        fs::remove_all(dir);
    }
}
