// Command-line front end: simulate | run | analyze | rmsep | plot.

#include <iostream>

#include "CLI11.hpp"
#include "mrpc/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-response prediction method comparison"};
    app.require_subcommand(1);
    mrpc::cli::CommandOptions o;

    auto add_run_flags = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "master seed (overrides config)");
        sub->add_option("--workers", o.workers, "worker threads");
        sub->add_option("--methods", o.methods, "comma-separated method subset")->delimiter(',');
        sub->add_flag("--quiet", o.quiet, "suppress progress output");
    };

    auto* simulate = app.add_subcommand("simulate", "write population dumps and sampled datasets");
    add_run_flags(simulate);

    auto* run = app.add_subcommand("run", "run the simulation experiment");
    add_run_flags(run);
    run->add_option("--lmax", o.lmax, "largest component count");
    run->add_flag("--dry-run", o.dry_run, "count rows without fitting");

    auto* analyze = app.add_subcommand("analyze", "MANOVA, PCA and effect tables of a results directory");
    analyze->add_option("dir", o.input_dir, "results directory");
    analyze->add_option("--out", o.out, "output directory (default: the results directory)");

    auto* rmsep = app.add_subcommand("rmsep", "train/test RMSEP on an external dataset");
    rmsep->add_option("--train", o.train, "training CSV")->required();
    rmsep->add_option("--test", o.test, "test CSV")->required();
    rmsep->add_option("--y-cols", o.y_cols, "comma-separated response columns")->delimiter(',')->required();
    rmsep->add_option("--lmax", o.lmax, "largest component count (default 15)");
    rmsep->add_option("--methods", o.methods, "comma-separated method subset")->delimiter(',');
    rmsep->add_option("--config", o.config, "JSON configuration for estimator options")->check(CLI::ExistingFile);
    rmsep->add_option("--out", o.out, "output directory");

    auto* plot = app.add_subcommand("plot", "redraw SVG plots from CSV results");
    plot->add_option("dir", o.input_dir, "results directory");
    plot->add_option("--out", o.out, "output directory (default: the results directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return mrpc::cli::kInputFailure;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return mrpc::cli::dispatch(command, o, std::cerr, std::cerr);
}
