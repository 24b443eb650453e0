#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrpc/benchmark.hpp"
#include "mrpc/estimators.hpp"

namespace mrpc::cli {

/// Experiment settings read from a JSON document. Level lists override the
/// default grid; `designs` picks grid points by id or lists them explicitly.
struct RunConfig {
    GridLevels levels;
    bool has_design_list = false;
    std::vector<DesignPoint> design_list;
    int replicates = 50;
    int lmax = 10;
    std::uint64_t master_seed = 1;
    std::vector<Method> methods = all_methods();
    std::string output_dir = "results";
    EstimatorOptions estimator;
    int workers = 1;
    bool shared_datasets = false;

    std::vector<DesignPoint> designs() const;
};

/// Parses and validates a config document. Messages are prefixed with
/// `source:line:` whenever the offending key can be located.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
/// Reads the file; InputError naming the path when it cannot be opened.
RunConfig load_config(const std::string& path);

}  // namespace mrpc::cli
