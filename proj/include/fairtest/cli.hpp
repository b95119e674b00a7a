#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtest/audit.hpp"
#include "fairtest/model.hpp"
#include "fairtest/simulation.hpp"

namespace fairtest {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitAssumption = 3,
    kExitNumeric = 4,
};

struct EstimationOptions {
    double reg = 0.01;
    double bandwidth = 0.0;                                     ///< 0 selects Silverman's rule
    double group_reg = std::numeric_limits<double>::quiet_NaN(); ///< NaN reuses reg
};

/// Everything a config file can set. Unknown keys throw SchemaError.
struct RunConfig {
    TestConfig test;
    EstimationOptions estimation;
    std::optional<double> pricing_theta1;
    std::optional<CovariateSpace> box;
    SweepConfig sweep;
    bool bootstrap_seed_set = false;
    bool boundary_policy_set = false;
    nlohmann::ordered_json echo = nlohmann::ordered_json::object();
};

RunConfig parse_config(const nlohmann::ordered_json& j);
RunConfig load_config(const std::string& path);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fairtest
