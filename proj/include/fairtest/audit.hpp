#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtest/asymptotics.hpp"
#include "fairtest/dual_solver.hpp"
#include "fairtest/model.hpp"

namespace fairtest {

inline constexpr const char* kReportSchema = "fairtest.report/1";

struct Violation {
    std::string assumption; ///< "1", "2" or "3"
    std::string message;
};

/// Record of the fair-and-useful point search.
struct WitnessSearch {
    std::size_t lattice_points = 0;
    int polished_seeds = 0;
    double best_merit = 0.0;     ///< h^2 + max(0, r - M)^2 at the best point
    Vec best_point;
    double best_utility = 0.0;
    double best_gap = 0.0;
    double max_utility_seen = 0.0;
};

struct AssumptionOptions {
    double b_outcome = std::numeric_limits<double>::quiet_NaN(); ///< NaN selects max y
    std::size_t gradient_probes = 100;
    std::uint64_t seed = 0x5eedULL;
    double gap_tol = 1e-6;
    int witness_seeds = 10;
    SolverConfig lattice; ///< inner_grid / sobol_points of the search lattice
};

struct AssumptionCheck {
    bool ok = true;
    std::vector<Violation> violations;
    std::optional<Vec> witness;
    double witness_utility = 0.0;
    double witness_gap = 0.0;
    double b_outcome = 0.0;
    GradientCheckResult gradients;
    WitnessSearch search;
};

/// Boundedness of y, finite-difference gradient checks, and a search for x with
/// |pi_1 - pi_0|(x) <= gap_tol and M(x) >= r. Violations are returned, not thrown.
AssumptionCheck check_assumptions(const CompositeModel& model, const Dataset& data, double r,
                                  const AssumptionOptions& opts = {});

struct TestConfig {
    double r = 1.0;
    double eps = 0.01;
    double alpha_level = 0.05;
    SolverConfig solver;
    BootstrapConfig bootstrap;
    bool allow_infeasible = false; ///< run the truncated dual even when Assumption 3 fails
    double b_outcome = std::numeric_limits<double>::quiet_NaN();
    std::size_t gradient_probes = 100;
    std::uint64_t seed = 0x5eedULL;

    void validate() const;
};

struct TestReport {
    std::string status = "ok"; ///< ok | assumption_violation | unbounded_dual | numeric_failure
    std::string error;
    double statistic = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    double alpha_level = 0.05;
    double r = 0.0;
    double eps = 0.0;
    DualSolution dual;
    CriticalValue bootstrap;
    EmpiricalSummaries summaries;
    std::size_t n = 0;
    std::size_t dim = 0;
    AssumptionCheck assumptions;
    std::vector<std::string> warnings;
    std::map<std::string, double> timings_ms;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    std::uint64_t bootstrap_seed = 0;
    int bootstrap_draws = 0;
    bool joint_cov = false;
};

TestReport run_test(const CompositeModel& model, const Dataset& data, const TestConfig& cfg);

nlohmann::ordered_json report_json(const TestReport& report, bool with_timings);

} // namespace fairtest
