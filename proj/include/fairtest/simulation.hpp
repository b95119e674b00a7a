#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fairtest/asymptotics.hpp"
#include "fairtest/dual_solver.hpp"
#include "fairtest/model.hpp"

namespace fairtest {

/// Synthetic pricing study: one covariate x ~ U[0,1], pi_a(x) = theta_a x,
/// m_w(x,a) = b0 + b1 w + b2 x with group-specific coefficients.
struct PricingScenario {
    double theta1 = 0.6;
    std::array<double, 3> betas0{0.8, 0.5, 0.7};
    std::array<double, 3> betas1{0.5, 1.0, 0.5};
    std::size_t n = 500;
    std::uint64_t seed = 42;
    double noise = 0.05;       ///< half-width of the uniform outcome noise
    double group_share = 0.5;  ///< P(S = 1)

    double theta0() const noexcept { return 1.0 - theta1; }
    void validate() const;
};

class PricingPolicy final : public PolicyModel {
public:
    explicit PricingPolicy(double theta1);
    std::size_t dim() const override { return 1; }
    double propensity(std::span<const double> x, int group) const override;
    void propensity_gradient(std::span<const double> x, int group, std::span<double> out) const override;

private:
    std::array<double, 2> theta_;
};

class PricingUtility final : public UtilityModel {
public:
    PricingUtility(std::array<double, 3> betas0, std::array<double, 3> betas1, double group_share);
    std::size_t dim() const override { return 1; }
    double outcome(int treatment, std::span<const double> x, int group) const override;
    void outcome_gradient(int treatment, std::span<const double> x, int group, std::span<double> out) const override;
    double group_probability(std::span<const double> x, int group) const override;
    void group_probability_gradient(std::span<const double> x, int group, std::span<double> out) const override;

private:
    std::array<std::array<double, 3>, 2> betas_;
    double share_;
};

struct Scenario {
    std::shared_ptr<const CompositeModel> model;
    Dataset data;
};

std::shared_ptr<const CompositeModel> pricing_model(const PricingScenario& sc);
Scenario make_scenario(const PricingScenario& sc);
Scenario make_scenario(double theta1, std::size_t n, std::uint64_t seed);

/// Dataset seed of one sweep cell; shared by every (r, eps) at the same
/// (theta1, replicate).
std::uint64_t dataset_seed(std::uint64_t seed, double theta1, std::size_t replicate);
std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t replicate);

struct SweepConfig {
    std::vector<double> thetas{0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9};
    std::vector<double> rs{1.2, 1.6, 2.0, 2.4, 2.8};
    std::vector<double> epss{0.01};
    std::size_t n = 500;
    double alpha_level = 0.05;
    std::uint64_t seed = 42;
    std::size_t replications = 1;
    double noise = 0.05;
    SolverConfig solver;
    BootstrapConfig bootstrap;

    SweepConfig() { solver.boundary_policy = BoundaryPolicy::Report; }
    void validate() const;
};

struct SweepRow {
    double theta1 = 0.0;
    double r = 0.0;
    double eps = 0.0;
    std::size_t replicate = 0;
    std::size_t n = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t boot_seed = 0;
    double statistic = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    double lambda = 0.0;
    double alpha = 0.0;
    bool boundary_hit = false;
    bool assumption_ok = false;
    std::string status = "ok"; ///< ok | error
    std::string message;
    double runtime_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    std::size_t failures() const;
    std::string to_csv(bool with_timings) const;
};

/// One row per (theta1, replicate, r, eps). Cell failures become error rows.
SweepResult run_sweep(const SweepConfig& cfg);

} // namespace fairtest
