#include <gtest/gtest.h>

#include <cmath>

#include "fairtest/dual_solver.hpp"
#include "fairtest/errors.hpp"
#include "fairtest/simulation.hpp"
#include "support.hpp"

using namespace fairtest;

namespace {

// min over a fine grid of ||x - xi||^2 + alpha |gap| - lambda M for a 1-d model
double grid_gamma(const CompositeModel& m, double xi, DualPoint p, int points = 200000) {
    double best = HUGE_VAL;
    for (int k = 0; k <= points; ++k) {
        const std::vector<double> x{static_cast<double>(k) / points};
        best = std::min(best, (x[0] - xi) * (x[0] - xi) + p.alpha * std::abs(m.signed_gap(x)) - p.lambda * m.utility(x));
    }
    return best;
}

} // namespace

TEST(Gamma, ZeroMultipliersGiveZeroAtAnchor) {
    const auto model = pricing_model(PricingScenario{});
    for (double xi : {0.0, 0.3, 1.0}) {
        const auto g = gamma_i(*model, std::vector<double>{xi}, {0.0, 0.0}, SolverConfig{});
        EXPECT_NEAR(g.value, 0.0, 1e-14);
        EXPECT_NEAR(g.argmin[0], xi, 1e-12);
    }
}

TEST(Gamma, MatchesGridForGapPenalty) {
    // (x - 0.5)^2 + 0.2 x is minimized at x = 0.4 with value 0.09
    const auto model = pricing_model(PricingScenario{});
    const auto g = gamma_i(*model, std::vector<double>{0.5}, {0.0, 1.0}, SolverConfig{});
    EXPECT_NEAR(g.value, grid_gamma(*model, 0.5, {0.0, 1.0}), 1e-6);
    EXPECT_NEAR(g.value, 0.09, 1e-9);
    EXPECT_NEAR(g.argmin[0], 0.4, 1e-5);
}

TEST(Gamma, FindsMinimumOnTheKink) {
    // far from the crossing, only a kink seed reaches the global minimum
    const auto inst = fairtest::testing::CrossingInstance::random(rng::mix(5, 1));
    const auto model = inst.model();
    const DualPoint p{0.0, 2.58};
    const auto g = gamma_i(*model, std::vector<double>{0.917}, p, SolverConfig{});
    const double grid = grid_gamma(*model, 0.917, p);
    // a 5e-6 grid step overshoots a kink minimum by about slope * step
    EXPECT_LE(g.value, grid + 1e-12);
    EXPECT_NEAR(g.value, grid, 2e-5);
    EXPECT_NEAR(g.argmin[0], inst.c, 1e-4);
}

TEST(Gamma, RejectsNegativeMultipliers) {
    const auto model = pricing_model(PricingScenario{});
    EXPECT_THROW(gamma_i(*model, std::vector<double>{0.5}, {-1.0, 0.0}, SolverConfig{}), DomainError);
}

TEST(DualObjective, MatchesGridOracle) {
    const auto sc = make_scenario(0.6, 50, 42);
    const DualPoint p{0.5, 0.5};
    const double r = 1.2, eps = 0.01;
    double mean = 0.0;
    for (const auto& s : sc.data.samples()) mean += grid_gamma(*sc.model, s.x[0], p, 100000);
    const double expected = p.lambda * r - p.alpha * eps + mean / 50.0;
    EXPECT_NEAR(dual_objective(*sc.model, sc.data, r, eps, p, SolverConfig{}), expected, 1e-5);
}

TEST(SolveDual, FeasibleSampleGivesZero) {
    // the empirical measure already satisfies both constraints
    const auto sc = make_scenario(0.6, 100, 7);
    const auto sol = solve_dual(*sc.model, sc.data, 0.5, 0.5, SolverConfig{});
    EXPECT_EQ(sol.value, 0.0);
    EXPECT_EQ(sol.statistic, 0.0);
    EXPECT_FALSE(sol.boundary_hit);
}

TEST(SolveDual, HarderUtilityTargetGivesLargerStatistic) {
    const auto sc = make_scenario(0.9, 100, 3);
    SolverConfig cfg;
    cfg.boundary_policy = BoundaryPolicy::Report;
    const auto low = solve_dual(*sc.model, sc.data, 1.2, 0.01, cfg);
    const auto high = solve_dual(*sc.model, sc.data, 2.8, 0.01, cfg);
    EXPECT_GT(high.statistic, low.statistic);
    EXPECT_NEAR(low.statistic, 100.0 * low.value, 1e-12);
}

TEST(SolveDual, AgreesWithNestedBruteForce) {
    const auto inst = fairtest::testing::CrossingInstance::random(rng::mix(11, 1));
    rng::Stream st(rng::mix(11, 2));
    std::vector<double> xs;
    std::vector<Sample> samples;
    for (int i = 0; i < 12; ++i) {
        xs.push_back(st.uniform());
        samples.push_back({{xs.back()}, i % 2, 0, 0.5});
    }
    const Dataset data(samples, CovariateSpace({0.0}, {1.0}));
    const double r = inst.utility(inst.c) - 0.05, eps = 0.01;

    const int K = 20000;
    std::vector<double> gx(K + 1), gm(K + 1), gg(K + 1);
    for (int k = 0; k <= K; ++k) {
        gx[k] = static_cast<double>(k) / K;
        gm[k] = inst.utility(gx[k]);
        gg[k] = inst.gap(gx[k]);
    }
    const auto oracle = fairtest::testing::BruteForceDual(xs, gm, gg, gx, r, eps).maximize(10.0, 200, 3);

    SolverConfig cfg;
    cfg.b_dual = 10.0;
    cfg.boundary_policy = BoundaryPolicy::Report;
    const auto sol = solve_dual(*inst.model(), data, r, eps, cfg);
    EXPECT_NEAR(sol.value, std::max(0.0, oracle.value), 2e-4);
}

TEST(SolveDual, EscalateThrowsWhenTheBoundKeepsBinding) {
    // r above every attainable utility makes the dual unbounded in lambda
    const auto sc = make_scenario(0.6, 30, 1);
    SolverConfig cfg;
    cfg.b_dual = 1.0;
    cfg.max_doublings = 1;
    EXPECT_THROW(solve_dual(*sc.model, sc.data, 5.0, 0.01, cfg), UnboundedDualError);
    cfg.boundary_policy = BoundaryPolicy::Report;
    const auto sol = solve_dual(*sc.model, sc.data, 5.0, 0.01, cfg);
    EXPECT_TRUE(sol.boundary_hit);
    EXPECT_FALSE(sol.warnings.empty());
}

TEST(SolverConfig, ValidateRejectsBadSettings) {
    SolverConfig cfg;
    cfg.b_dual = -1.0;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = SolverConfig{};
    cfg.inner_grid = 2;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = SolverConfig{};
    cfg.refine_window = 2.0;
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(GoldenSection, FindsInteriorAndBoundaryMaxima) {
    const auto in = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
    EXPECT_NEAR(in.first, 0.3, 1e-6);
    const auto edge = golden_section_max([](double x) { return x; }, 0.0, 2.0, 1e-10);
    EXPECT_EQ(edge.first, 2.0);
    EXPECT_EQ(edge.second, 2.0);
}

TEST(SeedLattice, CoversTheBoxCorners) {
    SolverConfig cfg;
    cfg.inner_grid = 5;
    const auto pts = seed_lattice(CovariateSpace({0.0, -1.0}, {1.0, 1.0}), cfg);
    ASSERT_EQ(pts.size(), 50u);
    EXPECT_EQ(pts[0], 0.0);
    EXPECT_EQ(pts[1], -1.0);
    EXPECT_EQ(pts[48], 1.0);
    EXPECT_EQ(pts[49], 1.0);
}
