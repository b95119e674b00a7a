// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtest/asymptotics.hpp"
#include "fairtest/dual_solver.hpp"
#include "fairtest/estimation.hpp"
#include "fairtest/io.hpp"
#include "fairtest/simulation.hpp"
#include "support.hpp"

using namespace fairtest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string cli() { return std::string("env -u AUDIT_THREADS ") + FAIRTEST_CLI_PATH; }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fairtest_acceptance_" + std::to_string(::getpid())) / name;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 1. statistic nondecreasing and critical value nonincreasing in r, per theta
Outcome fig1_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig cfg;
    const SweepResult res = run_sweep(cfg);
    const double secs = seconds_since(t0);
    if (res.failures() > 0) return {false, std::to_string(res.failures()) + " failed cells"};

    std::map<double, std::vector<const SweepRow*>> by_theta;
    for (const auto& row : res.rows) by_theta[row.theta1].push_back(&row);
    int inversions = 0, big_inversions = 0, eta_increases = 0;
    for (auto& [theta, rows] : by_theta) {
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->r < b->r; });
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const double drop = rows[k - 1]->statistic - rows[k]->statistic;
            if (drop > 0.0) {
                ++inversions;
                if (drop >= 1e-6) ++big_inversions;
            }
            if (rows[k]->critical_value > rows[k - 1]->critical_value) ++eta_increases;
        }
    }
    const bool ok = inversions <= 1 && big_inversions == 0 && eta_increases == 0 && secs < 300.0 &&
                    by_theta.size() == 8 && res.rows.size() == 40;
    return {ok, std::to_string(res.rows.size()) + " cells, t_N inversions " + std::to_string(inversions) +
                    ", eta increases " + std::to_string(eta_increases) + ", " + fmt(secs, 3) + " s"};
}

// 2. smallest rejecting theta1 nondecreasing in eps at r = 1.2
Outcome fig2_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig cfg;
    cfg.rs = {1.2};
    cfg.epss = {0.01, 0.02, 0.03, 0.04, 0.05};
    const SweepResult res = run_sweep(cfg);
    const double secs = seconds_since(t0);
    if (res.failures() > 0) return {false, std::to_string(res.failures()) + " failed cells"};
    std::map<double, double> smallest;
    for (double e : cfg.epss) smallest[e] = HUGE_VAL;
    for (const auto& row : res.rows)
        if (row.reject) smallest[row.eps] = std::min(smallest[row.eps], row.theta1);
    bool ok = secs < 300.0;
    double prev = -HUGE_VAL;
    std::string trail;
    for (const auto& [e, th] : smallest) {
        ok = ok && th >= prev;
        prev = th;
        trail += (trail.empty() ? "" : " ") + (std::isfinite(th) ? fmt(th, 3) : std::string("none"));
    }
    return {ok, "smallest rejecting theta1 by eps: " + trail + ", " + fmt(secs, 3) + " s"};
}

struct Instance1d {
    testing::CrossingInstance model;
    std::vector<double> xs;
    double r, eps;
};

Instance1d make_instance(std::uint64_t seed, std::size_t n, double margin_lo, double margin_hi) {
    Instance1d in{testing::CrossingInstance::random(rng::mix(seed, 1)), {}, 0.0, 0.0};
    rng::Stream st(rng::mix(seed, 2));
    for (std::size_t i = 0; i < n; ++i) in.xs.push_back(st.uniform());
    in.r = in.model.utility(in.model.c) - st.uniform(margin_lo, margin_hi);
    in.eps = st.uniform(0.005, 0.03);
    return in;
}

Dataset dataset_of(const std::vector<double>& xs) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < xs.size(); ++i) samples.push_back({{xs[i]}, static_cast<int>(i % 2), 0, 0.5});
    return Dataset(std::move(samples), CovariateSpace({0.0}, {1.0}));
}

// 3. solve_dual against the nested brute force on 1-d instances
Outcome dual_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kInner = 100000;
    constexpr double kBound = 10.0;
    const std::uint64_t kInstances = std::getenv("ORACLE_INSTANCES") ? std::atoi(std::getenv("ORACLE_INSTANCES")) : 20;
    double worst = 0.0;
    int misses = 0;
    for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
        const Instance1d in = make_instance(seed, 20, 0.02, 0.15);
        std::vector<double> gx(kInner + 1), gm(kInner + 1), gg(kInner + 1);
        for (int k = 0; k <= kInner; ++k) {
            gx[k] = static_cast<double>(k) / kInner;
            gm[k] = in.model.utility(gx[k]);
            gg[k] = in.model.gap(gx[k]);
        }
        const testing::BruteForceDual oracle(in.xs, gm, gg, gx, in.r, in.eps);
        const auto best = oracle.maximize(kBound, 400, 3);
        const double oracle_value = std::max(0.0, best.value);

        SolverConfig cfg;
        cfg.b_dual = kBound;
        cfg.boundary_policy = BoundaryPolicy::Report;
        const DualSolution sol = solve_dual(*in.model.model(), dataset_of(in.xs), in.r, in.eps, cfg);
        const double err = std::abs(sol.value - oracle_value);
        worst = std::max(worst, err);
        if (err > 1e-4) ++misses;
    }
    const double secs = seconds_since(t0);
    return {misses == 0 && secs < 120.0, std::to_string(kInstances) + " instances, max |R - oracle| = " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// 4. the point-mass transport onto a fair, useful x bounds the dual from above
Outcome weak_duality() {
    int violations = 0, errors = 0;
    double tightest = HUGE_VAL;
    for (std::uint64_t seed = 100; seed < 150; ++seed) {
        const Instance1d in = make_instance(seed, 30, 0.01, 0.3);
        const double c = in.model.c;
        double cost = 0.0;
        for (double x : in.xs) cost += (x - c) * (x - c);
        cost /= static_cast<double>(in.xs.size());
        try {
            const DualSolution sol = solve_dual(*in.model.model(), dataset_of(in.xs), in.r, in.eps, SolverConfig{});
            if (sol.value > cost + 1e-9) ++violations;
            tightest = std::min(tightest, cost - sol.value);
        } catch (const std::exception&) {
            ++errors;
        }
    }
    return {violations == 0 && errors == 0, "50 instances, violations " + std::to_string(violations) + ", errors " +
                                                std::to_string(errors) + ", min slack " + fmt(tightest, 3)};
}

// Two-dimensional model for the bound oracle, with hand-written gradients.
struct Model2d {
    static double pi(const double* x, int a) {
        return a == 1 ? testing::sigmoid(2.0 * x[0] - 1.5 * x[1]) : testing::sigmoid(-1.0 * x[0] + 0.5 * x[1] + 0.2);
    }
    static void dpi(const double* x, int a, double* g) {
        const double p = pi(x, a);
        const double s = p * (1.0 - p);
        if (a == 1) {
            g[0] = 2.0 * s;
            g[1] = -1.5 * s;
        } else {
            g[0] = -1.0 * s;
            g[1] = 0.5 * s;
        }
    }
    static double m(int w, const double* x, int a) { return 1.0 + 0.5 * w + (a ? 0.3 : 0.6) * x[0] + 0.4 * std::sin(2.0 * x[1]); }
    static void dm(const double* x, int a, double* g) {
        g[0] = a ? 0.3 : 0.6;
        g[1] = 0.8 * std::cos(2.0 * x[1]);
    }
    // gradient of sum_a p_a [m1 pi + m0 (1 - pi)] with p_a = 1/2
    static void grad_utility(const double* x, double* g) {
        g[0] = g[1] = 0.0;
        for (int a = 0; a < 2; ++a) {
            double gp[2], gm[2];
            dpi(x, a, gp);
            dm(x, a, gm);
            for (int j = 0; j < 2; ++j) g[j] += 0.5 * (gm[j] + (m(1, x, a) - m(0, x, a)) * gp[j]);
        }
    }

    static std::shared_ptr<const CompositeModel> model() {
        auto policy = std::make_shared<FunctionPolicy>(
            2, [](std::span<const double> x, int a) { return pi(x.data(), a); },
            [](std::span<const double> x, int a, std::span<double> out) { dpi(x.data(), a, out.data()); });
        auto util = std::make_shared<FunctionUtility>(
            2, [](int w, std::span<const double> x, int a) { return m(w, x.data(), a); },
            [](int, std::span<const double> x, int a, std::span<double> out) { dm(x.data(), a, out.data()); },
            [](std::span<const double>, int) { return 0.5; },
            [](std::span<const double>, int, std::span<double> out) { out[0] = out[1] = 0.0; });
        return std::make_shared<CompositeModel>(policy, util, CovariateSpace({0.0, 0.0}, {1.0, 1.0}));
    }
};

// Grid oracle for sup over zeta in [0,Z]^2 of zeta'w - zeta'A(zeta)zeta/4, both branches.
class BoundGrid {
public:
    BoundGrid(const Dataset& data, double zmax, int pts) : z_(zmax), pts_(pts) {
        for (const auto& s : data.samples()) {
            double gm[2], g1[2], g0[2];
            Model2d::grad_utility(s.x.data(), gm);
            Model2d::dpi(s.x.data(), 1, g1);
            Model2d::dpi(s.x.data(), 0, g0);
            const double gh[2] = {g1[0] - g0[0], g1[1] - g0[1]};
            mm_.push_back(gm[0] * gm[0] + gm[1] * gm[1]);
            mh_.push_back(gm[0] * gh[0] + gm[1] * gh[1]);
            hh_.push_back(gh[0] * gh[0] + gh[1] * gh[1]);
        }
        cached_.resize(static_cast<std::size_t>(pts) * pts * 2);
        for (int i = 0; i < pts; ++i)
            for (int j = 0; j < pts; ++j)
                for (int b = 0; b < 2; ++b) cached_[(static_cast<std::size_t>(i) * pts + j) * 2 + b] = matrix(node(i), node(j), b);
    }

    double sup(double w1, double w2) const {
        struct Cand {
            double v, z1, z2;
            int b;
        };
        std::vector<Cand> top;
        for (int i = 0; i < pts_; ++i)
            for (int j = 0; j < pts_; ++j)
                for (int b = 0; b < 2; ++b) {
                    const double v = value(cached_[(static_cast<std::size_t>(i) * pts_ + j) * 2 + b], node(i), node(j), w1, w2);
                    push(top, {v, node(i), node(j), b});
                }
        double best = top.front().v;
        const double h = z_ / (pts_ - 1);
        for (const auto& c : top) {
            double z1 = c.z1, z2 = c.z2, half = 2 * h, v = c.v;
            for (int round = 0; round < 4; ++round) {
                const double c1 = z1, c2 = z2;
                for (int a = 0; a <= 40; ++a)
                    for (int e = 0; e <= 40; ++e) {
                        const double y1 = std::clamp(c1 - half + 2 * half * a / 40, 0.0, z_);
                        const double y2 = std::clamp(c2 - half + 2 * half * e / 40, 0.0, z_);
                        const double vy = value(matrix(y1, y2, c.b), y1, y2, w1, w2);
                        if (vy > v) {
                            v = vy;
                            z1 = y1;
                            z2 = y2;
                        }
                    }
                half /= 10;
            }
            best = std::max(best, v);
        }
        return std::max(best, 0.0);
    }

private:
    struct M3 {
        double a11, a12, a22;
    };
    double node(int i) const { return z_ * i / (pts_ - 1); }
    static double value(const M3& a, double z1, double z2, double w1, double w2) {
        return z1 * w1 + z2 * w2 - 0.25 * (a.a11 * z1 * z1 + 2 * a.a12 * z1 * z2 + a.a22 * z2 * z2);
    }
    M3 matrix(double z1, double z2, int b) const {
        M3 a{0, 0, 0};
        const double sign = b == 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < mm_.size(); ++i) {
            const bool on = b == 0 ? z1 * mh_[i] - z2 * hh_[i] >= 0.0 : z1 * mh_[i] + z2 * hh_[i] < 0.0;
            if (!on) continue;
            a.a11 += mm_[i];
            a.a12 += sign * mh_[i];
            a.a22 += hh_[i];
        }
        const double n = static_cast<double>(mm_.size());
        return {a.a11 / n, a.a12 / n, a.a22 / n};
    }
    template <class C>
    static void push(std::vector<C>& top, C c) {
        constexpr std::size_t k = 6;
        if (top.size() < k) {
            top.push_back(c);
        } else if (c.v > top.back().v) {
            top.back() = c;
        } else {
            return;
        }
        std::sort(top.begin(), top.end(), [](const C& x, const C& y) { return x.v > y.v; });
    }

    double z_;
    int pts_;
    std::vector<double> mm_, mh_, hh_;
    std::vector<M3> cached_;
};

// 5. compute_bound vs a 500 x 500 zeta grid; fixed-point route vs active-set route
Outcome bound_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = Model2d::model();
    const Dataset data = testing::uniform_dataset(20, 77, 2);
    const ScoreVectors scores = build_scores(*model, data);
    BootstrapConfig cfg;
    cfg.zeta_max = 20.0;
    const BoundGrid grid(data, 20.0, 500);
    const BoundEvaluator evaluator(scores, 20.0);

    double worst = 0.0, worst_fp = 0.0;
    int misses = 0, converged = 0, fp_misses = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        rng::Stream st(rng::mix(0xb0b0, k));
        const std::array<double, 2> w{0.8 * st.normal(), 0.4 * st.normal()};
        const double v = evaluator.evaluate(w);
        const double g = grid.sup(w[0], w[1]);
        worst = std::max(worst, std::abs(v - g));
        if (std::abs(v - g) > 1e-3) ++misses;

        const FixedPointResult fp = solve_fixed_point(scores, w, Branch::Plus, cfg);
        const FixedPointResult fm = solve_fixed_point(scores, w, Branch::Minus, cfg);
        if (fp.converged && fm.converged) {
            ++converged;
            const double route = std::max({0.0, bound_objective(scores, w, fp.zeta, Branch::Plus),
                                           bound_objective(scores, w, fm.zeta, Branch::Minus)});
            worst_fp = std::max(worst_fp, std::abs(route - v));
            if (std::abs(route - v) > 1e-5) ++fp_misses;
        }
    }
    const double secs = seconds_since(t0);
    return {misses == 0 && fp_misses == 0 && converged > 0,
            "1000 draws, max |bound - grid| = " + fmt(worst, 3) + "; fixed point converged on " +
                std::to_string(converged) + ", max disagreement " + fmt(worst_fp, 3) + " (" +
                std::to_string(fp_misses) + " > 1e-5), " + fmt(secs, 3) + " s"};
}

// 6. rejection rate under a null scenario
Outcome type_one() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig cfg;
    cfg.thetas = {0.5};
    cfg.rs = {1.0};
    cfg.epss = {0.01};
    cfg.replications = 200;
    const SweepResult res = run_sweep(cfg);
    int rejections = 0;
    for (const auto& row : res.rows) rejections += row.reject;
    const double rate = static_cast<double>(rejections) / static_cast<double>(res.rows.size());
    return {res.failures() == 0 && rate <= 0.08,
            "200 replications, rejection rate " + fmt(rate, 3) + ", " + fmt(seconds_since(t0), 3) + " s"};
}

// 7. finite-difference checks of every analytic gradient family
Outcome gradient_suite() {
    std::vector<std::pair<std::string, std::shared_ptr<const CompositeModel>>> models;
    for (double theta : {0.55, 0.7, 0.9}) {
        PricingScenario sc;
        sc.theta1 = theta;
        models.emplace_back("pricing theta1=" + fmt(theta, 3), pricing_model(sc));
    }
    models.emplace_back("crossing sigmoids", testing::CrossingInstance{}.model());
    models.emplace_back("2-d analytic", Model2d::model());
    for (double reg : {0.01, 1.0}) {
        const LoadedData ld = read_dataset_csv(std::string(FAIRTEST_SOURCE_DIR) + "/data/empirical_demo.csv");
        auto pol = fit_propensity(ld.data, reg);
        auto util = fit_outcome(ld.data, 0.0, reg);
        models.emplace_back("fitted logistic + kernel reg=" + fmt(reg, 3),
                            std::make_shared<CompositeModel>(pol, util, ld.data.space()));
        std::vector<std::array<double, 2>> scores;
        for (const auto& s : ld.data.samples()) scores.push_back({pol->propensity(s.x, 0), pol->propensity(s.x, 1)});
        models.emplace_back("smoothed scores reg=" + fmt(reg, 3),
                            std::make_shared<CompositeModel>(smooth_scores(ld.data, scores), util, ld.data.space()));
    }
    bool ok = true;
    double worst = 0.0;
    std::string worst_name;
    for (std::size_t k = 0; k < models.size(); ++k) {
        const auto res = check_gradients(*models[k].second, 100, 1000 + k, 1e-6, 1e-4);
        ok = ok && res.passed && res.probes == 100;
        if (res.worst_error >= worst) {
            worst = res.worst_error;
            worst_name = models[k].first + " / " + res.worst_function;
        }
    }
    return {ok, std::to_string(models.size()) + " models x 100 probes, worst relative error " + fmt(worst, 3) +
                    " (" + worst_name + ")"};
}

// 8. threshold-integrated SDP discrepancy equals the mean gap when pi_1 >= pi_0
Outcome lemma_equivalence() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PricingScenario sc;
        sc.theta1 = 0.55 + 0.4 * rng::to_unit(rng::mix(seed, 9));
        sc.n = 200;
        sc.seed = rng::mix(seed, 10);
        const Scenario s = make_scenario(sc);
        const double mean_gap = empirical_summaries(*s.model, s.data).mean_gap;
        const double integral = sdp_discrepancy(s.model->policy(), s.data, 10000);
        worst = std::max(worst, std::abs(mean_gap - integral));
    }
    return {worst <= 2e-3, "20 empirical measures, max |integral - mean gap| = " + fmt(worst, 3)};
}

// 9. byte-identical outputs across runs and thread counts
Outcome determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string src = FAIRTEST_SOURCE_DIR;
    const std::vector<std::string> files{"synth.csv", "sweep.csv", "sweep.csv.summary.json", "plot.csv", "fit.json",
                                         "report.json"};
    auto produce = [&](const std::string& tag, int threads) {
        const fs::path dir = scratch("det_" + tag);
        const std::string t = " --threads " + std::to_string(threads);
        const std::string d = dir.string() + "/";
        int bad = 0;
        bad += run(cli() + " synth-empirical --n 200 --seed 5 --out " + d + "synth.csv" + t) != 0;
        bad += run(cli() + " simulate-sweep --theta1 0.6,0.9 --r 1.2,2.0 --eps 0.01,0.03 --n 200 --seed 42 --out " + d +
                   "sweep.csv" + t) != 0;
        bad += run(cli() + " plot-data --data " + d + "sweep.csv --out " + d + "plot.csv" + t) != 0;
        bad += run(cli() + " fit --data " + src + "/data/empirical_demo.csv --out " + d + "fit.json" + t) != 0;
        bad += run(cli() + " test --data " + src + "/data/empirical_demo.csv --config " + src +
                   "/data/empirical_config.json --out " + d + "report.json" + t) != 0;
        return std::make_pair(dir, bad);
    };
    const auto [base, bad0] = produce("run1_t1", 1);
    int failures = bad0, diffs = 0;
    for (const auto& [tag, threads] : std::vector<std::pair<std::string, int>>{{"run2_t1", 1}, {"t4", 4}, {"t8", 8}}) {
        const auto [dir, bad] = produce(tag, threads);
        failures += bad;
        for (const auto& f : files)
            if (slurp(base / f) != slurp(dir / f) || slurp(base / f).empty()) ++diffs;
    }
    return {failures == 0 && diffs == 0, std::to_string(files.size()) + " outputs x 4 runs (threads 1,1,4,8): " +
                                             std::to_string(diffs) + " differences, " + std::to_string(failures) +
                                             " failed commands, " + fmt(seconds_since(t0), 3) + " s"};
}

// 10. bundled empirical pipeline: fit + test over five regularization values
Outcome empirical_pipeline() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string src = FAIRTEST_SOURCE_DIR;
    const fs::path dir = scratch("empirical");
    const std::vector<double> regs{0.001, 0.01, 0.1, 1.0, 10.0};
    std::vector<std::string> datasets{src + "/data/empirical_demo.csv"};
    for (int seed : {2025, 2026}) {
        const std::string path = (dir / ("gen_" + std::to_string(seed) + ".csv")).string();
        if (run(cli() + " synth-empirical --n 300 --seed " + std::to_string(seed) + " --out " + path) != 0)
            return {false, "synth-empirical failed"};
        datasets.push_back(path);
    }
    std::vector<int> rejections(regs.size(), 0);
    std::vector<double> norms(regs.size(), 0.0);
    std::string bundled;
    int failures = 0;
    for (std::size_t k = 0; k < regs.size(); ++k) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            const std::string stem = (dir / ("d" + std::to_string(d) + "_reg" + std::to_string(k))).string();
            const std::string reg = format_double(regs[k]);
            if (run(cli() + " fit --data " + datasets[d] + " --reg " + reg + " --out " + stem + ".fit.json") != 0 ||
                run(cli() + " test --data " + datasets[d] + " --model " + stem + ".fit.json --config " + src +
                    "/data/empirical_config.json --out " + stem + ".report.json") != 0) {
                ++failures;
                continue;
            }
            const auto report = nlohmann::json::parse(slurp(stem + ".report.json"));
            if (report["status"] != "ok") {
                ++failures;
                continue;
            }
            const bool reject = report["decision"]["reject"].get<bool>();
            rejections[k] += reject;
            if (d == 0) {
                const auto fit = nlohmann::json::parse(slurp(stem + ".fit.json"));
                norms[k] = fit["propensity"][0]["weight_norm"].get<double>() + fit["propensity"][1]["weight_norm"].get<double>();
                bundled += reject ? 'R' : 'A';
            }
        }
    }
    bool monotone = true, shrinking = true;
    std::string counts;
    for (std::size_t k = 0; k < regs.size(); ++k) {
        if (k > 0) {
            monotone = monotone && rejections[k] <= rejections[k - 1];
            shrinking = shrinking && norms[k] <= norms[k - 1];
        }
        counts += (counts.empty() ? "" : ",") + std::to_string(rejections[k]);
    }
    const bool ok = failures == 0 && monotone && shrinking && rejections.front() > rejections.back();
    return {ok, "reg 1e-3..10: rejections over " + std::to_string(datasets.size()) + " datasets " + counts +
                    "; bundled decisions " + bundled + "; " + std::to_string(failures) + " failed runs, " +
                    fmt(seconds_since(t0), 3) + " s"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"fig1 trend in r", fig1_trend},
        {"fig2 trend in eps", fig2_trend},
        {"dual solver vs brute force", dual_oracle},
        {"weak duality", weak_duality},
        {"bound vs grid search", bound_oracle},
        {"type-I proxy", type_one},
        {"gradient suite", gradient_suite},
        {"threshold integral vs mean gap", lemma_equivalence},
        {"determinism", determinism},
        {"empirical pipeline", empirical_pipeline},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << "): " << o.detail
                  << std::endl;
    }
    fs::remove_all(fs::temp_directory_path() / ("fairtest_acceptance_" + std::to_string(::getpid())));
    return failed == 0 ? 0 : 1;
}
