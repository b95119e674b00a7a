#include "fairtest/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fairtest/errors.hpp"

namespace fairtest {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Merit of a candidate witness: zero exactly on fair points with M >= r.
double merit(double gap, double utility, double r) {
    const double shortfall = std::max(0.0, r - utility);
    return gap * gap + shortfall * shortfall;
}

bool is_witness(double gap, double utility, double r, double gap_tol) {
    return std::abs(gap) <= gap_tol && utility >= r - 1e-12 * std::max(1.0, std::abs(r));
}

struct Probe {
    Vec x;
    double gap;
    double utility;
    double merit;
};

// Projected gradient with Armijo backtracking on h^2 + max(0, r - M)^2.
Probe polish_witness(const CompositeModel& model, Vec x, double r) {
    const auto& box = model.space();
    const std::size_t d = x.size();
    PointValues pv;
    Vec grad(d), y(d);
    model.evaluate(x, true, pv);
    double f = merit(pv.gap, pv.utility, r);
    for (int it = 0; it < 500 && f > 1e-16; ++it) {
        const double shortfall = std::max(0.0, r - pv.utility);
        double gn2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] = 2.0 * pv.gap * pv.gap_gradient[j] - 2.0 * shortfall * pv.utility_gradient[j];
            gn2 += grad[j] * grad[j];
        }
        if (!(gn2 > 0.0)) break;
        // Gauss-Newton length for the squared residuals as the first trial
        double step = f / gn2;
        bool accepted = false;
        for (int k = 0; k < 50; ++k, step *= 0.5) {
            for (std::size_t j = 0; j < d; ++j) y[j] = x[j] - step * grad[j];
            box.project(y);
            const double fy = merit(model.signed_gap(y), model.utility(y), r);
            double decrease = 0.0;
            for (std::size_t j = 0; j < d; ++j) decrease += grad[j] * (x[j] - y[j]);
            if (fy <= f - 1e-4 * decrease && fy < f) {
                x = y;
                f = fy;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        model.evaluate(x, true, pv);
    }
    model.evaluate(x, false, pv);
    return {x, pv.gap, pv.utility, merit(pv.gap, pv.utility, r)};
}

bool probe_better(const Probe& a, const Probe& b) {
    if (a.merit != b.merit) return a.merit < b.merit;
    if (a.utility != b.utility) return a.utility > b.utility;
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
}

} // namespace

AssumptionCheck check_assumptions(const CompositeModel& model, const Dataset& data, double r,
                                  const AssumptionOptions& opts) {
    AssumptionCheck out;

    // Assumption 1: bounded outcomes
    const double max_y = data.max_outcome();
    out.b_outcome = std::isnan(opts.b_outcome) ? max_y : opts.b_outcome;
    std::size_t below = 0, above = 0, first_bad = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data[i].y;
        if (y < 0.0 || y > out.b_outcome) {
            (y < 0.0 ? below : above) += 1;
            first_bad = std::min(first_bad, i);
        }
    }
    if (below + above > 0) {
        std::ostringstream msg;
        msg << below + above << " outcomes outside [0, " << out.b_outcome << "] (" << below << " negative, " << above
            << " above the bound); first at sample " << first_bad << " with y = " << data[first_bad].y;
        out.violations.push_back({"1", msg.str()});
    }

    // Assumption 2: differentiability, checked against finite differences
    if (opts.gradient_probes > 0) {
        out.gradients = check_gradients(model, opts.gradient_probes, opts.seed);
        if (!out.gradients.passed) {
            std::ostringstream msg;
            msg << "analytic gradient of " << out.gradients.worst_function
                << " disagrees with central differences (error " << out.gradients.worst_error << ")";
            out.violations.push_back({"2", msg.str()});
        }
    }

    // Assumption 3: some fair point reaches the utility threshold
    const std::size_t d = model.dim();
    const std::vector<double> lattice = seed_lattice(model.space(), opts.lattice);
    std::vector<Probe> probes;
    probes.reserve(lattice.size() / d + data.size());
    PointValues pv;
    auto add = [&](Vec x) {
        model.evaluate(x, false, pv);
        if (!std::isfinite(pv.gap) || !std::isfinite(pv.utility))
            throw NumericError("non-finite model value during the witness search", x);
        probes.push_back({std::move(x), pv.gap, pv.utility, merit(pv.gap, pv.utility, r)});
    };
    for (std::size_t k = 0; k < lattice.size(); k += d) add(Vec(lattice.begin() + static_cast<std::ptrdiff_t>(k),
                                                                lattice.begin() + static_cast<std::ptrdiff_t>(k + d)));
    for (const auto& s : data.samples()) add(s.x);
    out.search.lattice_points = probes.size();
    out.search.max_utility_seen = -HUGE_VAL;
    for (const auto& p : probes) out.search.max_utility_seen = std::max(out.search.max_utility_seen, p.utility);

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.witness_seeds, 1)), probes.size());
    std::partial_sort(probes.begin(), probes.begin() + static_cast<std::ptrdiff_t>(keep), probes.end(), probe_better);
    Probe best = probes.front();
    for (std::size_t k = 0; k < keep && !is_witness(best.gap, best.utility, r, opts.gap_tol); ++k) {
        const Probe p = polish_witness(model, probes[k].x, r);
        ++out.search.polished_seeds;
        out.search.max_utility_seen = std::max(out.search.max_utility_seen, p.utility);
        const bool p_ok = is_witness(p.gap, p.utility, r, opts.gap_tol);
        const bool b_ok = is_witness(best.gap, best.utility, r, opts.gap_tol);
        if ((p_ok && !b_ok) || (p_ok == b_ok && probe_better(p, best))) best = p;
    }
    out.search.best_merit = best.merit;
    out.search.best_point = best.x;
    out.search.best_utility = best.utility;
    out.search.best_gap = std::abs(best.gap);
    if (is_witness(best.gap, best.utility, r, opts.gap_tol)) {
        out.witness = best.x;
        out.witness_utility = best.utility;
        out.witness_gap = std::abs(best.gap);
    } else {
        std::ostringstream msg;
        msg << "no x in the covariate box with |pi_1 - pi_0| <= " << opts.gap_tol << " and M(x) >= r = " << r
            << "; closest point has gap " << std::abs(best.gap) << " and M = " << best.utility << " (searched "
            << out.search.lattice_points << " points, polished " << out.search.polished_seeds << " seeds)";
        out.violations.push_back({"3", msg.str()});
    }
    out.ok = out.violations.empty();
    return out;
}

void TestConfig::validate() const {
    if (!std::isfinite(r)) throw DomainError("r must be finite");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be a finite nonnegative number");
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    solver.validate();
    bootstrap.validate();
}

TestReport run_test(const CompositeModel& model, const Dataset& data, const TestConfig& cfg) {
    cfg.validate();
    TestReport rep;
    rep.alpha_level = cfg.alpha_level;
    rep.r = cfg.r;
    rep.eps = cfg.eps;
    rep.n = data.size();
    rep.dim = data.dim();
    rep.seed = cfg.seed;
    rep.bootstrap_seed = cfg.bootstrap.seed;
    rep.bootstrap_draws = cfg.bootstrap.draws;
    rep.joint_cov = cfg.bootstrap.use_joint_cov;

    auto start = Clock::now();
    AssumptionOptions aopts;
    aopts.b_outcome = cfg.b_outcome;
    aopts.gradient_probes = cfg.gradient_probes;
    aopts.seed = cfg.seed;
    aopts.lattice = cfg.solver;
    rep.assumptions = check_assumptions(model, data, cfg.r, aopts);
    rep.timings_ms["assumptions"] = elapsed_ms(start);

    try {
        rep.summaries = empirical_summaries(model, data);
    } catch (const DomainError& e) {
        rep.status = "numeric_failure";
        rep.error = e.what();
        return rep;
    }

    SolverConfig solver = cfg.solver;
    if (!rep.assumptions.ok) {
        if (!cfg.allow_infeasible) {
            rep.status = "assumption_violation";
            rep.error = "preconditions failed; the dual may be unbounded (set allow_infeasible to run the truncated dual)";
            return rep;
        }
        solver.boundary_policy = BoundaryPolicy::Report;
        rep.warnings.push_back("assumption violations ignored (allow_infeasible); statistic is the truncated dual on [0, " +
                               std::to_string(solver.b_dual) + "]^2");
    }

    try {
        start = Clock::now();
        rep.dual = solve_dual(model, data, cfg.r, cfg.eps, solver);
        rep.timings_ms["dual"] = elapsed_ms(start);
        for (const auto& w : rep.dual.warnings) rep.warnings.push_back(w);

        start = Clock::now();
        BootstrapConfig boot = cfg.bootstrap;
        boot.dual_bound = rep.dual.b_dual;
        rep.bootstrap = critical_value(model, data, cfg.alpha_level, boot);
        rep.timings_ms["bootstrap"] = elapsed_ms(start);
        for (const auto& w : rep.bootstrap.warnings) rep.warnings.push_back(w);
    } catch (const UnboundedDualError& e) {
        rep.status = "unbounded_dual";
        rep.error = e.what();
        return rep;
    } catch (const NumericError& e) {
        rep.status = "numeric_failure";
        rep.error = e.what();
        return rep;
    }

    rep.statistic = rep.dual.statistic;
    rep.critical_value = rep.bootstrap.eta;
    rep.reject = rep.statistic > rep.critical_value;
    return rep;
}

nlohmann::ordered_json report_json(const TestReport& rep, bool with_timings) {
    using J = nlohmann::ordered_json;
    const bool done = rep.status == "ok";
    J j;
    j["schema_version"] = kReportSchema;
    j["status"] = rep.status;
    j["error"] = rep.error.empty() ? J(nullptr) : J(rep.error);

    J decision;
    decision["statistic"] = done ? J(rep.statistic) : J(nullptr);
    decision["critical_value"] = done ? J(rep.critical_value) : J(nullptr);
    decision["reject"] = done ? J(rep.reject) : J(nullptr);
    decision["alpha_level"] = rep.alpha_level;
    decision["r"] = rep.r;
    decision["eps"] = rep.eps;
    j["decision"] = decision;

    if (done) {
        J dual;
        dual["lambda"] = rep.dual.argmax.lambda;
        dual["alpha"] = rep.dual.argmax.alpha;
        dual["value"] = rep.dual.value;
        dual["b_dual"] = rep.dual.b_dual;
        dual["boundary_hit"] = rep.dual.boundary_hit;
        dual["doublings"] = rep.dual.doublings;
        dual["evaluations"] = rep.dual.evaluations;
        j["dual"] = dual;

        J boot;
        boot["draws"] = rep.bootstrap_draws;
        boot["seed"] = rep.bootstrap_seed;
        boot["joint_cov"] = rep.joint_cov;
        boot["zeta_max"] = rep.bootstrap.zeta_max;
        boot["var_M"] = rep.bootstrap.var_M;
        boot["var_gap"] = rep.bootstrap.var_gap;
        j["bootstrap"] = boot;
    } else {
        j["dual"] = nullptr;
        j["bootstrap"] = nullptr;
    }

    J data;
    data["n"] = rep.n;
    data["dim"] = rep.dim;
    data["mean_utility"] = rep.summaries.mean_utility;
    data["mean_gap"] = rep.summaries.mean_gap;
    data["var_utility"] = rep.summaries.var_utility;
    data["var_gap"] = rep.summaries.var_gap;
    j["data"] = data;

    const auto& a = rep.assumptions;
    J as;
    as["ok"] = a.ok;
    as["b_outcome"] = a.b_outcome;
    J viol = J::array();
    for (const auto& v : a.violations) viol.push_back(J{{"assumption", v.assumption}, {"message", v.message}});
    as["violations"] = viol;
    as["feasibility_witness"] = a.witness ? J(*a.witness) : J(nullptr);
    as["witness_utility"] = a.witness ? J(a.witness_utility) : J(nullptr);
    as["witness_gap"] = a.witness ? J(a.witness_gap) : J(nullptr);
    as["gradient_check"] = J{{"passed", a.gradients.passed},
                             {"probes", a.gradients.probes},
                             {"worst_error", a.gradients.worst_error},
                             {"worst_function", a.gradients.worst_function}};
    as["witness_search"] = J{{"points", a.search.lattice_points},
                             {"polished_seeds", a.search.polished_seeds},
                             {"best_merit", a.search.best_merit},
                             {"best_point", a.search.best_point},
                             {"best_utility", a.search.best_utility},
                             {"best_gap", a.search.best_gap},
                             {"max_utility_seen", a.search.max_utility_seen}};
    j["assumptions"] = as;

    j["warnings"] = rep.warnings;
    j["seed"] = rep.seed;
    j["config"] = rep.config;
    if (with_timings) {
        J t = J::object();
        for (const auto& [k, v] : rep.timings_ms) t[k] = v;
        j["timings_ms"] = t;
    }
    return j;
}

} // namespace fairtest
