#include "fairtest/simulation.hpp"

#include <chrono>
#include <optional>
#include <cmath>
#include <sstream>

#include "fairtest/audit.hpp"
#include "fairtest/errors.hpp"
#include "fairtest/io.hpp"
#include "fairtest/parallel.hpp"
#include "fairtest/rng.hpp"

namespace fairtest {
namespace {

// field tags for the per-sample substreams
constexpr std::uint64_t kTagX = 0x78;
constexpr std::uint64_t kTagS = 0x73;
constexpr std::uint64_t kTagW = 0x77;
constexpr std::uint64_t kTagY = 0x79;

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

void PricingScenario::validate() const {
    if (!(theta1 >= 0.0 && theta1 <= 1.0)) throw DomainError("theta1 must lie in [0, 1]");
    if (n < 2) throw DomainError("scenario needs at least 2 samples");
    if (!(noise >= 0.0)) throw DomainError("noise half-width must be nonnegative");
    if (!(group_share > 0.0 && group_share < 1.0)) throw DomainError("group share must lie in (0, 1)");
}

PricingPolicy::PricingPolicy(double theta1) : theta_{1.0 - theta1, theta1} {
    if (!(theta1 >= 0.0 && theta1 <= 1.0)) throw DomainError("theta1 must lie in [0, 1]");
}

double PricingPolicy::propensity(std::span<const double> x, int group) const {
    return theta_[static_cast<std::size_t>(group)] * x[0];
}

void PricingPolicy::propensity_gradient(std::span<const double>, int group, std::span<double> out) const {
    out[0] = theta_[static_cast<std::size_t>(group)];
}

PricingUtility::PricingUtility(std::array<double, 3> betas0, std::array<double, 3> betas1, double group_share)
    : betas_{betas0, betas1}, share_(group_share) {}

double PricingUtility::outcome(int treatment, std::span<const double> x, int group) const {
    const auto& b = betas_[static_cast<std::size_t>(group)];
    return b[0] + b[1] * treatment + b[2] * x[0];
}

void PricingUtility::outcome_gradient(int, std::span<const double>, int group, std::span<double> out) const {
    out[0] = betas_[static_cast<std::size_t>(group)][2];
}

double PricingUtility::group_probability(std::span<const double>, int group) const {
    return group == 1 ? share_ : 1.0 - share_;
}

void PricingUtility::group_probability_gradient(std::span<const double>, int, std::span<double> out) const {
    out[0] = 0.0;
}

std::shared_ptr<const CompositeModel> pricing_model(const PricingScenario& sc) {
    sc.validate();
    return std::make_shared<CompositeModel>(std::make_shared<PricingPolicy>(sc.theta1),
                                            std::make_shared<PricingUtility>(sc.betas0, sc.betas1, sc.group_share),
                                            CovariateSpace({0.0}, {1.0}));
}

Scenario make_scenario(const PricingScenario& sc) {
    auto model = pricing_model(sc);
    const auto& pol = model->policy();
    const auto& util = model->utility_model();
    std::vector<Sample> samples(sc.n);
    for (std::size_t i = 0; i < sc.n; ++i) {
        Sample& s = samples[i];
        s.x = {rng::to_unit(rng::mix(sc.seed, kTagX, i))};
        s.s = rng::to_unit(rng::mix(sc.seed, kTagS, i)) < sc.group_share ? 1 : 0;
        s.w = rng::to_unit(rng::mix(sc.seed, kTagW, i)) < pol.propensity(s.x, s.s) ? 1 : 0;
        const double u = rng::to_unit(rng::mix(sc.seed, kTagY, i));
        s.y = std::max(0.0, util.outcome(s.w, s.x, s.s) + sc.noise * (2.0 * u - 1.0));
    }
    return {model, Dataset(std::move(samples), model->space())};
}

Scenario make_scenario(double theta1, std::size_t n, std::uint64_t seed) {
    PricingScenario sc;
    sc.theta1 = theta1;
    sc.n = n;
    sc.seed = seed;
    return make_scenario(sc);
}

std::uint64_t dataset_seed(std::uint64_t seed, double theta1, std::size_t replicate) {
    return rng::mix(seed, rng::double_bits(theta1), replicate);
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t replicate) { return rng::mix(seed, replicate); }

void SweepConfig::validate() const {
    if (thetas.empty() || rs.empty() || epss.empty()) throw DomainError("sweep lists must be nonempty");
    for (double t : thetas)
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("theta1 values must lie in [0, 1]");
    for (double e : epss)
        if (!(e >= 0.0)) throw DomainError("eps values must be nonnegative");
    for (double r : rs)
        if (!std::isfinite(r)) throw DomainError("r values must be finite");
    if (n < 2) throw DomainError("n must be at least 2");
    if (replications < 1) throw DomainError("replications must be at least 1");
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    solver.validate();
    bootstrap.validate();
}

std::size_t SweepResult::failures() const {
    std::size_t k = 0;
    for (const auto& r : rows) k += r.status != "ok";
    return k;
}

std::string SweepResult::to_csv(bool with_timings) const {
    std::string out =
        "theta1,r,eps,replicate,n,data_seed,bootstrap_seed,statistic,critical_value,reject,lambda,alpha,"
        "boundary_hit,assumption_ok,status,message";
    if (with_timings) out += ",runtime_ms";
    out += '\n';
    for (const auto& r : rows) {
        out += format_double(r.theta1) + "," + format_double(r.r) + "," + format_double(r.eps) + "," +
               std::to_string(r.replicate) + "," + std::to_string(r.n) + "," + std::to_string(r.data_seed) + "," +
               std::to_string(r.boot_seed) + "," + format_double(r.statistic) + "," + format_double(r.critical_value) +
               "," + (r.reject ? "1" : "0") + "," + format_double(r.lambda) + "," + format_double(r.alpha) + "," +
               (r.boundary_hit ? "1" : "0") + "," + (r.assumption_ok ? "1" : "0") + "," + r.status + "," +
               csv_field(r.message);
        if (with_timings) out += "," + format_double(r.runtime_ms);
        out += '\n';
    }
    return out;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const std::size_t units = cfg.thetas.size() * cfg.replications;
    const std::size_t per_unit = cfg.rs.size() * cfg.epss.size();
    std::vector<SweepRow> rows(units * per_unit);

    parallel_for(units, [&](std::size_t u) {
        const double theta = cfg.thetas[u / cfg.replications];
        const std::size_t rep = u % cfg.replications;
        SweepRow base;
        base.theta1 = theta;
        base.replicate = rep;
        base.n = cfg.n;
        base.data_seed = dataset_seed(cfg.seed, theta, rep);
        base.boot_seed = bootstrap_seed(cfg.bootstrap.seed, rep);
        for (std::size_t k = 0; k < per_unit; ++k) {
            rows[u * per_unit + k] = base;
            rows[u * per_unit + k].r = cfg.rs[k / cfg.epss.size()];
            rows[u * per_unit + k].eps = cfg.epss[k % cfg.epss.size()];
        }

        const auto unit_start = std::chrono::steady_clock::now();
        std::optional<Scenario> sc;
        CriticalValue cv;
        try {
            PricingScenario ps;
            ps.theta1 = theta;
            ps.n = cfg.n;
            ps.seed = base.data_seed;
            ps.noise = cfg.noise;
            sc.emplace(make_scenario(ps));
            BootstrapConfig boot = cfg.bootstrap;
            boot.seed = base.boot_seed;
            boot.dual_bound = cfg.solver.b_dual;
            cv = critical_value(*sc->model, sc->data, cfg.alpha_level, boot);
        } catch (const std::exception& e) {
            for (std::size_t k = 0; k < per_unit; ++k) {
                rows[u * per_unit + k].status = "error";
                rows[u * per_unit + k].message = e.what();
            }
            return;
        }
        const double shared_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - unit_start).count();

        for (std::size_t k = 0; k < per_unit; ++k) {
            SweepRow& row = rows[u * per_unit + k];
            const auto start = std::chrono::steady_clock::now();
            try {
                AssumptionOptions aopts;
                aopts.gradient_probes = 0;
                aopts.lattice = cfg.solver;
                row.assumption_ok = check_assumptions(*sc->model, sc->data, row.r, aopts).ok;
                const DualSolution sol = solve_dual(*sc->model, sc->data, row.r, row.eps, cfg.solver);
                row.statistic = sol.statistic;
                row.lambda = sol.argmax.lambda;
                row.alpha = sol.argmax.alpha;
                row.boundary_hit = sol.boundary_hit;
                row.critical_value = cv.eta;
                row.reject = row.statistic > row.critical_value;
                for (const auto& w : cv.warnings) row.message += (row.message.empty() ? "" : "; ") + w;
            } catch (const std::exception& e) {
                row.status = "error";
                row.message = e.what();
            }
            row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() +
                             shared_ms / static_cast<double>(per_unit);
        }
    });
    return {std::move(rows)};
}

} // namespace fairtest
