#include "fairtest/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fairtest/errors.hpp"
#include "fairtest/rng.hpp"

namespace fairtest {

CovariateSpace::CovariateSpace(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size())
        throw DomainError("covariate box needs matching, nonempty lower/upper bounds");
    for (std::size_t j = 0; j < lower_.size(); ++j) {
        if (!(lower_[j] < upper_[j]) || !std::isfinite(lower_[j]) || !std::isfinite(upper_[j])) {
            std::ostringstream msg;
            msg << "covariate box coordinate " << j << " has lower >= upper";
            throw DomainError(msg.str());
        }
    }
}

CovariateSpace CovariateSpace::from_points(std::span<const Vec> points, double pad) {
    if (points.empty()) throw DomainError("cannot infer a covariate box from no points");
    const std::size_t d = points.front().size();
    Vec lo(d, HUGE_VAL), hi(d, -HUGE_VAL);
    for (const auto& p : points) {
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], p[j]);
            hi[j] = std::max(hi[j], p[j]);
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double range = hi[j] - lo[j];
        if (range > 0.0) {
            lo[j] -= pad * range;
            hi[j] += pad * range;
        } else {
            lo[j] -= 0.5;
            hi[j] += 0.5;
        }
    }
    return {std::move(lo), std::move(hi)};
}

bool CovariateSpace::contains(std::span<const double> x, double tol) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double slack = tol * (upper_[j] - lower_[j]);
        if (!(x[j] >= lower_[j] - slack && x[j] <= upper_[j] + slack)) return false;
    }
    return true;
}

void CovariateSpace::require_contains(std::span<const double> x) const {
    if (x.size() != dim()) {
        std::ostringstream msg;
        msg << "point has dimension " << x.size() << ", covariate box has " << dim();
        throw DomainError(msg.str());
    }
    if (contains(x)) return;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] >= lower_[j] && x[j] <= upper_[j])) {
            std::ostringstream msg;
            msg << "coordinate " << j << " = " << x[j] << " outside [" << lower_[j] << ", "
                << upper_[j] << "]";
            throw DomainError(msg.str());
        }
    }
}

void CovariateSpace::project(std::span<double> x) const noexcept {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lower_[j], upper_[j]);
}

Dataset::Dataset(std::vector<Sample> samples, CovariateSpace space)
    : samples_(std::move(samples)), space_(std::move(space)) {
    if (samples_.empty()) throw DomainError("dataset is empty");
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& smp = samples_[i];
        if ((smp.s != 0 && smp.s != 1) || (smp.w != 0 && smp.w != 1)) {
            std::ostringstream msg;
            msg << "sample " << i << ": s and w must be 0 or 1";
            throw DomainError(msg.str());
        }
        if (!std::isfinite(smp.y)) {
            std::ostringstream msg;
            msg << "sample " << i << ": non-finite outcome";
            throw DomainError(msg.str());
        }
        if (!space_.contains(smp.x)) {
            std::ostringstream msg;
            msg << "sample " << i << " lies outside the covariate box";
            throw DomainError(msg.str());
        }
        seen[smp.s] = true;
    }
    if (!seen[0] || !seen[1]) throw DomainError("dataset must contain both groups s=0 and s=1");
}

double Dataset::max_outcome() const noexcept {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.y);
    return m;
}

std::size_t Dataset::group_count(int a) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [a](const Sample& s) { return s.s == a; }));
}

FunctionPolicy::FunctionPolicy(std::size_t dim, ScalarFn pi, GradientFn grad_pi)
    : dim_(dim), pi_(std::move(pi)), grad_pi_(std::move(grad_pi)) {}

double FunctionPolicy::propensity(std::span<const double> x, int group) const { return pi_(x, group); }

void FunctionPolicy::propensity_gradient(std::span<const double> x, int group,
                                         std::span<double> out) const {
    grad_pi_(x, group, out);
}

FunctionUtility::FunctionUtility(std::size_t dim, OutcomeFn m, OutcomeGradientFn grad_m, ScalarFn p,
                                 GradientFn grad_p)
    : dim_(dim), m_(std::move(m)), grad_m_(std::move(grad_m)), p_(std::move(p)), grad_p_(std::move(grad_p)) {}

double FunctionUtility::outcome(int treatment, std::span<const double> x, int group) const {
    return m_(treatment, x, group);
}

void FunctionUtility::outcome_gradient(int treatment, std::span<const double> x, int group,
                                       std::span<double> out) const {
    grad_m_(treatment, x, group, out);
}

double FunctionUtility::group_probability(std::span<const double> x, int group) const { return p_(x, group); }

void FunctionUtility::group_probability_gradient(std::span<const double> x, int group,
                                                 std::span<double> out) const {
    grad_p_(x, group, out);
}

CompositeModel::CompositeModel(std::shared_ptr<const PolicyModel> policy,
                               std::shared_ptr<const UtilityModel> utility, CovariateSpace space)
    : policy_(std::move(policy)), utility_(std::move(utility)), space_(std::move(space)) {
    if (!policy_ || !utility_) throw DomainError("composite model needs a policy and a utility model");
    if (policy_->dim() != space_.dim() || utility_->dim() != space_.dim())
        throw DomainError("policy, utility and covariate box dimensions differ");
}

double CompositeModel::utility(std::span<const double> x) const {
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
        const double pi = policy_->propensity(x, a);
        const double m1 = utility_->outcome(1, x, a);
        const double m0 = utility_->outcome(0, x, a);
        total += utility_->group_probability(x, a) * (m1 * pi + m0 * (1.0 - pi));
    }
    return total;
}

double CompositeModel::signed_gap(std::span<const double> x) const {
    return policy_->propensity(x, 1) - policy_->propensity(x, 0);
}

namespace {

// Per-thread scratch so the hot evaluation path does not allocate.
struct Scratch {
    Vec grad_pi, grad_m1, grad_m0, grad_p, tmp;
    void resize(std::size_t d) {
        grad_pi.resize(d);
        grad_m1.resize(d);
        grad_m0.resize(d);
        grad_p.resize(d);
        tmp.resize(d);
    }
};

Scratch& scratch(std::size_t d) {
    thread_local Scratch s;
    s.resize(d);
    return s;
}

} // namespace

void CompositeModel::utility_gradient(std::span<const double> x, std::span<double> out) const {
    const std::size_t d = dim();
    auto& sc = scratch(d);
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < 2; ++a) {
        const double pi = policy_->propensity(x, a);
        const double m1 = utility_->outcome(1, x, a);
        const double m0 = utility_->outcome(0, x, a);
        const double p = utility_->group_probability(x, a);
        policy_->propensity_gradient(x, a, sc.grad_pi);
        utility_->outcome_gradient(1, x, a, sc.grad_m1);
        utility_->outcome_gradient(0, x, a, sc.grad_m0);
        utility_->group_probability_gradient(x, a, sc.grad_p);
        const double inner = m1 * pi + m0 * (1.0 - pi);
        for (std::size_t j = 0; j < d; ++j) {
            const double d_inner =
                sc.grad_m1[j] * pi + m1 * sc.grad_pi[j] + sc.grad_m0[j] * (1.0 - pi) - m0 * sc.grad_pi[j];
            out[j] += sc.grad_p[j] * inner + p * d_inner;
        }
    }
}

void CompositeModel::gap_gradient(std::span<const double> x, std::span<double> out) const {
    auto& sc = scratch(dim());
    policy_->propensity_gradient(x, 1, out);
    policy_->propensity_gradient(x, 0, sc.tmp);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= sc.tmp[j];
}

void CompositeModel::evaluate(std::span<const double> x, bool with_gradients, PointValues& out) const {
    out.utility = utility(x);
    out.gap = signed_gap(x);
    if (!with_gradients) return;
    out.utility_gradient.resize(dim());
    out.gap_gradient.resize(dim());
    utility_gradient(x, out.utility_gradient);
    gap_gradient(x, out.gap_gradient);
}

double eval_M(const CompositeModel& model, std::span<const double> x) {
    model.space().require_contains(x);
    const double v = model.utility(x);
    if (!std::isfinite(v)) throw NumericError("composite utility is not finite", Vec(x.begin(), x.end()));
    return v;
}

Vec eval_gradM(const CompositeModel& model, std::span<const double> x) {
    model.space().require_contains(x);
    Vec g(model.dim());
    model.utility_gradient(x, g);
    for (double v : g)
        if (!std::isfinite(v)) throw NumericError("utility gradient is not finite", Vec(x.begin(), x.end()));
    return g;
}

double fairness_gap(const PolicyModel& policy, std::span<const double> x) {
    return std::abs(policy.propensity(x, 1) - policy.propensity(x, 0));
}

double fairness_gap(const CompositeModel& model, std::span<const double> x) {
    model.space().require_contains(x);
    return fairness_gap(model.policy(), x);
}

EmpiricalSummaries empirical_summaries(const CompositeModel& model, const Dataset& data) {
    const std::size_t n = data.size();
    if (n < 2) throw DomainError("sample variance needs at least two samples");
    Vec util(n), gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        util[i] = model.utility(data[i].x);
        gap[i] = std::abs(model.signed_gap(data[i].x));
        if (!std::isfinite(util[i]) || !std::isfinite(gap[i]))
            throw NumericError("non-finite model value at sample " + std::to_string(i), data[i].x);
    }
    EmpiricalSummaries out;
    for (std::size_t i = 0; i < n; ++i) {
        out.mean_utility += util[i];
        out.mean_gap += gap[i];
    }
    out.mean_utility /= static_cast<double>(n);
    out.mean_gap /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double du = util[i] - out.mean_utility;
        const double dg = gap[i] - out.mean_gap;
        out.var_utility += du * du;
        out.var_gap += dg * dg;
        out.cov_utility_gap += du * dg;
    }
    // a constant column must report exactly zero, not rounding noise from the mean
    auto constant = [](const Vec& v) { return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end(); };
    if (constant(util)) out.var_utility = out.cov_utility_gap = 0.0;
    if (constant(gap)) out.var_gap = out.cov_utility_gap = 0.0;
    const double denom = static_cast<double>(n - 1);
    out.var_utility /= denom;
    out.var_gap /= denom;
    out.cov_utility_gap /= denom;
    return out;
}

double sdp_discrepancy(const PolicyModel& policy, const Dataset& data, std::size_t points) {
    const std::size_t n = data.size();
    Vec p1(n), p0(n);
    for (std::size_t i = 0; i < n; ++i) {
        p1[i] = policy.propensity(data[i].x, 1);
        p0[i] = policy.propensity(data[i].x, 0);
    }
    std::sort(p1.begin(), p1.end());
    std::sort(p0.begin(), p0.end());
    double total = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double tau = (static_cast<double>(k) + 0.5) / static_cast<double>(points);
        // count of values strictly greater than tau
        const auto above1 = p1.end() - std::upper_bound(p1.begin(), p1.end(), tau);
        const auto above0 = p0.end() - std::upper_bound(p0.begin(), p0.end(), tau);
        total += std::abs(static_cast<double>(above1 - above0)) / static_cast<double>(n);
    }
    return total / static_cast<double>(points);
}

namespace {

struct FdTracker {
    GradientCheckResult& result;
    double rtol;

    void compare(const std::string& name, std::span<const double> analytic, std::span<const double> fd,
                 std::span<const double> probe) {
        for (std::size_t j = 0; j < analytic.size(); ++j) {
            const double diff = std::abs(analytic[j] - fd[j]);
            const double scale = std::max(std::abs(analytic[j]), std::abs(fd[j]));
            const double err = diff / std::max(scale, 1.0);
            if (!(diff <= rtol * scale + 1e-7)) result.passed = false;
            if (err > result.worst_error || !std::isfinite(diff)) {
                result.worst_error = std::isfinite(diff) ? err : HUGE_VAL;
                result.worst_function = name + "[" + std::to_string(j) + "]";
                result.worst_probe.assign(probe.begin(), probe.end());
            }
        }
    }
};

template <class F>
Vec central_difference(F&& f, std::span<const double> x, double h) {
    Vec probe(x.begin(), x.end());
    Vec g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double orig = probe[j];
        probe[j] = orig + h;
        const double up = f(probe);
        probe[j] = orig - h;
        const double down = f(probe);
        probe[j] = orig;
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace

GradientCheckResult check_gradients(const CompositeModel& model, std::size_t probes, std::uint64_t seed,
                                    double step, double rtol) {
    GradientCheckResult result;
    result.probes = probes;
    FdTracker tracker{result, rtol};
    const auto& box = model.space();
    const std::size_t d = model.dim();
    const auto& policy = model.policy();
    const auto& util = model.utility_model();
    Vec x(d), analytic(d);
    for (std::size_t k = 0; k < probes; ++k) {
        rng::Stream stream(rng::mix(seed, 0x67726164ULL, k));
        for (std::size_t j = 0; j < d; ++j) {
            const double margin = 2.0 * step;
            x[j] = stream.uniform(box.lower()[j] + margin, box.upper()[j] - margin);
        }
        for (int a = 0; a < 2; ++a) {
            const std::string suffix = "(a=" + std::to_string(a) + ")";
            policy.propensity_gradient(x, a, analytic);
            tracker.compare("pi" + suffix, analytic,
                            central_difference([&](const Vec& p) { return policy.propensity(p, a); }, x, step), x);
            util.group_probability_gradient(x, a, analytic);
            tracker.compare("p" + suffix, analytic,
                            central_difference([&](const Vec& p) { return util.group_probability(p, a); }, x, step),
                            x);
            for (int w = 0; w < 2; ++w) {
                util.outcome_gradient(w, x, a, analytic);
                tracker.compare("m" + std::to_string(w) + suffix, analytic,
                                central_difference([&](const Vec& p) { return util.outcome(w, p, a); }, x, step), x);
            }
        }
        model.utility_gradient(x, analytic);
        tracker.compare("M", analytic, central_difference([&](const Vec& p) { return model.utility(p); }, x, step), x);
        model.gap_gradient(x, analytic);
        tracker.compare("pi1-pi0", analytic,
                        central_difference([&](const Vec& p) { return model.signed_gap(p); }, x, step), x);
    }
    return result;
}

} // namespace fairtest
