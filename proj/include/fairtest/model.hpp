#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fairtest {

using Vec = std::vector<double>;

/// Axis-aligned covariate box.
class CovariateSpace {
public:
    CovariateSpace() = default;
    CovariateSpace(Vec lower, Vec upper);

    /// Data min/max per coordinate, padded by `pad` of the range on each side.
    /// Degenerate coordinates get a unit-width box around the value.
    static CovariateSpace from_points(std::span<const Vec> points, double pad = 0.05);

    std::size_t dim() const noexcept { return lower_.size(); }
    const Vec& lower() const noexcept { return lower_; }
    const Vec& upper() const noexcept { return upper_; }

    bool contains(std::span<const double> x, double tol = 1e-12) const noexcept;
    /// Throws DomainError naming the first offending coordinate.
    void require_contains(std::span<const double> x) const;
    /// Clamps x into the box in place.
    void project(std::span<double> x) const noexcept;

private:
    Vec lower_;
    Vec upper_;
};

struct Sample {
    Vec x;
    int s = 0;
    int w = 0;
    double y = 0.0;
};

/// Nonempty sample with both groups present, every covariate inside the box.
class Dataset {
public:
    Dataset(std::vector<Sample> samples, CovariateSpace space);

    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t dim() const noexcept { return space_.dim(); }
    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const CovariateSpace& space() const noexcept { return space_; }

    double max_outcome() const noexcept;
    std::size_t group_count(int a) const noexcept;

private:
    std::vector<Sample> samples_;
    CovariateSpace space_;
};

/// Propensity scores pi_a(x) = P(W=1 | X=x, S=a) and their x-gradients.
class PolicyModel {
public:
    virtual ~PolicyModel() = default;
    virtual std::size_t dim() const = 0;
    virtual double propensity(std::span<const double> x, int group) const = 0;
    virtual void propensity_gradient(std::span<const double> x, int group,
                                     std::span<double> out) const = 0;
};

/// Conditional mean utilities m_w(x,a) and group probabilities p_a(x).
class UtilityModel {
public:
    virtual ~UtilityModel() = default;
    virtual std::size_t dim() const = 0;
    virtual double outcome(int treatment, std::span<const double> x, int group) const = 0;
    virtual void outcome_gradient(int treatment, std::span<const double> x, int group,
                                  std::span<double> out) const = 0;
    virtual double group_probability(std::span<const double> x, int group) const = 0;
    virtual void group_probability_gradient(std::span<const double> x, int group,
                                            std::span<double> out) const = 0;
};

using ScalarFn = std::function<double(std::span<const double>, int)>;
using GradientFn = std::function<void(std::span<const double>, int, std::span<double>)>;

/// PolicyModel backed by callables; handy for analytic test models.
class FunctionPolicy final : public PolicyModel {
public:
    FunctionPolicy(std::size_t dim, ScalarFn pi, GradientFn grad_pi);
    std::size_t dim() const override { return dim_; }
    double propensity(std::span<const double> x, int group) const override;
    void propensity_gradient(std::span<const double> x, int group,
                             std::span<double> out) const override;

private:
    std::size_t dim_;
    ScalarFn pi_;
    GradientFn grad_pi_;
};

using OutcomeFn = std::function<double(int, std::span<const double>, int)>;
using OutcomeGradientFn = std::function<void(int, std::span<const double>, int, std::span<double>)>;

class FunctionUtility final : public UtilityModel {
public:
    FunctionUtility(std::size_t dim, OutcomeFn m, OutcomeGradientFn grad_m, ScalarFn p,
                    GradientFn grad_p);
    std::size_t dim() const override { return dim_; }
    double outcome(int treatment, std::span<const double> x, int group) const override;
    void outcome_gradient(int treatment, std::span<const double> x, int group,
                          std::span<double> out) const override;
    double group_probability(std::span<const double> x, int group) const override;
    void group_probability_gradient(std::span<const double> x, int group,
                                    std::span<double> out) const override;

private:
    std::size_t dim_;
    OutcomeFn m_;
    OutcomeGradientFn grad_m_;
    ScalarFn p_;
    GradientFn grad_p_;
};

/// Values the solvers need at one point. `gap` is the signed pi_1 - pi_0.
struct PointValues {
    double utility = 0.0;
    double gap = 0.0;
    Vec utility_gradient;
    Vec gap_gradient;
};

/// Policy + utility on a covariate box, exposing the composite utility
///
///   M(x) = sum_a p_a(x) [ m_1(x,a) pi_a(x) + m_0(x,a) (1 - pi_a(x)) ]
///
/// and its gradient. Immutable; all members are safe to call concurrently.
class CompositeModel {
public:
    CompositeModel(std::shared_ptr<const PolicyModel> policy,
                   std::shared_ptr<const UtilityModel> utility, CovariateSpace space);

    std::size_t dim() const noexcept { return space_.dim(); }
    const CovariateSpace& space() const noexcept { return space_; }
    const PolicyModel& policy() const noexcept { return *policy_; }
    const UtilityModel& utility_model() const noexcept { return *utility_; }

    // Unchecked evaluation for the solvers' inner loops; x must be in the box.
    double utility(std::span<const double> x) const;
    double signed_gap(std::span<const double> x) const;
    void evaluate(std::span<const double> x, bool with_gradients, PointValues& out) const;
    void utility_gradient(std::span<const double> x, std::span<double> out) const;
    void gap_gradient(std::span<const double> x, std::span<double> out) const;

private:
    std::shared_ptr<const PolicyModel> policy_;
    std::shared_ptr<const UtilityModel> utility_;
    CovariateSpace space_;
};

/// M(x). Throws DomainError outside the box.
double eval_M(const CompositeModel& model, std::span<const double> x);
/// DM(x). Throws DomainError outside the box.
Vec eval_gradM(const CompositeModel& model, std::span<const double> x);
/// |pi_1(x) - pi_0(x)|. Throws DomainError outside the box.
double fairness_gap(const CompositeModel& model, std::span<const double> x);
double fairness_gap(const PolicyModel& policy, std::span<const double> x);

struct EmpiricalSummaries {
    double mean_utility = 0.0;
    double var_utility = 0.0;
    double mean_gap = 0.0;
    double var_gap = 0.0;
    double cov_utility_gap = 0.0;
};

/// Plug-in means and unbiased (N-1) variances of M(X_i) and |pi_1-pi_0|(X_i).
EmpiricalSummaries empirical_summaries(const CompositeModel& model, const Dataset& data);

/// Threshold-averaged discrepancy E_tau |Q(pi_1 > tau) - Q(pi_0 > tau)| of the
/// empirical covariate measure, by a midpoint Riemann sum over [0,1].
double sdp_discrepancy(const PolicyModel& policy, const Dataset& data, std::size_t points = 10000);

struct GradientCheckResult {
    bool passed = true;
    double worst_error = 0.0; // |analytic - fd| / max(1, |fd|)
    std::string worst_function;
    Vec worst_probe;
    std::size_t probes = 0;
};

/// Central finite-difference check of every analytic gradient (pi_a, m_w, p_a,
/// M, pi_1-pi_0) at `probes` uniform points in the box.
GradientCheckResult check_gradients(const CompositeModel& model, std::size_t probes,
                                    std::uint64_t seed, double step = 1e-6, double rtol = 1e-4);

} // namespace fairtest
