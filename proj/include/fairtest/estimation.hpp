#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "fairtest/model.hpp"

namespace fairtest {

/// Per-coordinate z-scoring used by every fit. Constant columns get scale 1.
struct Standardizer {
    Vec mean;
    Vec scale;

    static Standardizer from_points(std::span<const Vec> points);
    void apply(std::span<const double> x, std::span<double> out) const;
};

/// sigmoid(w'z + b) on standardized covariates z; weights hold w then b.
struct LogisticFit {
    Vec weights;
    double reg = 0.0;
    int group = -1;          ///< modeled group, or -1 for the group model itself
    Standardizer standardizer;
    int iterations = 0;
    double objective = 0.0;  ///< mean log loss + (reg/2)|weights|^2
    double grad_norm = 0.0;
    bool converged = false;

    double predict(std::span<const double> x) const;
    /// d/dx of predict, in original covariate units.
    void gradient(std::span<const double> x, std::span<double> out) const;
    /// Slope with respect to original covariate j.
    double slope(std::size_t j) const { return weights[j] / standardizer.scale[j]; }
};

struct LogisticOptions {
    int max_iters = 5000;
    double grad_tol = 1e-8;
};

/// Ridge-penalized logistic regression by gradient descent with Barzilai-Borwein
/// trial steps and Armijo backtracking. `init` (optional) is the starting weight
/// vector in standardized units.
LogisticFit fit_logistic(std::span<const Vec> x, std::span<const int> labels, double reg,
                         const Standardizer& standardizer, const LogisticOptions& opts = {}, Vec init = {});

/// Gaussian-kernel Nadaraya-Watson regression in standardized coordinates with
/// per-coordinate bandwidths.
class KernelRegressor {
public:
    KernelRegressor() = default;
    /// bandwidth > 0 overrides Silverman's rule (value in standardized units).
    KernelRegressor(std::span<const Vec> x, std::span<const double> y, const Standardizer& standardizer,
                    double bandwidth = 0.0);

    double predict(std::span<const double> x) const;
    /// Value and gradient (original units) in one pass.
    double predict(std::span<const double> x, std::span<double> grad) const;

    std::size_t size() const noexcept { return targets_.size(); }
    const Vec& bandwidths() const noexcept { return bandwidth_; }
    double min_target() const noexcept { return min_y_; }
    double max_target() const noexcept { return max_y_; }

private:
    std::size_t dim_ = 0;
    Vec centers_; // row-major, standardized
    Vec targets_;
    Vec bandwidth_;
    Standardizer standardizer_;
    double min_y_ = 0.0, max_y_ = 0.0;
    std::uint64_t id_ = 0; ///< keys the per-thread memo of the last query
};

/// pi_a(x) = sigmoid fits per group.
class LogisticPolicy final : public PolicyModel {
public:
    explicit LogisticPolicy(std::array<LogisticFit, 2> fits);
    std::size_t dim() const override { return fits_[0].standardizer.mean.size(); }
    double propensity(std::span<const double> x, int group) const override;
    void propensity_gradient(std::span<const double> x, int group, std::span<double> out) const override;
    const LogisticFit& fit(int group) const { return fits_[static_cast<std::size_t>(group)]; }

private:
    std::array<LogisticFit, 2> fits_;
};

/// pi_a(x) from precomputed per-row score columns, smoothed over x.
class ScorePolicy final : public PolicyModel {
public:
    ScorePolicy(std::array<KernelRegressor, 2> smoothers, std::size_t dim);
    std::size_t dim() const override { return dim_; }
    double propensity(std::span<const double> x, int group) const override;
    void propensity_gradient(std::span<const double> x, int group, std::span<double> out) const override;
    const KernelRegressor& smoother(int group) const { return smoothers_[static_cast<std::size_t>(group)]; }

private:
    std::array<KernelRegressor, 2> smoothers_;
    std::size_t dim_;
};

/// m_w(x,a) by kernel regression per (w,a) cell; p_1 by logistic regression of s.
class FittedUtility final : public UtilityModel {
public:
    FittedUtility(std::array<KernelRegressor, 4> cells, LogisticFit group_model);
    std::size_t dim() const override { return group_.standardizer.mean.size(); }
    double outcome(int treatment, std::span<const double> x, int group) const override;
    void outcome_gradient(int treatment, std::span<const double> x, int group,
                          std::span<double> out) const override;
    double group_probability(std::span<const double> x, int group) const override;
    void group_probability_gradient(std::span<const double> x, int group, std::span<double> out) const override;

    const KernelRegressor& cell(int treatment, int group) const { return cells_[index(treatment, group)]; }
    const LogisticFit& group_model() const { return group_; }

private:
    static std::size_t index(int w, int a) { return static_cast<std::size_t>(2 * w + a); }
    std::array<KernelRegressor, 4> cells_;
    LogisticFit group_;
};

std::shared_ptr<LogisticPolicy> fit_propensity(const Dataset& data, double reg, const LogisticOptions& opts = {});
LogisticFit fit_group_model(const Dataset& data, double reg, const LogisticOptions& opts = {});
std::shared_ptr<FittedUtility> fit_outcome(const Dataset& data, double bandwidth, double group_reg,
                                           const LogisticOptions& opts = {});
/// scores[i] = (pi_0, pi_1) at sample i.
std::shared_ptr<ScorePolicy> smooth_scores(const Dataset& data, std::span<const std::array<double, 2>> scores,
                                           double bandwidth = 0.0);

} // namespace fairtest
