#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairtest/model.hpp"

namespace fairtest {

/// Multipliers of the utility (lambda) and fairness (alpha) constraints.
struct DualPoint {
    double lambda = 0.0;
    double alpha = 0.0;
};

enum class BoundaryPolicy {
    Escalate, ///< double B_dual on a boundary hit, error when it persists
    Report,   ///< keep B_dual fixed and flag the hit
};

struct SolverConfig {
    double b_dual = 50.0;
    int inner_grid = 33;       ///< lattice points per axis for d <= 3
    int sobol_points = 4096;   ///< lattice size for d > 3
    int polish_seeds = 2;      ///< best lattice seeds refined per sample
    double inner_tol = 1e-9;   ///< polish stops when a step moves less than this (box-relative)
    int inner_max_iters = 200;
    double outer_tol = 1e-10;  ///< stop a cycle when the objective improves less than this
    double line_tol = 1e-9;    ///< golden-section interval width, relative to B_dual
    int max_outer_iters = 60;  ///< coordinate-ascent cycles in the lattice phase
    int refine_cycles = 2;     ///< coordinate-ascent cycles with the polished inner solve
    double refine_window = 0.02; ///< half-width of the polished line searches, relative to B_dual
    int restarts = 3;
    int max_doublings = 3;
    BoundaryPolicy boundary_policy = BoundaryPolicy::Escalate;
    std::uint64_t seed = 0x5eedULL;

    /// Throws DomainError on out-of-range settings.
    void validate() const;
};

/// Seeding points, row-major: an inner_grid^d lattice for d <= 3, otherwise
/// the first sobol_points of a Sobol sequence, scaled to the box.
std::vector<double> seed_lattice(const CovariateSpace& box, const SolverConfig& cfg);

struct InnerResult {
    double value = 0.0;
    Vec argmin;
};

/// Per-sample inner problems
///
///   gamma_i(lambda, alpha) = min_{x in box} ||x - x_i||^2 + alpha |pi_1(x) - pi_0(x)| - lambda M(x)
///
/// for a fixed model and a fixed set of anchor points. The seeding lattice and
/// the model values on it are computed once and reused for every (lambda, alpha).
class InnerSolver {
public:
    InnerSolver(const CompositeModel& model, std::vector<Vec> anchors, const SolverConfig& cfg);

    std::size_t size() const noexcept { return anchors_.size(); }
    const Vec& anchor(std::size_t i) const { return anchors_[i]; }
    std::size_t lattice_size() const noexcept { return lattice_utility_.size(); }

    /// Exact objective at x (x must be inside the box).
    double objective(std::size_t i, DualPoint point, std::span<const double> x) const;

    /// Lattice-only minimum: min over the lattice and the anchor itself.
    /// Concave in (lambda, alpha) and never below the true minimum.
    InnerResult minimize_lattice(std::size_t i, DualPoint point) const;

    /// Lattice seeding followed by branch-wise projected-gradient polish.
    InnerResult minimize(std::size_t i, DualPoint point) const;

private:
    struct Candidate {
        double value;
        std::size_t index; // lattice index, or lattice_size() for the anchor
    };

    void polish_branch(std::size_t i, DualPoint point, int sign, Vec x, InnerResult& best) const;
    void add_kink_seeds();
    bool project_to_kink(Vec& x) const;
    void kink_descent(std::size_t i, DualPoint point, Vec& x) const;
    void offer(std::size_t i, DualPoint point, const Vec& x, InnerResult& best) const;

    const CompositeModel& model_;
    SolverConfig cfg_;
    std::vector<Vec> anchors_;
    std::vector<double> lattice_; // row-major, lattice_size() x d; grid then kink roots
    Vec lattice_utility_;
    Vec lattice_gap_;             // |pi_1 - pi_0|
    Vec anchor_utility_;
    Vec anchor_gap_;
    double scale_ = 1.0;          // largest box width
};

/// Single-sample inner minimization. Returns the minimum and an attaining point.
InnerResult gamma_i(const CompositeModel& model, std::span<const double> x_i, DualPoint point,
                    const SolverConfig& cfg);

/// Dual objective lambda r - alpha eps + (1/N) sum_i gamma_i(lambda, alpha) for
/// one dataset, with the inner lattice cached across evaluations.
class DualProblem {
public:
    DualProblem(const CompositeModel& model, const Dataset& data, double r, double eps,
                const SolverConfig& cfg);

    double objective(DualPoint point) const;
    double lattice_objective(DualPoint point) const;
    std::vector<Vec> minimizers(DualPoint point) const;

    std::size_t size() const noexcept { return inner_.size(); }
    const SolverConfig& config() const noexcept { return cfg_; }
    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    double evaluate(DualPoint point, bool polished) const;

    double r_;
    double eps_;
    SolverConfig cfg_;
    InnerSolver inner_;
    mutable std::size_t evaluations_ = 0;
};

double dual_objective(const CompositeModel& model, const Dataset& data, double r, double eps,
                      DualPoint point, const SolverConfig& cfg);

struct DualSolution {
    double value = 0.0;      ///< projection distance R_{r,eps}
    double statistic = 0.0;  ///< N * value
    DualPoint argmax;
    std::vector<Vec> inner_minimizers;
    bool boundary_hit = false;
    double b_dual = 0.0;     ///< bound in force for the returned solution
    int doublings = 0;
    std::size_t evaluations = 0;
    std::vector<std::string> warnings;
};

/// sup over [0, B_dual]^2 of the dual objective. With BoundaryPolicy::Escalate
/// a maximizer on the boundary doubles B_dual (up to max_doublings) and then
/// throws UnboundedDualError.
DualSolution solve_dual(const CompositeModel& model, const Dataset& data, double r, double eps,
                        const SolverConfig& cfg);

/// Maximizes a concave function of one variable on [lo, hi]; endpoints are
/// compared explicitly so boundary maxima are exact.
std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                             double tol);

} // namespace fairtest
