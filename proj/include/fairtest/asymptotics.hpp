#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairtest/model.hpp"

namespace fairtest {

/// Per-sample gradient data behind the limiting quadratic forms. With
/// g_M = DM(x_i) and g_h = D[pi_1 - pi_0](x_i):
///   s_plus  = (g_M; -g_h),  s_minus = (g_M; g_h)
///   v_plus  = (g_M.g_h, -|g_h|^2),  v_minus = (g_M.g_h, |g_h|^2)
struct ScoreVectors {
    std::size_t dim = 0;
    std::vector<Vec> s_plus;
    std::vector<Vec> s_minus;
    std::vector<std::array<double, 2>> v_plus;
    std::vector<std::array<double, 2>> v_minus;
    // Gram entries g_M.g_M, g_M.g_h, g_h.g_h
    Vec mm, mh, hh;

    std::size_t size() const noexcept { return mm.size(); }
};

enum class Branch { Plus, Minus };

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct Sym2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;
};

struct BootstrapConfig {
    int draws = 10000;
    double fp_tol = 1e-8;
    int fp_max_iters = 500;
    double damping = 0.5;
    double ridge = 1e-8;
    std::uint64_t seed = 0x5eedULL;
    bool use_joint_cov = false;
    double zeta_max = 0.0;   ///< box for zeta; 0 selects sqrt(N) * dual_bound
    double dual_bound = 50.0;
    bool cross_check = false; ///< also run the fixed-point route on every draw

    void validate() const;
};

struct FixedPointResult {
    std::array<double, 2> zeta{0.0, 0.0};
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

ScoreVectors build_scores(const CompositeModel& model, const Dataset& data);

/// Sample average of the 2x2 Gram matrix of (g_M, -+g_h) over the samples
/// whose branch indicator holds at zeta (no ridge).
Sym2 moment_matrix(const ScoreVectors& scores, std::array<double, 2> zeta, Branch branch);

/// (moment_matrix + ridge I)^{-1}. Throws DegenerateDirection when the
/// condition number exceeds 1e12.
Sym2 weighted_moment_matrix(const ScoreVectors& scores, std::array<double, 2> zeta, Branch branch,
                            double ridge);

/// zeta' w - zeta' A(zeta) zeta / 4 for one branch.
double bound_objective(const ScoreVectors& scores, std::array<double, 2> w, std::array<double, 2> zeta,
                       Branch branch);

/// Effective zeta box side for a dataset of `n` samples.
double zeta_box(const BootstrapConfig& cfg, std::size_t n);

/// Damped iteration zeta <- (1-d) zeta + d T(zeta) from zeta = 0, where T(zeta)
/// maximizes the quadratic with A frozen at zeta over [0, Z]^2.
FixedPointResult solve_fixed_point(const ScoreVectors& scores, std::array<double, 2> w, Branch branch,
                                   const BootstrapConfig& cfg);

/// Exact sup over zeta in [0, Z]^2 of both branch objectives, by enumerating
/// the angular sectors on which the indicator pattern is constant. Built once
/// per score set and reused across draws.
class BoundEvaluator {
public:
    BoundEvaluator(const ScoreVectors& scores, double zeta_max);

    double evaluate(std::array<double, 2> w) const;
    double zeta_max() const noexcept { return zmax_; }
    std::size_t pieces() const noexcept { return pieces_.size(); }

private:
    struct Piece {
        Sym2 a;
        std::vector<std::array<double, 2>> vertices; // convex polygon, origin first
        double phi_lo, phi_hi;
    };
    void add_branch(const ScoreVectors& scores, Branch branch);

    double zmax_;
    std::vector<Piece> pieces_;
};

double compute_bound(const ScoreVectors& scores, std::array<double, 2> w, const BootstrapConfig& cfg);

/// Type-7 sample quantile; sorts a copy.
double quantile_type7(std::vector<double> values, double p);

struct CriticalValue {
    double eta = 0.0;
    double var_M = 0.0;
    double var_gap = 0.0;
    double zeta_max = 0.0;
    std::vector<double> bounds; ///< per-draw bound values, in draw order
    std::size_t fp_converged = 0;
    double fp_max_disagreement = 0.0;
    std::vector<std::string> warnings;
};

CriticalValue critical_value(const CompositeModel& model, const Dataset& data, double alpha_level,
                             const BootstrapConfig& cfg);

} // namespace fairtest
