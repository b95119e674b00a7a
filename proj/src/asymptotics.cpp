#include "fairtest/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fairtest/errors.hpp"
#include "fairtest/parallel.hpp"
#include "fairtest/rng.hpp"

namespace fairtest {
namespace {

using Pt = std::array<double, 2>;

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kQuarterPi = std::numbers::pi / 4.0;

double quad_value(const Sym2& a, Pt w, Pt z) {
    const double q = a.a11 * z[0] * z[0] + 2.0 * a.a12 * z[0] * z[1] + a.a22 * z[1] * z[1];
    return w[0] * z[0] + w[1] * z[1] - 0.25 * q;
}

struct QpResult {
    double value;
    Pt argmax;
};

// Max of the concave quadratic w'z - z'Az/4 over a convex polygon listed
// counter-clockwise. A concave function peaks either at its stationary point
// (when inside) or on the boundary, where each edge is a 1-d concave problem.
QpResult max_over_polygon(const Sym2& a, Pt w, const std::vector<Pt>& poly) {
    QpResult best{quad_value(a, w, poly[0]), poly[0]};
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Pt p = poly[k];
        const Pt q = poly[(k + 1) % n];
        const Pt d{q[0] - p[0], q[1] - p[1]};
        // f(t) = c + b t + c2 t^2 on [0,1]
        const double ad0 = a.a11 * d[0] + a.a12 * d[1];
        const double ad1 = a.a12 * d[0] + a.a22 * d[1];
        const double c2 = -0.25 * (d[0] * ad0 + d[1] * ad1);
        const double b = w[0] * d[0] + w[1] * d[1] - 0.5 * (p[0] * ad0 + p[1] * ad1);
        double t = 1.0;
        if (c2 < 0.0) t = std::clamp(-b / (2.0 * c2), 0.0, 1.0);
        else if (b <= 0.0) t = 0.0;
        const Pt z{p[0] + t * d[0], p[1] + t * d[1]};
        const double v = quad_value(a, w, z);
        if (v > best.value) best = {v, z};
    }
    const double det = a.a11 * a.a22 - a.a12 * a.a12;
    const double scale = std::max(a.a11 * a.a11 + a.a22 * a.a22 + 2.0 * a.a12 * a.a12, 1e-300);
    if (n >= 3 && a.a11 > 0.0 && det > 1e-14 * scale) {
        // z = 2 A^{-1} w
        const Pt z{2.0 * (a.a22 * w[0] - a.a12 * w[1]) / det, 2.0 * (a.a11 * w[1] - a.a12 * w[0]) / det};
        bool inside = true;
        for (std::size_t k = 0; k < n && inside; ++k) {
            const Pt p = poly[k];
            const Pt q = poly[(k + 1) % n];
            const double cross = (q[0] - p[0]) * (z[1] - p[1]) - (q[1] - p[1]) * (z[0] - p[0]);
            inside = cross >= 0.0;
        }
        if (inside) {
            const double v = quad_value(a, w, z);
            if (v > best.value) best = {v, z};
        }
    }
    return best;
}

Pt ray_exit(double phi, double z) {
    if (phi <= 0.0) return {z, 0.0};
    if (phi >= kHalfPi) return {0.0, z};
    if (phi == kQuarterPi) return {z, z};
    if (phi < kQuarterPi) return {z, z * std::tan(phi)};
    return {z / std::tan(phi), z};
}

// Gram entries of sample i in a branch: a12 carries the -+ sign of g_h.
void add_gram(long double acc[3], const ScoreVectors& s, std::size_t i, Branch branch) {
    acc[0] += s.mm[i];
    acc[1] += branch == Branch::Plus ? -s.mh[i] : s.mh[i];
    acc[2] += s.hh[i];
}

bool indicator(const ScoreVectors& s, std::size_t i, Pt zeta, Branch branch) {
    if (branch == Branch::Plus) return zeta[0] * s.v_plus[i][0] + zeta[1] * s.v_plus[i][1] >= 0.0;
    return zeta[0] * s.v_minus[i][0] + zeta[1] * s.v_minus[i][1] < 0.0;
}

} // namespace

void BootstrapConfig::validate() const {
    if (draws < 100) throw DomainError("bootstrap draws must be at least 100");
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
    if (!(fp_tol > 0.0) || fp_max_iters < 1) throw DomainError("fixed-point controls out of range");
    if (!(ridge >= 0.0)) throw DomainError("ridge must be nonnegative");
    if (!(zeta_max >= 0.0) || !(dual_bound > 0.0)) throw DomainError("zeta box must be positive");
}

ScoreVectors build_scores(const CompositeModel& model, const Dataset& data) {
    const std::size_t n = data.size();
    const std::size_t d = model.dim();
    ScoreVectors out;
    out.dim = d;
    out.s_plus.assign(n, Vec(2 * d));
    out.s_minus.assign(n, Vec(2 * d));
    out.v_plus.resize(n);
    out.v_minus.resize(n);
    out.mm.resize(n);
    out.mh.resize(n);
    out.hh.resize(n);
    parallel_for(n, [&](std::size_t i) {
        Vec gm(d), gh(d);
        model.utility_gradient(data[i].x, gm);
        model.gap_gradient(data[i].x, gh);
        double mm = 0.0, mh = 0.0, hh = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(gm[j]) || !std::isfinite(gh[j]))
                throw NumericError("non-finite gradient at sample " + std::to_string(i), data[i].x);
            out.s_plus[i][j] = gm[j];
            out.s_plus[i][d + j] = -gh[j];
            out.s_minus[i][j] = gm[j];
            out.s_minus[i][d + j] = gh[j];
            mm += gm[j] * gm[j];
            mh += gm[j] * gh[j];
            hh += gh[j] * gh[j];
        }
        out.mm[i] = mm;
        out.mh[i] = mh;
        out.hh[i] = hh;
        out.v_plus[i] = {mh, -hh};
        out.v_minus[i] = {mh, hh};
    });
    return out;
}

Sym2 moment_matrix(const ScoreVectors& scores, std::array<double, 2> zeta, Branch branch) {
    if (!(zeta[0] >= 0.0) || !(zeta[1] >= 0.0)) throw DomainError("zeta must be nonnegative");
    long double acc[3] = {0.0L, 0.0L, 0.0L};
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (indicator(scores, i, zeta, branch)) add_gram(acc, scores, i, branch);
    const long double n = static_cast<long double>(scores.size());
    return {static_cast<double>(acc[0] / n), static_cast<double>(acc[1] / n), static_cast<double>(acc[2] / n)};
}

Sym2 weighted_moment_matrix(const ScoreVectors& scores, std::array<double, 2> zeta, Branch branch,
                            double ridge) {
    Sym2 a = moment_matrix(scores, zeta, branch);
    a.a11 += ridge;
    a.a22 += ridge;
    const double mean = 0.5 * (a.a11 + a.a22);
    const double rad = std::hypot(0.5 * (a.a11 - a.a22), a.a12);
    const double lo = mean - rad, hi = mean + rad;
    if (!(lo > 0.0) || hi / lo > 1e12) {
        std::ostringstream msg;
        msg << "moment matrix for the " << (branch == Branch::Plus ? "plus" : "minus")
            << " branch is singular (eigenvalues " << lo << ", " << hi << ")";
        throw DegenerateDirection(msg.str());
    }
    const double det = a.a11 * a.a22 - a.a12 * a.a12;
    return {a.a22 / det, -a.a12 / det, a.a11 / det};
}

double bound_objective(const ScoreVectors& scores, std::array<double, 2> w, std::array<double, 2> zeta,
                       Branch branch) {
    return quad_value(moment_matrix(scores, zeta, branch), w, zeta);
}

double zeta_box(const BootstrapConfig& cfg, std::size_t n) {
    return cfg.zeta_max > 0.0 ? cfg.zeta_max : std::sqrt(static_cast<double>(n)) * cfg.dual_bound;
}

FixedPointResult solve_fixed_point(const ScoreVectors& scores, std::array<double, 2> w, Branch branch,
                                   const BootstrapConfig& cfg) {
    if (!std::isfinite(w[0]) || !std::isfinite(w[1])) throw DomainError("w_draw must be finite");
    const double z = zeta_box(cfg, scores.size());
    const std::vector<Pt> box{{0.0, 0.0}, {z, 0.0}, {z, z}, {0.0, z}};
    FixedPointResult res;
    Pt zeta{0.0, 0.0};
    for (int it = 1; it <= cfg.fp_max_iters; ++it) {
        Sym2 a = moment_matrix(scores, zeta, branch);
        a.a11 += cfg.ridge;
        a.a22 += cfg.ridge;
        const Pt t = max_over_polygon(a, w, box).argmax;
        const double r = std::max(std::abs(t[0] - zeta[0]), std::abs(t[1] - zeta[1]));
        res.iterations = it;
        res.residual = r;
        if (r < cfg.fp_tol) {
            res.converged = true;
            break;
        }
        zeta = {(1.0 - cfg.damping) * zeta[0] + cfg.damping * t[0], (1.0 - cfg.damping) * zeta[1] + cfg.damping * t[1]};
    }
    res.zeta = zeta;
    return res;
}

BoundEvaluator::BoundEvaluator(const ScoreVectors& scores, double zeta_max) : zmax_(zeta_max) {
    if (!(zeta_max > 0.0) || !std::isfinite(zeta_max)) throw DomainError("zeta box must be positive and finite");
    if (scores.size() == 0) throw DomainError("no score vectors");
    add_branch(scores, Branch::Plus);
    add_branch(scores, Branch::Minus);
}

void BoundEvaluator::add_branch(const ScoreVectors& scores, Branch branch) {
    // Each sample's indicator is a threshold in the angle of zeta: active for
    // phi <= phi_i (plus) or phi < phi_i (minus).
    long double base[3] = {0.0L, 0.0L, 0.0L};
    std::vector<std::pair<double, std::size_t>> toggles;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double mh = scores.mh[i], hh = scores.hh[i];
        if (branch == Branch::Plus) {
            if (hh == 0.0) {
                if (mh >= 0.0) add_gram(base, scores, i, branch);
            } else if (mh >= 0.0) {
                toggles.emplace_back(std::atan2(mh, hh), i);
            }
        } else if (hh > 0.0 && mh < 0.0) {
            toggles.emplace_back(std::atan2(-mh, hh), i);
        }
    }
    std::sort(toggles.begin(), toggles.end(), [](const auto& l, const auto& r) {
        return l.first != r.first ? l.first > r.first : l.second < r.second;
    });
    // prefix[k] = base + first k toggles (largest angles first)
    std::vector<std::array<long double, 3>> prefix(toggles.size() + 1);
    prefix[0] = {base[0], base[1], base[2]};
    for (std::size_t k = 0; k < toggles.size(); ++k) {
        long double acc[3] = {prefix[k][0], prefix[k][1], prefix[k][2]};
        add_gram(acc, scores, toggles[k].second, branch);
        prefix[k + 1] = {acc[0], acc[1], acc[2]};
    }
    const long double n = static_cast<long double>(scores.size());
    auto matrix_at = [&](double phi, bool inclusive) {
        const auto it = std::partition_point(toggles.begin(), toggles.end(), [&](const auto& t) {
            return inclusive ? t.first >= phi : t.first > phi;
        });
        const auto& p = prefix[static_cast<std::size_t>(it - toggles.begin())];
        return Sym2{static_cast<double>(p[0] / n), static_cast<double>(p[1] / n), static_cast<double>(p[2] / n)};
    };

    std::vector<double> breaks{0.0, kHalfPi};
    for (const auto& t : toggles) breaks.push_back(t.first);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const bool inclusive = branch == Branch::Plus;
    const Pt origin{0.0, 0.0};
    for (std::size_t k = 0; k < breaks.size(); ++k) {
        const double b = breaks[k];
        pieces_.push_back({matrix_at(b, inclusive), {origin, ray_exit(b, zmax_)}, b, b});
        if (k + 1 == breaks.size()) break;
        const double e = breaks[k + 1];
        std::vector<Pt> poly{origin, ray_exit(b, zmax_)};
        if (b < kQuarterPi && kQuarterPi < e) poly.push_back({zmax_, zmax_});
        poly.push_back(ray_exit(e, zmax_));
        // strictly between breakpoints the pattern equals the one just below e
        pieces_.push_back({matrix_at(0.5 * (b + e), false), std::move(poly), b, e});
    }
}

double BoundEvaluator::evaluate(std::array<double, 2> w) const {
    double best = 0.0;
    for (const auto& piece : pieces_) best = std::max(best, max_over_polygon(piece.a, w, piece.vertices).value);
    return best;
}

double compute_bound(const ScoreVectors& scores, std::array<double, 2> w, const BootstrapConfig& cfg) {
    return BoundEvaluator(scores, zeta_box(cfg, scores.size())).evaluate(w);
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

CriticalValue critical_value(const CompositeModel& model, const Dataset& data, double alpha_level,
                             const BootstrapConfig& cfg) {
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw DomainError("significance level must lie in (0, 1)");
    cfg.validate();
    const EmpiricalSummaries sum = empirical_summaries(model, data);
    CriticalValue out;
    out.var_M = sum.var_utility;
    out.var_gap = sum.var_gap;
    out.zeta_max = zeta_box(cfg, data.size());
    if (sum.var_utility <= 0.0 && sum.var_gap <= 0.0) {
        out.warnings.push_back("var(M) and var(gap) are both zero; critical value set to 0");
        return out;
    }

    const ScoreVectors scores = build_scores(model, data);
    const BoundEvaluator evaluator(scores, out.zeta_max);

    // W = L z with L the Cholesky factor of the (possibly diagonal) covariance
    const double s_m = std::sqrt(std::max(sum.var_utility, 0.0));
    double l21 = 0.0;
    double l22 = std::sqrt(std::max(sum.var_gap, 0.0));
    if (cfg.use_joint_cov && s_m > 0.0) {
        l21 = sum.cov_utility_gap / s_m;
        l22 = std::sqrt(std::max(sum.var_gap - l21 * l21, 0.0));
    }

    const std::size_t draws = static_cast<std::size_t>(cfg.draws);
    out.bounds.resize(draws);
    std::vector<double> disagreement(draws, -1.0);
    parallel_for(draws, [&](std::size_t k) {
        rng::Stream stream(rng::mix(cfg.seed, 0x626f6f74ULL, k));
        const double z1 = stream.normal();
        const double z2 = stream.normal();
        const Pt w{s_m * z1, l21 * z1 + l22 * z2};
        out.bounds[k] = evaluator.evaluate(w);
        if (cfg.cross_check) {
            const FixedPointResult fp = solve_fixed_point(scores, w, Branch::Plus, cfg);
            const FixedPointResult fm = solve_fixed_point(scores, w, Branch::Minus, cfg);
            if (fp.converged && fm.converged) {
                const double v = std::max({0.0, bound_objective(scores, w, fp.zeta, Branch::Plus),
                                           bound_objective(scores, w, fm.zeta, Branch::Minus)});
                disagreement[k] = std::abs(v - out.bounds[k]);
            }
        }
    });
    for (double d : disagreement) {
        if (d < 0.0) continue;
        ++out.fp_converged;
        out.fp_max_disagreement = std::max(out.fp_max_disagreement, d);
    }
    out.eta = quantile_type7(out.bounds, 1.0 - alpha_level);
    return out;
}

} // namespace fairtest
