#include "fairtest/dual_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/random/sobol.hpp>

#include "fairtest/errors.hpp"
#include "fairtest/parallel.hpp"
#include "fairtest/rng.hpp"

namespace fairtest {
namespace {

constexpr int kMaxCrossings = 4;
constexpr double kKinkTol = 1e-12;

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

std::vector<double> seed_lattice(const CovariateSpace& box, const SolverConfig& cfg) {
    const std::size_t d = box.dim();
    std::vector<double> pts;
    if (d <= 3) {
        const std::size_t g = static_cast<std::size_t>(cfg.inner_grid);
        std::size_t count = 1;
        for (std::size_t j = 0; j < d; ++j) count *= g;
        pts.resize(count * d);
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t rem = k;
            for (std::size_t j = d; j-- > 0;) {
                const std::size_t idx = rem % g;
                rem /= g;
                const double t = static_cast<double>(idx) / static_cast<double>(g - 1);
                pts[k * d + j] = box.lower()[j] + t * (box.upper()[j] - box.lower()[j]);
            }
        }
    } else {
        boost::random::sobol gen(d);
        const double denom = static_cast<double>(gen.max()) + 1.0;
        const std::size_t count = static_cast<std::size_t>(cfg.sobol_points);
        pts.resize(count * d);
        for (std::size_t k = 0; k < count; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                const double u = static_cast<double>(gen()) / denom;
                pts[k * d + j] = box.lower()[j] + u * (box.upper()[j] - box.lower()[j]);
            }
        }
    }
    return pts;
}

void SolverConfig::validate() const {
    if (!(b_dual > 0.0) || !std::isfinite(b_dual)) throw DomainError("b_dual must be positive");
    if (inner_grid < 3) throw DomainError("inner_grid must be at least 3");
    if (sobol_points < 16) throw DomainError("sobol_points must be at least 16");
    if (polish_seeds < 0) throw DomainError("polish_seeds must be nonnegative");
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(line_tol > 0.0))
        throw DomainError("solver tolerances must be positive");
    if (!(refine_window >= 0.0 && refine_window <= 1.0)) throw DomainError("refine_window must lie in [0, 1]");
    if (inner_max_iters < 1 || max_outer_iters < 1 || refine_cycles < 0 || restarts < 0 || max_doublings < 0)
        throw DomainError("solver iteration counts out of range");
}

InnerSolver::InnerSolver(const CompositeModel& model, std::vector<Vec> anchors, const SolverConfig& cfg)
    : model_(model), cfg_(cfg), anchors_(std::move(anchors)) {
    cfg_.validate();
    const auto& box = model_.space();
    const std::size_t d = box.dim();
    for (std::size_t j = 0; j < d; ++j) scale_ = std::max(scale_, box.upper()[j] - box.lower()[j]);

    lattice_ = seed_lattice(box, cfg_);
    if (d <= 3) add_kink_seeds();
    const std::size_t count = lattice_.size() / d;
    lattice_utility_.resize(count);
    lattice_gap_.resize(count);
    parallel_for(count, [&](std::size_t k) {
        std::span<const double> x(lattice_.data() + k * d, d);
        lattice_utility_[k] = model_.utility(x);
        lattice_gap_[k] = std::abs(model_.signed_gap(x));
        if (!std::isfinite(lattice_utility_[k]) || !std::isfinite(lattice_gap_[k]))
            throw NumericError("non-finite model value on the inner lattice", Vec(x.begin(), x.end()));
    });

    anchor_utility_.resize(anchors_.size());
    anchor_gap_.resize(anchors_.size());
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        box.require_contains(anchors_[i]);
        anchor_utility_[i] = model_.utility(anchors_[i]);
        anchor_gap_[i] = std::abs(model_.signed_gap(anchors_[i]));
        if (!std::isfinite(anchor_utility_[i]) || !std::isfinite(anchor_gap_[i]))
            throw NumericError("non-finite model value at sample " + std::to_string(i), anchors_[i]);
    }
}

// A minimizer often sits on the kink pi_1 = pi_0 between lattice points, where
// no lattice seed sees the drop in the gap term. Every lattice edge whose
// signed gap changes sign contributes its root as an extra seed.
void InnerSolver::add_kink_seeds() {
    const std::size_t d = model_.dim();
    const std::size_t g = static_cast<std::size_t>(cfg_.inner_grid);
    const std::size_t count = lattice_.size() / d;
    Vec h(count);
    parallel_for(count, [&](std::size_t k) { h[k] = model_.signed_gap({lattice_.data() + k * d, d}); });

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t stride = 1;
    for (std::size_t j = d; j-- > 0; stride *= g) {
        for (std::size_t k = 0; k < count; ++k) {
            if ((k / stride) % g == g - 1) continue;
            const std::size_t n = k + stride;
            if (std::isfinite(h[k]) && std::isfinite(h[n]) && h[k] != 0.0 && (h[k] < 0.0) != (h[n] < 0.0))
                edges.emplace_back(k, n);
        }
    }
    std::vector<double> roots(edges.size() * d);
    parallel_for(edges.size(), [&](std::size_t e) {
        const double* a = lattice_.data() + edges[e].first * d;
        const double* b = lattice_.data() + edges[e].second * d;
        double* out = roots.data() + e * d;
        auto at = [&](double t) {
            for (std::size_t j = 0; j < d; ++j) out[j] = a[j] + t * (b[j] - a[j]);
            return model_.signed_gap({out, d});
        };
        double lo = 0.0, hi = 1.0;
        const bool neg_lo = h[edges[e].first] < 0.0;
        for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((at(mid) < 0.0) == neg_lo ? lo : hi) = mid;
        }
        at(std::abs(h[edges[e].first]) < std::abs(h[edges[e].second]) ? lo : hi);
    });
    lattice_.insert(lattice_.end(), roots.begin(), roots.end());
}

double InnerSolver::objective(std::size_t i, DualPoint point, std::span<const double> x) const {
    const double v = sq_dist(x, anchors_[i]) + point.alpha * std::abs(model_.signed_gap(x)) -
                     point.lambda * model_.utility(x);
    if (!std::isfinite(v)) throw NumericError("non-finite inner objective", Vec(x.begin(), x.end()));
    return v;
}

InnerResult InnerSolver::minimize_lattice(std::size_t i, DualPoint point) const {
    const std::size_t d = model_.dim();
    const auto& xi = anchors_[i];
    double best = point.alpha * anchor_gap_[i] - point.lambda * anchor_utility_[i];
    const double* best_x = xi.data();
    const std::size_t count = lattice_utility_.size();
    for (std::size_t k = 0; k < count; ++k) {
        const double* x = lattice_.data() + k * d;
        const double v = sq_dist({x, d}, xi) + point.alpha * lattice_gap_[k] - point.lambda * lattice_utility_[k];
        if (v < best || (v == best && lex_less({x, d}, {best_x, d}))) {
            best = v;
            best_x = x;
        }
    }
    return {best, Vec(best_x, best_x + d)};
}

void InnerSolver::offer(std::size_t i, DualPoint point, const Vec& x, InnerResult& best) const {
    const double v = objective(i, point, x);
    if (v < best.value || (v == best.value && lex_less(x, best.argmin))) {
        best.value = v;
        best.argmin = x;
    }
}

bool InnerSolver::project_to_kink(Vec& x) const {
    const auto& box = model_.space();
    Vec grad(x.size());
    for (int k = 0; k < 30; ++k) {
        const double h = model_.signed_gap(x);
        if (std::abs(h) <= kKinkTol) return true;
        model_.gap_gradient(x, grad);
        double n2 = 0.0;
        for (double g : grad) n2 += g * g;
        if (!(n2 > 1e-300)) return false;
        for (std::size_t j = 0; j < x.size(); ++j) x[j] -= h * grad[j] / n2;
        box.project(x);
    }
    return std::abs(model_.signed_gap(x)) <= 1e-10;
}

void InnerSolver::kink_descent(std::size_t i, DualPoint point, Vec& x) const {
    const auto& box = model_.space();
    const std::size_t d = x.size();
    const auto& xi = anchors_[i];
    PointValues pv;
    Vec dir(d), y(d);
    double fx = objective(i, point, x);
    for (int it = 0; it < cfg_.inner_max_iters; ++it) {
        model_.evaluate(x, true, pv);
        double n2 = 0.0;
        for (double g : pv.gap_gradient) n2 += g * g;
        if (!(n2 > 1e-300)) return;
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dir[j] = -(2.0 * (x[j] - xi[j]) - point.lambda * pv.utility_gradient[j]);
            dot += dir[j] * pv.gap_gradient[j];
        }
        double dir_norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dir[j] -= dot * pv.gap_gradient[j] / n2;
            // frozen at an active face
            if ((x[j] <= box.lower()[j] && dir[j] < 0.0) || (x[j] >= box.upper()[j] && dir[j] > 0.0)) dir[j] = 0.0;
            dir_norm2 += dir[j] * dir[j];
        }
        if (std::sqrt(dir_norm2) <= cfg_.inner_tol * scale_) return;

        bool accepted = false;
        for (double t = 0.5; t > 1e-14; t *= 0.5) {
            for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + t * dir[j];
            box.project(y);
            if (!project_to_kink(y)) continue;
            const double fy = objective(i, point, y);
            if (fy < fx - 1e-4 * t * dir_norm2) {
                const double moved = max_abs_diff(x, y);
                x = y;
                fx = fy;
                accepted = true;
                if (moved <= cfg_.inner_tol * scale_) return;
                break;
            }
        }
        if (!accepted) return;
    }
}

void InnerSolver::polish_branch(std::size_t i, DualPoint point, int sign, Vec x, InnerResult& best) const {
    const auto& box = model_.space();
    const std::size_t d = x.size();
    const auto& xi = anchors_[i];
    const double alpha_term = sign == 0 ? 0.0 : point.alpha * sign;

    if (sign != 0 && sign * model_.signed_gap(x) < -kKinkTol) {
        if (!project_to_kink(x)) return;
    }

    auto branch_value = [&](std::span<const double> p, double& gap_out) {
        gap_out = model_.signed_gap(p);
        return sq_dist(p, xi) + alpha_term * gap_out - point.lambda * model_.utility(p);
    };

    PointValues pv;
    Vec grad(d), y(d);
    bool hit_boundary = false;
    double gap_x = 0.0;
    double fx = branch_value(x, gap_x);
    for (int it = 0; it < cfg_.inner_max_iters; ++it) {
        model_.evaluate(x, true, pv);
        for (std::size_t j = 0; j < d; ++j)
            grad[j] = 2.0 * (x[j] - xi[j]) + alpha_term * pv.gap_gradient[j] - point.lambda * pv.utility_gradient[j];

        bool accepted = false;
        bool converged = false;
        int crossings = 0;
        for (double t = 0.5; t > 1e-14; t *= 0.5) {
            for (std::size_t j = 0; j < d; ++j) y[j] = x[j] - t * grad[j];
            box.project(y);
            const double moved = max_abs_diff(x, y);
            if (moved <= cfg_.inner_tol * scale_) {
                converged = true;
                break;
            }
            double gap_y = 0.0;
            const double fy = branch_value(y, gap_y);
            if (sign != 0 && sign * gap_y < -kKinkTol) {
                // the descent direction leaves the branch; the kink search takes over
                hit_boundary = true;
                if (++crossings >= kMaxCrossings) break;
                continue;
            }
            double decrease = 0.0;
            for (std::size_t j = 0; j < d; ++j) decrease += grad[j] * (x[j] - y[j]);
            if (fy <= fx - 1e-4 * decrease) {
                x = y;
                fx = fy;
                accepted = true;
                break;
            }
        }
        if (converged || !accepted) break;
    }
    offer(i, point, x, best);

    if (sign != 0 && hit_boundary) {
        Vec k = x;
        if (project_to_kink(k)) {
            kink_descent(i, point, k);
            offer(i, point, k, best);
        }
    }
}

InnerResult InnerSolver::minimize(std::size_t i, DualPoint point) const {
    const std::size_t d = model_.dim();
    const std::size_t count = lattice_utility_.size();
    const auto& xi = anchors_[i];

    std::vector<Candidate> cands(count + 1);
    for (std::size_t k = 0; k < count; ++k) {
        const double* x = lattice_.data() + k * d;
        cands[k] = {sq_dist({x, d}, xi) + point.alpha * lattice_gap_[k] - point.lambda * lattice_utility_[k], k};
    }
    cands[count] = {point.alpha * anchor_gap_[i] - point.lambda * anchor_utility_[i], count};

    auto point_of = [&](std::size_t k) -> std::span<const double> {
        return k == count ? std::span<const double>(xi) : std::span<const double>(lattice_.data() + k * d, d);
    };
    auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value < b.value;
        return lex_less(point_of(a.index), point_of(b.index));
    };
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg_.polish_seeds, 1)), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), better);

    InnerResult best{cands[0].value, Vec(point_of(cands[0].index).begin(), point_of(cands[0].index).end())};
    const std::size_t polish = std::min<std::size_t>(static_cast<std::size_t>(cfg_.polish_seeds), keep);
    for (std::size_t s = 0; s < polish; ++s) {
        const auto seed = point_of(cands[s].index);
        Vec x(seed.begin(), seed.end());
        if (point.alpha == 0.0) {
            polish_branch(i, point, 0, x, best);
        } else {
            polish_branch(i, point, +1, x, best);
            polish_branch(i, point, -1, x, best);
        }
    }
    return best;
}

InnerResult gamma_i(const CompositeModel& model, std::span<const double> x_i, DualPoint point,
                    const SolverConfig& cfg) {
    if (!(point.lambda >= 0.0) || !(point.alpha >= 0.0)) throw DomainError("dual point must be nonnegative");
    InnerSolver solver(model, {Vec(x_i.begin(), x_i.end())}, cfg);
    return solver.minimize(0, point);
}

namespace {

std::vector<Vec> anchors_of(const Dataset& data) {
    std::vector<Vec> out;
    out.reserve(data.size());
    for (const auto& s : data.samples()) out.push_back(s.x);
    return out;
}

} // namespace

DualProblem::DualProblem(const CompositeModel& model, const Dataset& data, double r, double eps,
                         const SolverConfig& cfg)
    : r_(r), eps_(eps), cfg_(cfg), inner_(model, anchors_of(data), cfg) {
    if (!(eps >= 0.0)) throw DomainError("fairness tolerance eps must be nonnegative");
    if (!std::isfinite(r)) throw DomainError("utility threshold r must be finite");
}

double DualProblem::evaluate(DualPoint point, bool polished) const {
    if (!(point.lambda >= 0.0) || !(point.alpha >= 0.0)) throw DomainError("dual point must be nonnegative");
    ++evaluations_;
    const std::size_t n = inner_.size();
    Vec gammas(n);
    parallel_for(n, [&](std::size_t i) {
        gammas[i] = polished ? inner_.minimize(i, point).value : inner_.minimize_lattice(i, point).value;
    });
    double sum = 0.0;
    for (double g : gammas) sum += g;
    return point.lambda * r_ - point.alpha * eps_ + sum / static_cast<double>(n);
}

double DualProblem::objective(DualPoint point) const { return evaluate(point, true); }

double DualProblem::lattice_objective(DualPoint point) const { return evaluate(point, false); }

std::vector<Vec> DualProblem::minimizers(DualPoint point) const {
    std::vector<Vec> out(inner_.size());
    parallel_for(inner_.size(), [&](std::size_t i) { out[i] = inner_.minimize(i, point).argmin; });
    return out;
}

double dual_objective(const CompositeModel& model, const Dataset& data, double r, double eps, DualPoint point,
                      const SolverConfig& cfg) {
    return DualProblem(model, data, r, eps, cfg).objective(point);
}

std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                             double tol) {
    const double f_lo = f(lo);
    if (!(hi > lo)) return {lo, f_lo};
    const double f_hi = f(hi);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double e = a + inv_phi * (b - a);
    double fc = f(c), fe = f(e);
    while (b - a > tol) {
        if (fc >= fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = f(e);
        }
    }
    std::pair<double, double> best = fc >= fe ? std::pair{c, fc} : std::pair{e, fe};
    if (f_lo >= best.second) best = {lo, f_lo};
    if (f_hi > best.second) best = {hi, f_hi};
    return best;
}

namespace {

struct AscentState {
    DualPoint p;
    double value;
};

// Golden-section along one coordinate inside [v - window, v + window], widened
// while the maximizer sits on an edge that is not the box edge. window <= 0
// searches the whole of [0, bound].
std::pair<double, double> line_max(const std::function<double(double)>& f, double v, double bound, double window,
                                   double tol) {
    if (!(window > 0.0)) return golden_section_max(f, 0.0, bound, tol);
    for (;;) {
        const double lo = std::max(0.0, v - window), hi = std::min(bound, v + window);
        const auto best = golden_section_max(f, lo, hi, tol);
        const bool at_edge = (best.first <= lo && lo > 0.0) || (best.first >= hi && hi < bound);
        if (!at_edge) return best;
        v = best.first;
        window *= 2.0;
    }
}

// Coordinate ascent on a concave function over [0,B]^2: golden-section along
// lambda, then alpha, then (global mode only) along the displacement of the
// whole cycle.
AscentState coordinate_ascent(const std::function<double(DualPoint)>& f, AscentState start, double bound,
                              double line_tol, double outer_tol, int max_cycles, double window = 0.0) {
    AscentState cur = start;
    const double tol = line_tol * bound;
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        const AscentState before = cur;

        auto [lam, fl] = line_max([&](double v) { return f({v, cur.p.alpha}); }, cur.p.lambda, bound, window, tol);
        if (fl > cur.value) cur = {{lam, cur.p.alpha}, fl};

        auto [alp, fa] = line_max([&](double v) { return f({cur.p.lambda, v}); }, cur.p.alpha, bound, window, tol);
        if (fa > cur.value) cur = {{cur.p.lambda, alp}, fa};

        const double dl = cur.p.lambda - before.p.lambda;
        const double da = cur.p.alpha - before.p.alpha;
        if (window <= 0.0 && dl != 0.0 && da != 0.0) {
            double t_max = HUGE_VAL;
            t_max = std::min(t_max, dl > 0 ? (bound - cur.p.lambda) / dl : cur.p.lambda / -dl);
            t_max = std::min(t_max, da > 0 ? (bound - cur.p.alpha) / da : cur.p.alpha / -da);
            if (t_max > 0.0) {
                const double scale = std::max(std::abs(dl), std::abs(da));
                auto along = [&](double t) {
                    return DualPoint{std::clamp(cur.p.lambda + t * dl, 0.0, bound),
                                     std::clamp(cur.p.alpha + t * da, 0.0, bound)};
                };
                auto [t, ft] = golden_section_max([&](double v) { return f(along(v)); }, 0.0, t_max, tol / scale);
                if (ft > cur.value) cur = {along(t), ft};
            }
        }
        if (cur.value - before.value <= outer_tol) break;
    }
    return cur;
}

DualSolution solve_fixed_bound(const CompositeModel& model, const Dataset& data, double r, double eps,
                               const SolverConfig& cfg) {
    DualProblem problem(model, data, r, eps, cfg);
    const double bound = cfg.b_dual;

    auto lattice_f = [&](DualPoint p) { return problem.lattice_objective(p); };
    std::vector<DualPoint> starts{{0.0, 0.0}};
    for (int k = 0; k < cfg.restarts; ++k) {
        rng::Stream stream(rng::mix(cfg.seed, 0x72657374ULL, static_cast<std::uint64_t>(k)));
        starts.push_back({stream.uniform(0.0, bound), stream.uniform(0.0, bound)});
    }
    AscentState best{{0.0, 0.0}, -HUGE_VAL};
    for (const auto& s : starts) {
        const AscentState res =
            coordinate_ascent(lattice_f, {s, lattice_f(s)}, bound, cfg.line_tol, cfg.outer_tol, cfg.max_outer_iters);
        if (res.value > best.value) best = res;
    }

    auto polished_f = [&](DualPoint p) { return problem.objective(p); };
    AscentState refined{best.p, polished_f(best.p)};
    if (cfg.refine_cycles > 0)
        refined = coordinate_ascent(polished_f, refined, bound, cfg.line_tol, cfg.outer_tol, cfg.refine_cycles,
                                    bound * cfg.refine_window);
    if (!(refined.value > 0.0)) refined = {{0.0, 0.0}, 0.0};

    DualSolution sol;
    sol.value = refined.value;
    sol.statistic = static_cast<double>(data.size()) * sol.value;
    sol.argmax = refined.p;
    sol.b_dual = bound;
    sol.boundary_hit = refined.p.lambda >= bound * (1.0 - 1e-6) || refined.p.alpha >= bound * (1.0 - 1e-6);
    sol.inner_minimizers = problem.minimizers(refined.p);
    sol.evaluations = problem.evaluations();
    return sol;
}

} // namespace

DualSolution solve_dual(const CompositeModel& model, const Dataset& data, double r, double eps,
                        const SolverConfig& cfg) {
    cfg.validate();
    if (!(eps >= 0.0)) throw DomainError("fairness tolerance eps must be nonnegative");

    // The empirical measure itself is feasible: zero transport cost, and the
    // dual is 0 at the origin, so R = 0 with no search.
    double mean_m = 0.0, mean_gap = 0.0;
    for (const auto& s : data.samples()) {
        mean_m += model.utility(s.x);
        mean_gap += std::abs(model.signed_gap(s.x));
    }
    mean_m /= static_cast<double>(data.size());
    mean_gap /= static_cast<double>(data.size());
    if (mean_m >= r && mean_gap <= eps) {
        DualSolution sol;
        sol.b_dual = cfg.b_dual;
        for (const auto& s : data.samples()) sol.inner_minimizers.push_back(s.x);
        return sol;
    }

    SolverConfig current = cfg;
    std::vector<std::string> warnings;
    for (int doubling = 0;; ++doubling) {
        DualSolution sol = solve_fixed_bound(model, data, r, eps, current);
        sol.doublings = doubling;
        if (!sol.boundary_hit) {
            sol.warnings = std::move(warnings);
            return sol;
        }
        std::ostringstream msg;
        msg << "dual maximizer (" << sol.argmax.lambda << ", " << sol.argmax.alpha << ") on the boundary B_dual="
            << current.b_dual;
        if (cfg.boundary_policy == BoundaryPolicy::Report) {
            warnings.push_back(msg.str() + "; value is the truncated-dual supremum");
            sol.warnings = std::move(warnings);
            return sol;
        }
        if (doubling >= cfg.max_doublings) {
            msg << " after " << doubling
                << " doublings; the projection problem is likely infeasible or Assumption 3 fails";
            throw UnboundedDualError(msg.str(), current.b_dual);
        }
        warnings.push_back(msg.str() + "; doubling B_dual");
        current.b_dual *= 2.0;
    }
}

} // namespace fairtest
