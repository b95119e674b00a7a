#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.
// The oracles deliberately avoid the library's solvers: they enumerate grids
// and rebuild every quantity from the analytic model formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "fairtest/model.hpp"
#include "fairtest/rng.hpp"

namespace fairtest::testing {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// One-dimensional instance on [0,1]: pi_a(x) = sigmoid(k_a (x - c)) so the
/// policies cross at x = c, and m_w(x,a) = b0_a + b1_a w + b2_a x + amp sin(3x).
struct CrossingInstance {
    double c = 0.5;
    std::array<double, 2> k{2.0, 6.0};
    std::array<std::array<double, 3>, 2> beta{{{0.8, 0.5, 0.7}, {0.5, 1.0, 0.5}}};
    double amp = 0.1;

    double pi(double x, int a) const { return sigmoid(k[a] * (x - c)); }
    double dpi(double x, int a) const {
        const double p = pi(x, a);
        return k[a] * p * (1.0 - p);
    }
    double m(int w, double x, int a) const { return beta[a][0] + beta[a][1] * w + beta[a][2] * x + amp * std::sin(3.0 * x); }
    double dm(double x, int a) const { return beta[a][2] + 3.0 * amp * std::cos(3.0 * x); }

    /// Composite utility written out directly, independent of CompositeModel.
    double utility(double x) const {
        double u = 0.0;
        for (int a = 0; a < 2; ++a) u += 0.5 * (m(1, x, a) * pi(x, a) + m(0, x, a) * (1.0 - pi(x, a)));
        return u;
    }
    double gap(double x) const { return std::abs(pi(x, 1) - pi(x, 0)); }

    std::shared_ptr<const CompositeModel> model() const {
        const CrossingInstance self = *this;
        auto policy = std::make_shared<FunctionPolicy>(
            1, [self](std::span<const double> x, int a) { return self.pi(x[0], a); },
            [self](std::span<const double> x, int a, std::span<double> out) { out[0] = self.dpi(x[0], a); });
        auto util = std::make_shared<FunctionUtility>(
            1, [self](int w, std::span<const double> x, int a) { return self.m(w, x[0], a); },
            [self](int, std::span<const double> x, int a, std::span<double> out) { out[0] = self.dm(x[0], a); },
            [](std::span<const double>, int) { return 0.5; },
            [](std::span<const double>, int, std::span<double> out) { out[0] = 0.0; });
        return std::make_shared<CompositeModel>(policy, util, CovariateSpace({0.0}, {1.0}));
    }

    static CrossingInstance random(std::uint64_t seed) {
        rng::Stream st(seed);
        CrossingInstance in;
        in.c = st.uniform(0.3, 0.7);
        in.k = {st.uniform(1.0, 3.0), st.uniform(4.0, 8.0)};
        in.amp = st.uniform(0.0, 0.2);
        return in;
    }
};

inline Dataset uniform_dataset(std::size_t n, std::uint64_t seed, std::size_t dim = 1) {
    std::vector<Sample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        rng::Stream st(rng::mix(seed, i));
        for (std::size_t j = 0; j < dim; ++j) samples[i].x.push_back(st.uniform());
        samples[i].s = static_cast<int>(i % 2);
        samples[i].w = st.bernoulli(0.5) ? 1 : 0;
        samples[i].y = st.uniform();
    }
    return Dataset(std::move(samples), CovariateSpace(Vec(dim, 0.0), Vec(dim, 1.0)));
}

/// Nested brute force for the 1-d dual: gamma_i is the exact minimum over an
/// inner grid of K+1 points, and the outer maximum is taken over a grid of
/// (lambda, alpha) followed by local zooms. For each (i, alpha) the map
/// lambda -> gamma_i is the lower envelope of the lines a_k - lambda M_k, so
/// it is built once by the monotone hull trick and queried for every lambda.
class BruteForceDual {
public:
    BruteForceDual(const std::vector<double>& samples, const std::vector<double>& grid_m,
                   const std::vector<double>& grid_gap, const std::vector<double>& grid_x, double r, double eps)
        : xs_(samples), r_(r), eps_(eps) {
        // lines are visited by ascending M; store them in that order
        std::vector<std::size_t> order(grid_x.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid_m[a] < grid_m[b]; });
        for (std::size_t k : order) {
            gx_.push_back(grid_x[k]);
            gm_.push_back(grid_m[k]);
            gg_.push_back(grid_gap[k]);
        }
    }

    /// Dual objective on a lambda grid at fixed alpha; lambdas ascending.
    std::vector<double> row(double alpha, const std::vector<double>& lambdas) const {
        std::vector<double> out(lambdas.size(), 0.0);
        for (std::size_t l = 0; l < lambdas.size(); ++l) out[l] = lambdas[l] * r_ - alpha * eps_;
        std::vector<double> env(lambdas.size());
        for (double xi : xs_) {
            lower_envelope(xi, alpha, lambdas, env);
            for (std::size_t l = 0; l < lambdas.size(); ++l) out[l] += env[l] / static_cast<double>(xs_.size());
        }
        return out;
    }

    struct Best {
        double lambda, alpha, value;
    };

    Best maximize(double bound, int outer, int zooms) const {
        Best best{0.0, 0.0, -HUGE_VAL};
        scan(0.0, bound, 0.0, bound, outer, best);
        double half = bound / (outer - 1);
        for (int z = 0; z < zooms; ++z) {
            const double l0 = std::max(0.0, best.lambda - 2 * half), l1 = std::min(bound, best.lambda + 2 * half);
            const double a0 = std::max(0.0, best.alpha - 2 * half), a1 = std::min(bound, best.alpha + 2 * half);
            scan(l0, l1, a0, a1, 41, best);
            half = 4 * half / 40;
        }
        return best;
    }

private:
    void scan(double l0, double l1, double a0, double a1, int pts, Best& best) const {
        std::vector<double> lambdas(pts);
        for (int l = 0; l < pts; ++l) lambdas[l] = l0 + (l1 - l0) * l / (pts - 1);
        for (int a = 0; a < pts; ++a) {
            const double alpha = a0 + (a1 - a0) * a / (pts - 1);
            const auto vals = row(alpha, lambdas);
            for (int l = 0; l < pts; ++l)
                if (vals[l] > best.value) best = {lambdas[l], alpha, vals[l]};
        }
    }

    void lower_envelope(double xi, double alpha, const std::vector<double>& lambdas, std::vector<double>& out) const {
        // lines y = b - m * lambda with m = M_k ascending (slope -m descending)
        const std::size_t n = gx_.size();
        thread_local std::vector<double> bs, hm, hb;
        bs.resize(n);
        hm.resize(n);
        hb.resize(n);
        // For lambda in [lo, hi] a line with smaller M than the minimizer at
        // lo, or larger M than the minimizer at hi, is never the minimum.
        const double lo = lambdas.front(), hi = lambdas.back();
        std::size_t k_lo = 0, k_hi = 0;
        double v_lo = HUGE_VAL, v_hi = HUGE_VAL;
        for (std::size_t k = 0; k < n; ++k) {
            const double dx = gx_[k] - xi;
            bs[k] = dx * dx + alpha * gg_[k];
            const double a = bs[k] - lo * gm_[k], c = bs[k] - hi * gm_[k];
            if (a < v_lo) {
                v_lo = a;
                k_lo = k;
            }
            if (c <= v_hi) {
                v_hi = c;
                k_hi = k;
            }
        }
        double* pm = hm.data();
        double* pb = hb.data();
        std::size_t top = 0;
        for (std::size_t k = std::min(k_lo, k_hi); k <= k_hi; ++k) {
            const double m = gm_[k];
            const double b = bs[k];
            if (top > 0 && pm[top - 1] == m) {
                if (pb[top - 1] <= b) continue;
                --top;
            }
            // drop the middle of the last two lines while the new line and the
            // one before it cross no later than that middle line takes over
            while (top >= 2 && (b - pb[top - 2]) * (pm[top - 1] - pm[top - 2]) <=
                                   (pb[top - 1] - pb[top - 2]) * (m - pm[top - 2]))
                --top;
            pm[top] = m;
            pb[top] = b;
            ++top;
        }
        std::size_t p = 0;
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            const double lam = lambdas[l];
            while (p + 1 < top && pb[p + 1] - pm[p + 1] * lam <= pb[p] - pm[p] * lam) ++p;
            out[l] = pb[p] - pm[p] * lam;
        }
    }

    std::vector<double> xs_, gx_, gm_, gg_;
    double r_, eps_;
};

} // namespace fairtest::testing
