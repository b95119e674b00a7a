#include "fairtest/estimation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "fairtest/errors.hpp"

namespace fairtest {
namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z), stable for large |z|
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct Design {
    std::size_t n = 0, p = 0; // p = d + 1
    Vec z;                    // row-major n x p, bias column last
};

Design make_design(std::span<const Vec> x, const Standardizer& st) {
    Design out;
    out.n = x.size();
    const std::size_t d = st.mean.size();
    out.p = d + 1;
    out.z.resize(out.n * out.p);
    for (std::size_t i = 0; i < out.n; ++i) {
        st.apply(x[i], std::span<double>(out.z.data() + i * out.p, d));
        out.z[i * out.p + d] = 1.0;
    }
    return out;
}

double logistic_objective(const Design& ds, std::span<const int> y, double reg, const Vec& w, Vec* grad) {
    if (grad) grad->assign(ds.p, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        const double* row = ds.z.data() + i * ds.p;
        double eta = 0.0;
        for (std::size_t j = 0; j < ds.p; ++j) eta += w[j] * row[j];
        loss += softplus(eta) - y[i] * eta;
        if (grad) {
            const double r = sigmoid(eta) - y[i];
            for (std::size_t j = 0; j < ds.p; ++j) (*grad)[j] += r * row[j];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(ds.n);
    double pen = 0.0;
    for (std::size_t j = 0; j < ds.p; ++j) {
        pen += w[j] * w[j];
        if (grad) (*grad)[j] = (*grad)[j] * inv_n + reg * w[j];
    }
    return loss * inv_n + 0.5 * reg * pen;
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string cell_name(int w, int a) {
    std::ostringstream os;
    os << "(w=" << w << ", s=" << a << ")";
    return os.str();
}

std::vector<Vec> covariates(const Dataset& data) {
    std::vector<Vec> xs;
    xs.reserve(data.size());
    for (const auto& s : data.samples()) xs.push_back(s.x);
    return xs;
}

} // namespace

Standardizer Standardizer::from_points(std::span<const Vec> points) {
    if (points.empty()) throw EstimationError("cannot standardize an empty sample");
    const std::size_t d = points.front().size();
    Standardizer st;
    st.mean.assign(d, 0.0);
    st.scale.assign(d, 0.0);
    const double n = static_cast<double>(points.size());
    for (const auto& p : points)
        for (std::size_t j = 0; j < d; ++j) st.mean[j] += p[j];
    for (auto& m : st.mean) m /= n;
    for (const auto& p : points)
        for (std::size_t j = 0; j < d; ++j) st.scale[j] += (p[j] - st.mean[j]) * (p[j] - st.mean[j]);
    for (auto& s : st.scale) {
        s = points.size() > 1 ? std::sqrt(s / (n - 1.0)) : 0.0;
        if (!(s > 0.0)) s = 1.0;
    }
    return st;
}

void Standardizer::apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
}

double LogisticFit::predict(std::span<const double> x) const {
    const std::size_t d = standardizer.mean.size();
    double eta = weights[d];
    for (std::size_t j = 0; j < d; ++j) eta += weights[j] * (x[j] - standardizer.mean[j]) / standardizer.scale[j];
    return sigmoid(eta);
}

void LogisticFit::gradient(std::span<const double> x, std::span<double> out) const {
    const double p = predict(x);
    const double g = p * (1.0 - p);
    for (std::size_t j = 0; j < standardizer.mean.size(); ++j) out[j] = g * weights[j] / standardizer.scale[j];
}

LogisticFit fit_logistic(std::span<const Vec> x, std::span<const int> labels, double reg,
                         const Standardizer& standardizer, const LogisticOptions& opts, Vec init) {
    if (x.size() != labels.size() || x.empty()) throw EstimationError("logistic fit needs matching, nonempty data");
    if (!(reg >= 0.0) || !std::isfinite(reg)) throw EstimationError("regularization must be a finite nonnegative number");
    const Design ds = make_design(x, standardizer);

    LogisticFit fit;
    fit.reg = reg;
    fit.standardizer = standardizer;
    Vec w = init.empty() ? Vec(ds.p, 0.0) : std::move(init);
    if (w.size() != ds.p) throw EstimationError("initial weight vector has the wrong length");

    Vec g, w_new(ds.p), g_new;
    double f = logistic_objective(ds, labels, reg, w, &g);
    double step = 1.0;
    Vec w_prev, g_prev;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        const double gn = norm2(g);
        if (gn < opts.grad_tol) {
            fit.converged = true;
            break;
        }
        // Barzilai-Borwein trial step from the last accepted move
        if (!w_prev.empty()) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t j = 0; j < ds.p; ++j) {
                const double s = w[j] - w_prev[j];
                ss += s * s;
                sy += s * (g[j] - g_prev[j]);
            }
            if (sy > 0.0) step = std::clamp(ss / sy, 1e-10, 1e10);
        }
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            for (std::size_t j = 0; j < ds.p; ++j) w_new[j] = w[j] - step * g[j];
            const double f_new = logistic_objective(ds, labels, reg, w_new, &g_new);
            if (f_new <= f - 1e-4 * step * gn * gn) {
                w_prev = w;
                g_prev = g;
                w = w_new;
                g = g_new;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    fit.weights = std::move(w);
    fit.iterations = it;
    fit.objective = f;
    fit.grad_norm = norm2(g);
    if (fit.grad_norm < opts.grad_tol) fit.converged = true;
    for (double v : fit.weights)
        if (!std::isfinite(v)) throw EstimationError("logistic fit diverged; increase reg");
    return fit;
}

KernelRegressor::KernelRegressor(std::span<const Vec> x, std::span<const double> y, const Standardizer& standardizer,
                                 double bandwidth)
    : standardizer_(standardizer) {
    static std::atomic<std::uint64_t> next_id{1};
    id_ = next_id.fetch_add(1);
    if (x.empty() || x.size() != y.size()) throw EstimationError("kernel regression needs matching, nonempty data");
    dim_ = standardizer.mean.size();
    const std::size_t n = x.size();
    centers_.resize(n * dim_);
    targets_.assign(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) standardizer_.apply(x[i], std::span<double>(centers_.data() + i * dim_, dim_));
    min_y_ = *std::min_element(targets_.begin(), targets_.end());
    max_y_ = *std::max_element(targets_.begin(), targets_.end());

    bandwidth_.assign(dim_, bandwidth);
    if (bandwidth > 0.0) return;
    // Silverman's rule of thumb for a d-variate Gaussian kernel
    const double factor = std::pow(4.0 / ((static_cast<double>(dim_) + 2.0) * static_cast<double>(n)),
                                   1.0 / (static_cast<double>(dim_) + 4.0));
    for (std::size_t j = 0; j < dim_; ++j) {
        double mean = 0.0, lo = HUGE_VAL, hi = -HUGE_VAL;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = centers_[i * dim_ + j];
            mean += c;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (centers_[i * dim_ + j] - mean) * (centers_[i * dim_ + j] - mean);
        const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
        const double floor = std::max(1e-3 * (hi - lo), 1e-3);
        bandwidth_[j] = std::max(sd * factor, floor);
    }
}

namespace {

// Last few (regressor, x) queries on this thread. Solvers ask for the value
// and then the gradient at the same point, and each kernel pass is O(n).
struct KernelMemo {
    struct Entry {
        std::uint64_t id = 0;
        Vec x, grad;
        double value = 0.0;
    };
    std::array<Entry, 8> entries;
    std::size_t next = 0;

    const Entry* find(std::uint64_t id, std::span<const double> x) const {
        for (const auto& e : entries)
            if (e.id == id && std::equal(x.begin(), x.end(), e.x.begin(), e.x.end())) return &e;
        return nullptr;
    }
    void store(std::uint64_t id, std::span<const double> x, double value, std::span<const double> grad) {
        Entry& e = entries[next];
        next = (next + 1) % entries.size();
        e.id = id;
        e.x.assign(x.begin(), x.end());
        e.grad.assign(grad.begin(), grad.end());
        e.value = value;
    }
};

thread_local KernelMemo kernel_memo;

} // namespace

double KernelRegressor::predict(std::span<const double> x) const {
    thread_local Vec unused;
    unused.resize(dim_);
    return predict(x, unused);
}

double KernelRegressor::predict(std::span<const double> x, std::span<double> grad) const {
    if (const auto* hit = kernel_memo.find(id_, x)) {
        std::copy(hit->grad.begin(), hit->grad.end(), grad.begin());
        return hit->value;
    }
    const std::size_t n = targets_.size();
    thread_local Vec z, logw;
    z.resize(dim_);
    logw.resize(n);
    standardizer_.apply(x, z);
    // log-weights shifted by their max so the largest kernel weight is exactly 1
    double top = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        double q = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double u = (z[j] - centers_[i * dim_ + j]) / bandwidth_[j];
            q += u * u;
        }
        logw[i] = -0.5 * q;
        top = std::max(top, logw[i]);
    }
    double sw = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logw[i] = std::exp(logw[i] - top);
        sw += logw[i];
        swy += logw[i] * targets_[i];
    }
    if (!(sw > 0.0) || !std::isfinite(sw)) throw NumericError("kernel weights are not finite", Vec(x.begin(), x.end()));
    const double m = std::clamp(swy / sw, min_y_, max_y_);
    for (std::size_t j = 0; j < dim_; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += logw[i] * (targets_[i] - m) * (centers_[i * dim_ + j] - z[j]);
        grad[j] = acc / (sw * bandwidth_[j] * bandwidth_[j] * standardizer_.scale[j]);
    }
    kernel_memo.store(id_, x, m, grad.first(dim_));
    return m;
}

LogisticPolicy::LogisticPolicy(std::array<LogisticFit, 2> fits) : fits_(std::move(fits)) {}

double LogisticPolicy::propensity(std::span<const double> x, int group) const {
    return fits_[static_cast<std::size_t>(group)].predict(x);
}

void LogisticPolicy::propensity_gradient(std::span<const double> x, int group, std::span<double> out) const {
    fits_[static_cast<std::size_t>(group)].gradient(x, out);
}

ScorePolicy::ScorePolicy(std::array<KernelRegressor, 2> smoothers, std::size_t dim)
    : smoothers_(std::move(smoothers)), dim_(dim) {}

double ScorePolicy::propensity(std::span<const double> x, int group) const {
    return smoothers_[static_cast<std::size_t>(group)].predict(x);
}

void ScorePolicy::propensity_gradient(std::span<const double> x, int group, std::span<double> out) const {
    smoothers_[static_cast<std::size_t>(group)].predict(x, out);
}

FittedUtility::FittedUtility(std::array<KernelRegressor, 4> cells, LogisticFit group_model)
    : cells_(std::move(cells)), group_(std::move(group_model)) {}

double FittedUtility::outcome(int treatment, std::span<const double> x, int group) const {
    return cells_[index(treatment, group)].predict(x);
}

void FittedUtility::outcome_gradient(int treatment, std::span<const double> x, int group,
                                     std::span<double> out) const {
    cells_[index(treatment, group)].predict(x, out);
}

double FittedUtility::group_probability(std::span<const double> x, int group) const {
    const double p1 = group_.predict(x);
    return group == 1 ? p1 : 1.0 - p1;
}

void FittedUtility::group_probability_gradient(std::span<const double> x, int group, std::span<double> out) const {
    group_.gradient(x, out);
    if (group == 0)
        for (auto& v : out) v = -v;
}

std::shared_ptr<LogisticPolicy> fit_propensity(const Dataset& data, double reg, const LogisticOptions& opts) {
    const auto all = covariates(data);
    const Standardizer st = Standardizer::from_points(all);
    std::array<LogisticFit, 2> fits;
    for (int a = 0; a < 2; ++a) {
        std::vector<Vec> xs;
        std::vector<int> ys;
        int treated = 0;
        for (const auto& s : data.samples()) {
            if (s.s != a) continue;
            xs.push_back(s.x);
            ys.push_back(s.w);
            treated += s.w;
        }
        if (treated == 0 || treated == static_cast<int>(ys.size())) {
            std::ostringstream msg;
            msg << "group s=" << a << " has only " << (treated == 0 ? "control" : "treated")
                << " samples; propensity is not identifiable (separation), increase reg or rebalance the data";
            throw EstimationError(msg.str());
        }
        fits[static_cast<std::size_t>(a)] = fit_logistic(xs, ys, reg, st, opts);
        fits[static_cast<std::size_t>(a)].group = a;
    }
    return std::make_shared<LogisticPolicy>(std::move(fits));
}

LogisticFit fit_group_model(const Dataset& data, double reg, const LogisticOptions& opts) {
    if (data.group_count(0) == 0 || data.group_count(1) == 0)
        throw EstimationError("group model needs both s=0 and s=1 samples");
    const auto xs = covariates(data);
    std::vector<int> ys;
    ys.reserve(data.size());
    for (const auto& s : data.samples()) ys.push_back(s.s);
    LogisticFit fit = fit_logistic(xs, ys, reg, Standardizer::from_points(xs), opts);
    fit.group = -1;
    return fit;
}

std::shared_ptr<FittedUtility> fit_outcome(const Dataset& data, double bandwidth, double group_reg,
                                           const LogisticOptions& opts) {
    const auto all = covariates(data);
    const Standardizer st = Standardizer::from_points(all);
    std::array<KernelRegressor, 4> cells;
    for (int w = 0; w < 2; ++w) {
        for (int a = 0; a < 2; ++a) {
            std::vector<Vec> xs;
            Vec ys;
            for (const auto& s : data.samples()) {
                if (s.w != w || s.s != a) continue;
                xs.push_back(s.x);
                ys.push_back(s.y);
            }
            if (xs.empty()) throw EstimationError("outcome cell " + cell_name(w, a) + " is empty");
            cells[static_cast<std::size_t>(2 * w + a)] = KernelRegressor(xs, ys, st, bandwidth);
        }
    }
    return std::make_shared<FittedUtility>(std::move(cells), fit_group_model(data, group_reg, opts));
}

std::shared_ptr<ScorePolicy> smooth_scores(const Dataset& data, std::span<const std::array<double, 2>> scores,
                                           double bandwidth) {
    if (scores.size() != data.size()) throw EstimationError("score columns do not match the dataset length");
    const auto xs = covariates(data);
    const Standardizer st = Standardizer::from_points(xs);
    std::array<KernelRegressor, 2> sm;
    for (std::size_t a = 0; a < 2; ++a) {
        Vec ys(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            ys[i] = scores[i][a];
            if (!(ys[i] >= 0.0 && ys[i] <= 1.0))
                throw EstimationError("score_" + std::to_string(a) + " at row " + std::to_string(i + 1) +
                                      " is outside [0, 1]");
        }
        sm[a] = KernelRegressor(xs, ys, st, bandwidth);
    }
    return std::make_shared<ScorePolicy>(std::move(sm), data.dim());
}

} // namespace fairtest
