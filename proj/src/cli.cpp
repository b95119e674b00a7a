#include "fairtest/cli.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "fairtest/errors.hpp"
#include "fairtest/estimation.hpp"
#include "fairtest/io.hpp"
#include "fairtest/parallel.hpp"
#include "fairtest/rng.hpp"

namespace fairtest {
namespace {

using J = nlohmann::ordered_json;

constexpr const char* kFitSchema = "fairtest.fit/1";
constexpr const char* kSweepSchema = "fairtest.sweep/1";

// Reads typed keys out of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const J& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw SchemaError("config: '" + display() + "' must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const J* raw(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    bool get(const char* key, double& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_number()) fail(key, "a number");
        out = v->get<double>();
        if (!std::isfinite(out)) fail(key, "a finite number");
        return true;
    }

    bool get(const char* key, int& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_number_integer()) fail(key, "an integer");
        out = v->get<int>();
        return true;
    }

    // std::size_t and std::uint64_t coincide on the supported targets
    bool get(const char* key, std::uint64_t& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
            fail(key, "a nonnegative integer");
        out = v->get<std::uint64_t>();
        return true;
    }

    bool get(const char* key, bool& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_boolean()) fail(key, "true or false");
        out = v->get<bool>();
        return true;
    }

    bool get(const char* key, std::string& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_string()) fail(key, "a string");
        out = v->get<std::string>();
        return true;
    }

    bool get(const char* key, std::vector<double>& out) {
        const J* v = raw(key);
        if (!v) return false;
        if (!v->is_array()) fail(key, "an array of numbers");
        out.clear();
        for (const auto& e : *v) {
            if (!e.is_number()) fail(key, "an array of numbers");
            out.push_back(e.get<double>());
        }
        return true;
    }

    std::optional<Section> child(const char* key) {
        const J* v = raw(key);
        if (!v) return std::nullopt;
        return Section(*v, path_ + key + ".");
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw SchemaError("config: unknown key '" + path_ + k + "'");
    }

private:
    std::string display() const { return path_.empty() ? "<root>" : path_.substr(0, path_.size() - 1); }
    [[noreturn]] void fail(const char* key, const char* what) const {
        throw SchemaError("config: '" + path_ + key + "' must be " + what);
    }

    const J& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void parse_solver(Section s, SolverConfig& c, bool& policy_set) {
    s.get("b_dual", c.b_dual);
    s.get("inner_grid", c.inner_grid);
    s.get("sobol_points", c.sobol_points);
    s.get("polish_seeds", c.polish_seeds);
    s.get("inner_tol", c.inner_tol);
    s.get("inner_max_iters", c.inner_max_iters);
    s.get("outer_tol", c.outer_tol);
    s.get("line_tol", c.line_tol);
    s.get("max_outer_iters", c.max_outer_iters);
    s.get("refine_cycles", c.refine_cycles);
    s.get("refine_window", c.refine_window);
    s.get("restarts", c.restarts);
    s.get("max_doublings", c.max_doublings);
    s.get("seed", c.seed);
    std::string policy;
    if (s.get("boundary_policy", policy)) {
        if (policy == "escalate") c.boundary_policy = BoundaryPolicy::Escalate;
        else if (policy == "report") c.boundary_policy = BoundaryPolicy::Report;
        else throw SchemaError("config: 'solver.boundary_policy' must be \"escalate\" or \"report\"");
        policy_set = true;
    }
    s.finish();
}

void parse_bootstrap(Section s, BootstrapConfig& c, bool& seed_set) {
    s.get("draws", c.draws);
    s.get("fp_tol", c.fp_tol);
    s.get("fp_max_iters", c.fp_max_iters);
    s.get("damping", c.damping);
    s.get("ridge", c.ridge);
    seed_set = s.get("seed", c.seed);
    s.get("use_joint_cov", c.use_joint_cov);
    s.get("zeta_max", c.zeta_max);
    s.get("cross_check", c.cross_check);
    s.finish();
}

J logistic_json(const LogisticFit& f) {
    const std::size_t d = f.standardizer.mean.size();
    J slopes = J::array();
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) slopes.push_back(f.slope(j));
    for (double w : f.weights) norm += w * w;
    J out;
    if (f.group >= 0) out["group"] = f.group;
    out["weights"] = f.weights;
    out["slopes"] = slopes;
    out["weight_norm"] = std::sqrt(norm);
    out["reg"] = f.reg;
    out["standardizer"] = J{{"mean", f.standardizer.mean}, {"scale", f.standardizer.scale}};
    out["objective"] = f.objective;
    out["grad_norm"] = f.grad_norm;
    out["iterations"] = f.iterations;
    out["converged"] = f.converged;
    return out;
}

LogisticFit logistic_from_json(const J& j, std::size_t d) {
    try {
        LogisticFit f;
        f.weights = j.at("weights").get<Vec>();
        f.reg = j.at("reg").get<double>();
        f.group = j.contains("group") ? j.at("group").get<int>() : -1;
        f.standardizer.mean = j.at("standardizer").at("mean").get<Vec>();
        f.standardizer.scale = j.at("standardizer").at("scale").get<Vec>();
        if (f.weights.size() != d + 1 || f.standardizer.mean.size() != d || f.standardizer.scale.size() != d)
            throw SchemaError("model file dimensions do not match the data");
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
}

struct BuiltModel {
    std::shared_ptr<const CompositeModel> model;
    std::string source;
    J fit;
};

BuiltModel build_model(const LoadedData& ld, const RunConfig& rc, const J* fit_file) {
    BuiltModel out;
    if (rc.pricing_theta1) {
        PricingScenario sc;
        sc.theta1 = *rc.pricing_theta1;
        out.model = pricing_model(sc);
        out.source = "pricing";
        return out;
    }
    const Dataset& data = ld.data;
    const double group_reg = std::isnan(rc.estimation.group_reg) ? rc.estimation.reg : rc.estimation.group_reg;
    std::shared_ptr<const PolicyModel> policy;
    J fit;
    fit["schema_version"] = kFitSchema;
    fit["data"] = J{{"rows", data.size()},
                    {"dim", data.dim()},
                    {"fingerprint", ld.fingerprint},
                    {"outcome_from_labels", ld.from_labels},
                    {"score_columns", !ld.scores.empty()}};
    fit["estimation"] = J{{"reg", rc.estimation.reg}, {"bandwidth", rc.estimation.bandwidth}, {"group_reg", group_reg}};

    std::shared_ptr<FittedUtility> utility;
    if (fit_file) {
        const J& ff = *fit_file;
        if (!ff.is_object() || ff.value("schema_version", "") != kFitSchema)
            throw SchemaError("model file is not a fairtest fit (schema " + std::string(kFitSchema) + ")");
        if (ff.at("data").value("fingerprint", "") != ld.fingerprint)
            throw SchemaError("model file was fitted on different data (fingerprint mismatch)");
        const J& est = ff.at("estimation");
        const LogisticFit group = logistic_from_json(ff.at("group_model"), data.dim());
        if (ff.at("propensity").is_null()) {
            policy = smooth_scores(data, ld.scores, est.at("bandwidth").get<double>());
            out.source = "scores";
        } else {
            policy = std::make_shared<LogisticPolicy>(std::array<LogisticFit, 2>{
                logistic_from_json(ff.at("propensity").at(0), data.dim()),
                logistic_from_json(ff.at("propensity").at(1), data.dim())});
            out.source = "fit_file";
        }
        const auto refit = fit_outcome(data, est.at("bandwidth").get<double>(), group.reg);
        std::array<KernelRegressor, 4> cells{refit->cell(0, 0), refit->cell(0, 1), refit->cell(1, 0), refit->cell(1, 1)};
        utility = std::make_shared<FittedUtility>(std::move(cells), group);
        out.fit = ff;
    } else {
        if (!ld.scores.empty()) {
            policy = smooth_scores(data, ld.scores, rc.estimation.bandwidth);
            fit["propensity"] = nullptr;
            out.source = "scores";
        } else {
            auto lp = fit_propensity(data, rc.estimation.reg);
            fit["propensity"] = J::array({logistic_json(lp->fit(0)), logistic_json(lp->fit(1))});
            policy = lp;
            out.source = "fitted";
        }
        utility = fit_outcome(data, rc.estimation.bandwidth, group_reg);
        fit["group_model"] = logistic_json(utility->group_model());
        J cells = J::array();
        for (int w = 0; w < 2; ++w)
            for (int a = 0; a < 2; ++a) {
                const auto& c = utility->cell(w, a);
                cells.push_back(J{{"w", w},
                                  {"s", a},
                                  {"n", c.size()},
                                  {"bandwidths", c.bandwidths()},
                                  {"min_target", c.min_target()},
                                  {"max_target", c.max_target()}});
            }
        fit["outcome"] = cells;
        out.fit = fit;
    }
    out.model = std::make_shared<CompositeModel>(policy, utility, data.space());
    return out;
}

std::string dump(const J& j) { return j.dump(2) + "\n"; }

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") out << content;
    else atomic_write(path, content);
}

std::optional<CovariateSpace> data_box(const RunConfig& rc) {
    if (rc.pricing_theta1) return CovariateSpace({0.0}, {1.0});
    return rc.box;
}

// Splits one CSV record, honoring double quotes.
std::vector<std::string> split_quoted(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back() += c;
        }
    }
    return out;
}

struct Cell {
    double theta1, r, eps;
    double statistic = 0.0, critical = 0.0, rejections = 0.0;
    std::size_t count = 0;
};

// Averages replicates per (theta1, r, eps), keyed in first-seen order.
std::vector<Cell> aggregate_rows(const std::vector<SweepRow>& rows) {
    std::vector<Cell> cells;
    std::map<std::tuple<double, double, double>, std::size_t> index;
    for (const auto& row : rows) {
        if (row.status != "ok") continue;
        const auto key = std::make_tuple(row.theta1, row.r, row.eps);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, cells.size()).first;
            cells.push_back({row.theta1, row.r, row.eps});
        }
        Cell& c = cells[it->second];
        c.statistic += row.statistic;
        c.critical += row.critical_value;
        c.rejections += row.reject ? 1.0 : 0.0;
        ++c.count;
    }
    for (auto& c : cells) {
        c.statistic /= static_cast<double>(c.count);
        c.critical /= static_cast<double>(c.count);
        c.rejections /= static_cast<double>(c.count);
    }
    return cells;
}

// Smallest theta1 whose rejection rate is at least one half, per (r, eps).
std::vector<std::tuple<double, double, std::optional<double>>> smallest_rejecting(const std::vector<Cell>& cells) {
    std::vector<std::tuple<double, double, std::optional<double>>> out;
    std::map<std::pair<double, double>, std::size_t> index;
    for (const auto& c : cells) {
        const auto key = std::make_pair(c.r, c.eps);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.emplace_back(c.r, c.eps, std::nullopt);
        }
        auto& best = std::get<2>(out[it->second]);
        if (c.rejections >= 0.5 && (!best || c.theta1 < *best)) best = c.theta1;
    }
    return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("sweep file is empty");
    const auto header = split_quoted(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
    for (const char* need : {"theta1", "r", "eps", "statistic", "critical_value", "reject", "status"})
        if (!col.count(need)) throw SchemaError(std::string("sweep file: missing column '") + need + "'");
    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_quoted(line);
        if (f.size() != header.size())
            throw SchemaError("sweep file: row " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                              " fields, expected " + std::to_string(header.size()));
        auto num = [&](const char* name) {
            const std::string& s = f[col[name]];
            double v = 0.0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw SchemaError("sweep file: row " + std::to_string(lineno) + ", column '" + name + "': '" + s +
                                  "' is not a number");
            return v;
        };
        SweepRow row;
        row.theta1 = num("theta1");
        row.r = num("r");
        row.eps = num("eps");
        row.status = f[col["status"]];
        if (row.status == "ok") {
            row.statistic = num("statistic");
            row.critical_value = num("critical_value");
            row.reject = num("reject") != 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

struct Common {
    std::string config_path;
    std::string out_path;
    std::size_t threads = 0;
    bool timings = false;
};

void apply_threads(const Common& c) {
    if (c.threads > 0) set_thread_count(c.threads);
}

RunConfig config_or_default(const std::string& path) {
    return path.empty() ? RunConfig{} : load_config(path);
}

int cmd_simulate(const Common& common, CLI::App& sub, const std::vector<double>& thetas,
                 const std::vector<double>& rs, const std::vector<double>& epss, std::size_t n, double alpha,
                 std::uint64_t seed, std::size_t replications, std::ostream& out, std::ostream& err) {
    apply_threads(common);
    RunConfig rc = config_or_default(common.config_path);
    SweepConfig cfg = rc.sweep;
    if (sub.count("--theta1")) cfg.thetas = thetas;
    if (sub.count("--r")) cfg.rs = rs;
    if (sub.count("--eps")) cfg.epss = epss;
    if (sub.count("--n")) cfg.n = n;
    if (sub.count("--alpha")) cfg.alpha_level = alpha;
    if (sub.count("--seed")) cfg.seed = seed;
    if (sub.count("--replications")) cfg.replications = replications;
    if (!rc.bootstrap_seed_set) cfg.bootstrap.seed = cfg.seed;

    const SweepResult res = run_sweep(cfg);
    if (common.out_path.empty() || common.out_path == "-") {
        out << res.to_csv(common.timings);
    } else {
        atomic_write(common.out_path, res.to_csv(common.timings));
        const auto cells = aggregate_rows(res.rows);
        J summary;
        summary["schema_version"] = kSweepSchema;
        summary["rows"] = res.rows.size();
        summary["failures"] = res.failures();
        summary["n"] = cfg.n;
        summary["alpha_level"] = cfg.alpha_level;
        summary["seed"] = cfg.seed;
        summary["replications"] = cfg.replications;
        summary["outcome_noise"] = cfg.noise;
        J jc = J::array();
        for (const auto& c : cells)
            jc.push_back(J{{"theta1", c.theta1},
                           {"r", c.r},
                           {"eps", c.eps},
                           {"mean_statistic", c.statistic},
                           {"mean_critical_value", c.critical},
                           {"rejection_rate", c.rejections}});
        summary["cells"] = jc;
        J sr = J::array();
        for (const auto& [r, eps, theta] : smallest_rejecting(cells))
            sr.push_back(J{{"r", r}, {"eps", eps}, {"smallest_rejecting_theta1", theta ? J(*theta) : J(nullptr)}});
        summary["smallest_rejecting_theta1"] = sr;
        summary["config"] = rc.echo;
        atomic_write(common.out_path + ".summary.json", dump(summary));
    }
    if (res.failures() > 0) err << "warning: " << res.failures() << " sweep cells failed; see the status column\n";
    return kExitOk;
}

int cmd_fit(const Common& common, CLI::App& sub, const std::string& data_path, double reg, double bandwidth,
            std::ostream& out) {
    apply_threads(common);
    RunConfig rc = config_or_default(common.config_path);
    if (sub.count("--reg")) rc.estimation.reg = reg;
    if (sub.count("--bandwidth")) rc.estimation.bandwidth = bandwidth;
    rc.pricing_theta1.reset();
    const LoadedData ld = read_dataset_csv(data_path, data_box(rc));
    const BuiltModel bm = build_model(ld, rc, nullptr);
    J fit = bm.fit;
    const GradientCheckResult gc = check_gradients(*bm.model, 100, rc.test.seed);
    fit["gradient_check"] = J{{"passed", gc.passed},
                              {"probes", gc.probes},
                              {"worst_error", gc.worst_error},
                              {"worst_function", gc.worst_function}};
    emit(common.out_path, dump(fit), out);
    return kExitOk;
}

int cmd_test(const Common& common, CLI::App& sub, const std::string& data_path, const std::string& model_path,
             double r, double eps, double alpha, std::uint64_t seed, double reg, double bandwidth, std::ostream& out,
             std::ostream& err) {
    apply_threads(common);
    RunConfig rc = config_or_default(common.config_path);
    if (sub.count("--r")) rc.test.r = r;
    if (sub.count("--eps")) rc.test.eps = eps;
    if (sub.count("--alpha")) rc.test.alpha_level = alpha;
    if (sub.count("--seed")) {
        rc.test.seed = seed;
        if (!rc.bootstrap_seed_set) rc.test.bootstrap.seed = seed;
    }
    if (sub.count("--reg")) rc.estimation.reg = reg;
    if (sub.count("--bandwidth")) rc.estimation.bandwidth = bandwidth;
    rc.test.validate();

    const LoadedData ld = read_dataset_csv(data_path, data_box(rc));
    std::optional<J> fit_file;
    if (!model_path.empty()) {
        try {
            fit_file = J::parse(read_text(model_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("model file: " + std::string(e.what()));
        }
    }
    const BuiltModel bm = build_model(ld, rc, fit_file ? &*fit_file : nullptr);

    TestReport rep = run_test(*bm.model, ld.data, rc.test);
    rep.config = rc.echo;
    J j = report_json(rep, common.timings);
    J model;
    model["source"] = bm.source;
    if (bm.source != "pricing") {
        model["reg"] = rc.estimation.reg;
        model["bandwidth"] = rc.estimation.bandwidth;
        model["data_fingerprint"] = ld.fingerprint;
    } else {
        model["theta1"] = *rc.pricing_theta1;
    }
    j["model"] = model;
    emit(common.out_path, dump(j), out);

    if (rep.status == "assumption_violation") {
        for (const auto& v : rep.assumptions.violations) err << "assumption " << v.assumption << ": " << v.message << "\n";
        return kExitAssumption;
    }
    if (rep.status != "ok") {
        err << rep.status << ": " << rep.error << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}

int cmd_plot(const Common& common, const std::string& data_path, std::ostream& out) {
    const auto cells = aggregate_rows(parse_sweep_csv(read_text(data_path)));
    std::string csv = "figure,theta1,r,eps,metric,value\n";
    for (const auto& c : cells) {
        const std::string key = "fig1," + format_double(c.theta1) + "," + format_double(c.r) + "," + format_double(c.eps) + ",";
        csv += key + "statistic," + format_double(c.statistic) + "\n";
        csv += key + "critical_value," + format_double(c.critical) + "\n";
        csv += key + "rejection_rate," + format_double(c.rejections) + "\n";
    }
    for (const auto& [r, eps, theta] : smallest_rejecting(cells))
        csv += "fig2,NA," + format_double(r) + "," + format_double(eps) + ",smallest_rejecting_theta1," +
               (theta ? format_double(*theta) : std::string("NA")) + "\n";
    emit(common.out_path, csv, out);
    return kExitOk;
}

// Two covariates, group independent of x, a classifier whose positive rate
// rises faster in x1 for group 1; y records whether the prediction is right.
int cmd_synth(const Common& common, std::size_t n, std::uint64_t seed, std::ostream& out) {
    if (n < 4) throw DomainError("--n must be at least 4");
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    std::string csv = "x1,x2,s,w,label\n";
    for (std::size_t i = 0; i < n; ++i) {
        rng::Stream st(rng::mix(seed, 0x656d70ULL, i));
        const double x1 = st.uniform();
        const double x2 = st.uniform();
        const int s = st.bernoulli(0.5) ? 1 : 0;
        const double pi = s == 1 ? sig(3.0 * (x1 - 0.5)) : sig(x1 - 0.5);
        const int w = st.bernoulli(pi) ? 1 : 0;
        const int label = st.bernoulli(sig(4.0 * (x1 - 0.5) + x2 - 0.5)) ? 1 : 0;
        csv += format_double(x1) + "," + format_double(x2) + "," + std::to_string(s) + "," + std::to_string(w) + "," +
               std::to_string(label) + "\n";
    }
    emit(common.out_path, csv, out);
    return kExitOk;
}

} // namespace

RunConfig parse_config(const J& j) {
    RunConfig rc;
    rc.echo = j;
    Section root(j, "");
    root.get("r", rc.test.r);
    root.get("eps", rc.test.eps);
    root.get("alpha", rc.test.alpha_level);
    if (root.get("seed", rc.test.seed)) rc.test.bootstrap.seed = rc.test.seed;
    root.get("allow_infeasible", rc.test.allow_infeasible);
    root.get("b_outcome", rc.test.b_outcome);
    root.get("gradient_probes", rc.test.gradient_probes);
    double theta = 0.0;
    if (root.get("pricing_theta1", theta)) rc.pricing_theta1 = theta;
    if (auto s = root.child("box")) {
        Vec lo, hi;
        if (!s->get("lower", lo) || !s->get("upper", hi)) throw SchemaError("config: 'box' needs 'lower' and 'upper'");
        s->finish();
        try {
            rc.box = CovariateSpace(lo, hi);
        } catch (const DomainError& e) {
            throw SchemaError(std::string("config: box: ") + e.what());
        }
    }
    if (auto s = root.child("solver")) parse_solver(*s, rc.test.solver, rc.boundary_policy_set);
    if (auto s = root.child("bootstrap")) parse_bootstrap(*s, rc.test.bootstrap, rc.bootstrap_seed_set);
    if (rc.bootstrap_seed_set) rc.test.bootstrap.seed = j.at("bootstrap").at("seed").get<std::uint64_t>();
    if (auto s = root.child("estimation")) {
        s->get("reg", rc.estimation.reg);
        s->get("bandwidth", rc.estimation.bandwidth);
        s->get("group_reg", rc.estimation.group_reg);
        s->finish();
        if (!(rc.estimation.reg >= 0.0) || !(rc.estimation.bandwidth >= 0.0))
            throw SchemaError("config: estimation.reg and estimation.bandwidth must be nonnegative");
    }
    rc.sweep.solver = rc.test.solver;
    if (!rc.boundary_policy_set) rc.sweep.solver.boundary_policy = BoundaryPolicy::Report;
    rc.sweep.bootstrap = rc.test.bootstrap;
    rc.sweep.alpha_level = rc.test.alpha_level;
    if (j.contains("seed")) rc.sweep.seed = rc.test.seed;
    if (auto s = root.child("sweep")) {
        s->get("thetas", rc.sweep.thetas);
        s->get("rs", rc.sweep.rs);
        s->get("epss", rc.sweep.epss);
        s->get("n", rc.sweep.n);
        s->get("replications", rc.sweep.replications);
        s->get("noise", rc.sweep.noise);
        s->finish();
    }
    root.finish();
    try {
        rc.test.validate();
    } catch (const DomainError& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    J j;
    try {
        j = J::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Utility-constrained approximate-fairness test"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub, bool config = true) {
        if (config) sub->add_option("--config", common.config_path, "JSON config file");
        sub->add_option("--out", common.out_path, "output path (default: stdout)");
        sub->add_option("--threads", common.threads, "worker threads (capped by AUDIT_THREADS)");
    };

    std::vector<double> thetas, rs, epss;
    std::size_t n = 500, replications = 1;
    double alpha = 0.05, r = 1.0, eps = 0.01, reg = 0.01, bandwidth = 0.0;
    std::uint64_t seed = 42;
    std::string data_path, model_path;

    auto* sim = app.add_subcommand("simulate-sweep", "run the synthetic pricing sweep");
    sim->add_option("--theta1", thetas, "theta1 grid")->delimiter(',');
    sim->add_option("--r", rs, "utility thresholds")->delimiter(',');
    sim->add_option("--eps", epss, "fairness tolerances")->delimiter(',');
    sim->add_option("--n", n, "samples per scenario");
    sim->add_option("--alpha", alpha, "significance level");
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--replications", replications, "datasets per cell");
    sim->add_flag("--timings", common.timings, "add a runtime column");
    add_common(sim);

    auto* fit = app.add_subcommand("fit", "fit propensity, group and outcome models");
    fit->add_option("--data", data_path, "CSV data file")->required();
    fit->add_option("--reg", reg, "ridge weight for the logistic fits");
    fit->add_option("--bandwidth", bandwidth, "kernel bandwidth in standardized units (0 = Silverman)");
    add_common(fit);

    auto* test = app.add_subcommand("test", "run the fairness test on a data file");
    test->add_option("--data", data_path, "CSV data file")->required();
    test->add_option("--model", model_path, "fit JSON from the fit command");
    test->add_option("--r", r, "utility threshold");
    test->add_option("--eps", eps, "fairness tolerance");
    test->add_option("--alpha", alpha, "significance level");
    test->add_option("--seed", seed, "seed for the bootstrap and gradient probes");
    test->add_option("--reg", reg, "ridge weight for the logistic fits");
    test->add_option("--bandwidth", bandwidth, "kernel bandwidth in standardized units (0 = Silverman)");
    test->add_flag("--timings", common.timings, "add stage timings to the report");
    add_common(test);

    auto* plot = app.add_subcommand("plot-data", "turn a sweep CSV into tidy plot data");
    plot->add_option("--data", data_path, "sweep CSV")->required();
    add_common(plot, false);

    auto* synth = app.add_subcommand("synth-empirical", "generate the bundled classifier-audit CSV");
    synth->add_option("--n", n, "rows");
    synth->add_option("--seed", seed, "seed");
    add_common(synth, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(common, *sim, thetas, rs, epss, n, alpha, seed, replications, out, err);
        if (fit->parsed()) return cmd_fit(common, *fit, data_path, reg, bandwidth, out);
        if (test->parsed())
            return cmd_test(common, *test, data_path, model_path, r, eps, alpha, seed, reg, bandwidth, out, err);
        if (plot->parsed()) return cmd_plot(common, data_path, out);
        if (synth->parsed()) return cmd_synth(common, n, seed, out);
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EstimationError& e) {
        err << "estimation error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

} // namespace fairtest
