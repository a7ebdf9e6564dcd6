#include "twohop/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "twohop/errors.hpp"
#include "twohop/parallel.hpp"

namespace twohop {

using nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Simulate: return "simulate";
        case Mode::Analytic: return "analytic";
        case Mode::Both: return "both";
    }
    return "unknown";
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::LambdaR: return "lambda_r";
        case SweepAxis::Delta: return "delta";
        case SweepAxis::Theta: return "theta";
        case SweepAxis::Epsilon: return "epsilon";
        case SweepAxis::LinkDistance: return "R";
    }
    return "unknown";
}

Mode parse_mode(const std::string& name) {
    if (name == "simulate") return Mode::Simulate;
    if (name == "analytic") return Mode::Analytic;
    if (name == "both") return Mode::Both;
    throw ParameterError("mode: unknown value '" + name + "' (simulate, analytic, both)");
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "lambda_r") return SweepAxis::LambdaR;
    if (name == "delta") return SweepAxis::Delta;
    if (name == "theta") return SweepAxis::Theta;
    if (name == "epsilon") return SweepAxis::Epsilon;
    if (name == "R") return SweepAxis::LinkDistance;
    throw ParameterError("sweep.axis: unknown value '" + name + "' (lambda_r, delta, theta, epsilon, R)");
}

namespace {

PolicyKind axis_policy(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Delta: return PolicyKind::RssThinning;
        case SweepAxis::Theta: return PolicyKind::Sectorized;
        case SweepAxis::Epsilon: return PolicyKind::DistanceThinning;
        default: return PolicyKind::AllTransmit;
    }
}

bool is_policy_axis(SweepAxis axis) {
    return axis == SweepAxis::Delta || axis == SweepAxis::Theta || axis == SweepAxis::Epsilon;
}

double normalized(SweepAxis axis, double v) {
    switch (axis) {
        case SweepAxis::Theta: return 4.0 * v / std::numbers::pi;
        case SweepAxis::Epsilon: return v / 6.0;
        default: return v;
    }
}

}  // namespace

void ExperimentSpec::validate() const {
    base.validate();
    quad.validate();
    if (values.empty()) throw ParameterError("sweep.values: at least one value is required");
    if (is_policy_axis(axis) && base.policy.kind() != axis_policy(axis))
        throw ParameterError("sweep.axis: '" + to_string(axis) + "' needs policy " + to_string(axis_policy(axis)) +
                             ", got " + to_string(base.policy.kind()));
    if (mode != Mode::Simulate && base.policy.kind() == PolicyKind::CenterBaseline)
        throw ParameterError("policy.name: 'center' is supported only in simulate mode; the analytic engine has no model for it");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const std::string field = "sweep.values[" + std::to_string(i) + "]";
        if (!std::isfinite(v)) throw ParameterError(field + ": must be finite");
        try {
            point_config(i).validate();
        } catch (const ParameterError& e) {
            throw ParameterError(field + ": " + e.what());
        }
    }
}

SimulationConfig ExperimentSpec::point_config(std::size_t i) const {
    SimulationConfig c = base;
    const double v = values.at(i);
    switch (axis) {
        case SweepAxis::LambdaR: c.lambda_r = v; break;
        case SweepAxis::LinkDistance: c.link_distance = v; break;
        default: c.policy = c.policy.with_parameter(v); break;
    }
    return c;
}

AnalyticInputs ExperimentSpec::point_inputs(std::size_t i) const {
    const SimulationConfig c = point_config(i);
    AnalyticInputs in;
    in.lambda_s = c.lambda_s;
    in.lambda_r = c.lambda_r;
    in.link_distance = c.link_distance;
    in.threshold = c.threshold;
    in.path_loss = c.path_loss;
    in.policy = c.policy;
    in.own_cluster = own_cluster;
    return in;
}

std::vector<std::string> csv_columns(Mode mode) {
    std::vector<std::string> cols{"label",     "mode", "policy", "axis",      "value",      "x",      "lambda_s",
                                  "lambda_r",  "R",    "T",      "alpha",     "policy_parameter", "half_width",
                                  "margin",    "trials", "seed"};
    if (mode != Mode::Analytic)
        cols.insert(cols.end(), {"sim_p1", "sim_p1_se", "sim_p2", "sim_p2_se", "sim_ps", "sim_ps_se", "sim_ps_joint",
                                 "sim_ps_joint_se", "sim_cluster", "sim_cluster_se", "sim_sources"});
    if (mode != Mode::Simulate) cols.insert(cols.end(), {"an_p1", "an_p2", "an_p2_err", "an_ps", "an_cluster"});
    if (mode == Mode::Both) cols.insert(cols.end(), {"gap_ps", "gap_p2"});
    return cols;
}

void write_csv_header(std::ostream& out, Mode mode) {
    const auto cols = csv_columns(mode);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

namespace {

std::string format_number(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(6) << v;
    return s.str();
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

}  // namespace

void write_csv_row(std::ostream& out, const ResultRow& row) {
    const SimulationConfig& c = row.config;
    std::vector<std::string> f{csv_field(row.label),
                               to_string(row.mode),
                               to_string(c.policy.kind()),
                               to_string(row.axis),
                               format_number(row.sweep_value),
                               format_number(row.x_normalized),
                               format_number(c.lambda_s),
                               format_number(c.lambda_r),
                               format_number(c.link_distance),
                               format_number(c.threshold),
                               format_number(c.path_loss.alpha()),
                               format_number(c.policy.parameter()),
                               format_number(c.window.half_width()),
                               format_number(c.window.guard_margin()),
                               std::to_string(c.n_trials),
                               std::to_string(c.master_seed)};
    auto opt = [&](bool present, auto get) { f.push_back(present ? get() : std::string()); };
    if (row.mode != Mode::Analytic) {
        const bool s = row.simulated.has_value();
        const EstimateRecord e = s ? *row.simulated : EstimateRecord{};
        for (double v : {e.p1, e.se_p1, e.p2, e.se_p2, e.ps_composed, e.se_ps_composed, e.ps_joint, e.se_ps_joint,
                         e.mean_cluster_size, e.se_cluster_size})
            opt(s, [&] { return format_number(v); });
        opt(s, [&] { return std::to_string(e.n_sources_measured); });
    }
    if (row.mode != Mode::Simulate) {
        const bool a = row.analytic.has_value();
        const AnalyticEstimate e = a ? *row.analytic : AnalyticEstimate{};
        for (double v : {e.p1, e.p2, e.p2_error_estimate, e.ps, e.mean_cluster_size})
            opt(a, [&] { return format_number(v); });
    }
    if (row.mode == Mode::Both) {
        const bool both = row.simulated && row.analytic;
        opt(row.gap.has_value(), [&] { return format_number(*row.gap); });
        opt(both, [&] { return format_number(std::abs(row.simulated->p2 - row.analytic->p2)); });
    }
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << '\n';
}

std::atomic<bool>& stop_requested() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

// Writes rows in sweep order as soon as every earlier row is done.
class OrderedSink {
public:
    OrderedSink(std::ostream* out, std::size_t n) : out_(out), done_(n) {}

    void deliver(std::size_t i, const ResultRow& row) {
        std::lock_guard lock(mutex_);
        done_[i] = row;
        while (next_ < done_.size() && done_[next_]) {
            if (out_) {
                write_csv_row(*out_, *done_[next_]);
                out_->flush();
            }
            ++next_;
        }
    }

    std::vector<ResultRow> rows() const {
        std::vector<ResultRow> out;
        for (const auto& r : done_)
            if (r) out.push_back(*r);
        return out;
    }

private:
    std::ostream* out_;
    std::mutex mutex_;
    std::vector<std::optional<ResultRow>> done_;
    std::size_t next_ = 0;
};

ResultRow run_point(const ExperimentSpec& spec, std::size_t i) {
    if (stop_requested()) throw Interrupted("interrupted before " + to_string(spec.axis) + "=" +
                                            format_number(spec.values[i]));
    const auto start = std::chrono::steady_clock::now();
    ResultRow row;
    row.label = spec.label;
    row.mode = spec.mode;
    row.config = spec.point_config(i);
    row.axis = spec.axis;
    row.sweep_value = spec.values[i];
    row.x_normalized = normalized(spec.axis, spec.values[i]);
    if (spec.mode != Mode::Analytic) row.simulated = estimate(row.config);
    if (spec.mode != Mode::Simulate) row.analytic = evaluate(spec.point_inputs(i), spec.quad);
    if (row.simulated && row.analytic) row.gap = std::abs(row.simulated->ps_composed - row.analytic->ps);
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

void report(std::ostream* progress, const ResultRow& row) {
    if (!progress) return;
    std::ostringstream s;
    s << (row.label.empty() ? to_string(row.config.policy.kind()) : row.label) << ' ' << to_string(row.axis) << '='
      << format_number(row.sweep_value);
    if (row.simulated)
        s << "  sim Ps=" << format_number(row.simulated->ps_composed) << " (se " << format_number(row.simulated->se_ps_composed)
          << ")";
    if (row.analytic) s << "  analytic Ps=" << format_number(row.analytic->ps);
    s << "  [" << std::fixed << std::setprecision(2) << row.wall_seconds << " s]\n";
    *progress << s.str() << std::flush;
}

}  // namespace

std::vector<ResultRow> run_experiments(const std::vector<ExperimentSpec>& specs, const RunOptions& options) {
    if (specs.empty()) throw ParameterError("nothing to run");
    for (const ExperimentSpec& s : specs) {
        if (s.mode != specs.front().mode) throw ParameterError("mode: every series in one file must share a mode");
        s.validate();
    }

    std::ofstream file;
    const bool to_stdout = options.output == "-";
    if (to_stdout) write_csv_header(std::cout, specs.front().mode);
    if (!options.output.empty() && !to_stdout) {
        file.open(options.output, std::ios::binary | std::ios::trunc);
        if (!file) throw ParameterError("output: cannot open '" + options.output + "' for writing");
        write_csv_header(file, specs.front().mode);
        file.flush();
    }
    std::ostream* out = to_stdout ? &std::cout : options.output.empty() ? nullptr : &file;

    std::vector<ResultRow> all;
    for (const ExperimentSpec& spec : specs) {
        OrderedSink sink(out, spec.values.size());
        try {
            if (spec.mode == Mode::Analytic) {
                std::mutex progress_mutex;
                parallel_for(spec.values.size(), [&](std::uint64_t i) {
                    ResultRow row = run_point(spec, i);
                    {
                        std::lock_guard lock(progress_mutex);
                        report(options.progress, row);
                    }
                    sink.deliver(i, row);
                });
            } else {
                for (std::size_t i = 0; i < spec.values.size(); ++i) {
                    ResultRow row = run_point(spec, i);
                    report(options.progress, row);
                    sink.deliver(i, row);
                }
            }
        } catch (...) {
            if (out) out->flush();
            throw;
        }
        const auto rows = sink.rows();
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    return run_experiments({spec}, options);
}

Comparison compare_modes(std::vector<ResultRow> rows) {
    Comparison c;
    for (ResultRow& r : rows) {
        if (r.mode != Mode::Both) throw ParameterError("mode: comparison needs rows from mode 'both'");
        if (!r.simulated || !r.analytic) throw ContractViolation("mode-both row without both estimates");
        r.gap = std::abs(r.simulated->ps_composed - r.analytic->ps);
        c.max_gap = std::max(c.max_gap, *r.gap);
    }
    c.rows = std::move(rows);
    return c;
}

// ---- configuration files ----

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParameterError(where() + "expected an object");
    }

    // Rejects keys that were never read.
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ParameterError(name(key) + ": unknown key");
    }

    const json* find(const std::string& key) {
        seen_[key] = true;
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ParameterError(name(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0)
                throw ParameterError(name(key) + ": expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void flag(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ParameterError(name(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ParameterError(name(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

    const json& j_;
    std::string path_;
    std::map<std::string, bool> seen_;
};

// Rethrows a ParameterError from a setter as one naming the config key.
template <class F>
void checked(const std::string& key, F&& f) {
    try {
        f();
    } catch (const ParameterError& e) {
        throw ParameterError(key + ": " + e.what());
    }
}

}  // namespace

ExperimentSpec spec_from_json(const std::string& text, std::string* output) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("config: not valid JSON: ") + e.what());
    }

    ExperimentSpec spec;
    Section top(root, "");
    std::string mode = to_string(spec.mode);
    top.text("mode", mode);
    checked("mode", [&] { spec.mode = parse_mode(mode); });
    top.text("label", spec.label);
    std::string out_path;
    top.text("output", out_path);
    if (output && !out_path.empty()) *output = out_path;

    SimulationConfig& c = spec.base;
    if (const json* j = top.find("network")) {
        Section s(*j, "network");
        s.number("lambda_s", c.lambda_s);
        s.number("lambda_r", c.lambda_r);
        s.number("R", c.link_distance);
        s.number("T", c.threshold);
        double alpha = c.path_loss.alpha();
        bool bounded = c.path_loss.bounded();
        s.number("alpha", alpha);
        s.flag("bounded_path_loss", bounded);
        checked("network.alpha", [&] { c.path_loss = PathLossModel(alpha, bounded); });
        s.finish();
    }
    if (const json* j = top.find("window")) {
        Section s(*j, "window");
        double half = c.window.half_width();
        double margin = c.window.guard_margin();
        s.number("half_width", half);
        s.number("margin", margin);
        checked("window", [&] { c.window = Window(half, margin); });
        s.finish();
    }
    if (const json* j = top.find("policy")) {
        Section s(*j, "policy");
        std::string name = to_string(c.policy.kind());
        s.text("name", name);
        double parameter = std::numeric_limits<double>::quiet_NaN();
        s.number("parameter", parameter);
        PolicyKind kind{};
        checked("policy.name", [&] { kind = parse_policy_kind(name); });
        checked("policy.parameter", [&] {
            switch (kind) {
                case PolicyKind::AllTransmit: c.policy = SelectionPolicy::all_transmit(); break;
                case PolicyKind::CenterBaseline: c.policy = SelectionPolicy::center_baseline(); break;
                case PolicyKind::RssThinning: c.policy = SelectionPolicy::rss_thinning(std::isnan(parameter) ? 0.0 : parameter); break;
                case PolicyKind::Sectorized:
                    c.policy = SelectionPolicy::sectorized(std::isnan(parameter) ? std::numbers::pi : parameter);
                    break;
                case PolicyKind::DistanceThinning:
                    c.policy = SelectionPolicy::distance_thinning(std::isnan(parameter) ? 0.0 : parameter);
                    break;
            }
        });
        s.finish();
    }
    if (const json* j = top.find("simulation")) {
        Section s(*j, "simulation");
        s.integer("trials", c.n_trials);
        s.integer("seed", c.master_seed);
        s.finish();
    }
    if (const json* j = top.find("analytic")) {
        Section s(*j, "analytic");
        QuadratureConfig& q = spec.quad;
        s.number("rel_tol", q.rel_tol);
        s.number("pipeline_rel_tol", q.pipeline_rel_tol);
        std::uint64_t nodes = q.radial_nodes, max_nodes = q.max_radial_nodes;
        s.integer("radial_nodes", nodes);
        s.integer("max_radial_nodes", max_nodes);
        q.radial_nodes = nodes;
        q.max_radial_nodes = max_nodes;
        s.integer("max_evaluations", q.max_evaluations);
        std::string own = spec.own_cluster == OwnCluster::Directional ? "directional" : "isotropic";
        s.text("own_cluster", own);
        if (own == "directional") spec.own_cluster = OwnCluster::Directional;
        else if (own == "isotropic") spec.own_cluster = OwnCluster::Isotropic;
        else throw ParameterError("analytic.own_cluster: expected 'directional' or 'isotropic'");
        s.finish();
    }
    if (const json* j = top.find("sweep")) {
        Section s(*j, "sweep");
        std::string axis = to_string(spec.axis);
        s.text("axis", axis);
        checked("sweep.axis", [&] { spec.axis = parse_sweep_axis(axis); });
        if (const json* v = s.find("values")) {
            if (!v->is_array()) throw ParameterError("sweep.values: expected an array of numbers");
            for (const json& x : *v) {
                if (!x.is_number()) throw ParameterError("sweep.values: expected an array of numbers");
                spec.values.push_back(x.get<double>());
            }
        }
        s.finish();
    }
    top.finish();
    if (spec.values.empty()) {
        // a sweep of one point at the base configuration
        switch (spec.axis) {
            case SweepAxis::LambdaR: spec.values = {c.lambda_r}; break;
            case SweepAxis::LinkDistance: spec.values = {c.link_distance}; break;
            default: spec.values = {c.policy.parameter()}; break;
        }
    }
    return spec;
}

std::string spec_to_json(const ExperimentSpec& spec) {
    const SimulationConfig& c = spec.base;
    json j;
    j["mode"] = to_string(spec.mode);
    j["label"] = spec.label;
    j["network"] = {{"lambda_s", c.lambda_s},
                    {"lambda_r", c.lambda_r},
                    {"R", c.link_distance},
                    {"T", c.threshold},
                    {"alpha", c.path_loss.alpha()},
                    {"bounded_path_loss", c.path_loss.bounded()}};
    j["window"] = {{"half_width", c.window.half_width()}, {"margin", c.window.guard_margin()}};
    j["policy"] = {{"name", to_string(c.policy.kind())}, {"parameter", c.policy.parameter()}};
    j["simulation"] = {{"trials", c.n_trials}, {"seed", c.master_seed}};
    j["analytic"] = {{"rel_tol", spec.quad.rel_tol},
                     {"pipeline_rel_tol", spec.quad.pipeline_rel_tol},
                     {"radial_nodes", spec.quad.radial_nodes},
                     {"max_radial_nodes", spec.quad.max_radial_nodes},
                     {"max_evaluations", spec.quad.max_evaluations},
                     {"own_cluster", spec.own_cluster == OwnCluster::Directional ? "directional" : "isotropic"}};
    j["sweep"] = {{"axis", to_string(spec.axis)}, {"values", spec.values}};
    return j.dump(2);
}

// ---- presets ----

namespace {

ExperimentSpec make(Mode mode, std::string label, double lambda_s, double lambda_r, double R, SelectionPolicy policy,
                    SweepAxis axis, std::vector<double> values, Scale scale, std::uint64_t desk_trials,
                    std::uint64_t paper_trials) {
    ExperimentSpec s;
    s.mode = mode;
    s.label = std::move(label);
    s.base.lambda_s = lambda_s;
    s.base.lambda_r = lambda_r;
    s.base.link_distance = R;
    s.base.threshold = 3.0;
    s.base.policy = policy;
    s.base.window = scale == Scale::Desk ? Window(15.0, 5.0) : Window(30.0, 10.0);
    s.base.n_trials = scale == Scale::Desk ? desk_trials : paper_trials;
    s.base.master_seed = 1;
    s.axis = axis;
    s.values = std::move(values);
    return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

std::vector<ExperimentSpec> preset(const std::string& name, Scale scale) {
    constexpr double pi = std::numbers::pi;
    std::vector<ExperimentSpec> out;
    if (name == "fig1") {
        // dense enough that a midpoint relay is a poor bet at R = 2 as well
        const double ls = 0.4;
        const std::vector<double> grid{0.02, 0.05, 0.1, 0.2, 0.4, 0.7, 1.2, 2.0, 3.5, 6.0};
        for (double R : {2.0, 4.0}) {
            const std::string r = R == 2.0 ? "R2" : "R4";
            out.push_back(make(Mode::Simulate, "method3_" + r, ls, 0.0, R, SelectionPolicy::sectorized(pi / 8),
                               SweepAxis::LambdaR, grid, scale, 200, 1000));
            out.push_back(make(Mode::Simulate, "center_" + r, ls, 0.0, R, SelectionPolicy::center_baseline(),
                               SweepAxis::LambdaR, {0.0}, scale, 400, 2000));
        }
    } else if (name == "fig2") {
        out.push_back(make(Mode::Both, "method3", 1.0, 0.0, 0.5, SelectionPolicy::sectorized(pi / 4),
                           SweepAxis::LambdaR, {0.25, 0.5, 1.0, 2.0, 4.0}, scale, 40, 200));
    } else if (name == "fig3") {
        const std::vector<double> x{0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.13, 0.17, 0.2,
                                    0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
        std::vector<double> theta, epsilon;
        for (double v : x) {
            theta.push_back(v * pi / 4);
            epsilon.push_back(6.0 * v);
        }
        out.push_back(make(Mode::Simulate, "method1", 1.0, 1.5, 1.0, SelectionPolicy::all_transmit(),
                           SweepAxis::LambdaR, {1.5}, scale, 100, 400));
        out.push_back(make(Mode::Simulate, "method2", 1.0, 1.5, 1.0, SelectionPolicy::rss_thinning(0.0),
                           SweepAxis::Delta, x, scale, 100, 400));
        out.push_back(make(Mode::Simulate, "method3", 1.0, 1.5, 1.0, SelectionPolicy::sectorized(pi),
                           SweepAxis::Theta, theta, scale, 100, 400));
        out.push_back(make(Mode::Simulate, "method4", 1.0, 1.5, 1.0, SelectionPolicy::distance_thinning(0.0),
                           SweepAxis::Epsilon, epsilon, scale, 100, 400));
    } else {
        throw ParameterError("preset: unknown name '" + name + "' (fig1, fig2, fig3)");
    }
    return out;
}

}  // namespace twohop
