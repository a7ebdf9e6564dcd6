// twohop: sweeps of the two-hop relay model, by simulation, by analysis or
// both, written as CSV.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "twohop/errors.hpp"
#include "twohop/experiment.hpp"

using namespace twohop;

namespace {

extern "C" void on_interrupt(int) { stop_requested().store(true); }

// Command-line values that override the config file when given.
struct Overrides {
    std::optional<double> lambda_s, lambda_r, R, T, alpha, parameter, half_width, margin;
    std::optional<double> rel_tol, pipeline_tol;
    std::optional<std::uint64_t> trials, seed, max_evaluations;
    std::optional<std::string> policy, axis, own_cluster, label;
    std::vector<double> values;
    bool bounded = false;
};

void add_network_options(CLI::App* app, Overrides& o) {
    const SimulationConfig d;
    app->add_option("--lambda-s", o.lambda_s, "source intensity")->default_str(std::to_string(d.lambda_s));
    app->add_option("--lambda-r", o.lambda_r, "relay intensity")->default_str(std::to_string(d.lambda_r));
    app->add_option("-R,--link-distance", o.R, "source-destination distance")->default_str(std::to_string(d.link_distance));
    app->add_option("-T,--threshold", o.T, "SIR threshold")->default_str(std::to_string(d.threshold));
    app->add_option("--alpha", o.alpha, "path-loss exponent, > 2")->default_str("4");
    app->add_flag("--bounded", o.bounded, "use the bounded path loss min(1, d^-alpha)");
    app->add_option("--policy", o.policy, "method1|method2|method3|method4|center")->default_str("method1");
    app->add_option("--param", o.parameter, "policy parameter: delta, theta (radians) or epsilon");
    app->add_option("--half-width", o.half_width, "simulation window half-width")->default_str("15");
    app->add_option("--margin", o.margin, "guard margin inside the window")->default_str("5");
    app->add_option("--axis", o.axis, "sweep axis: lambda_r|delta|theta|epsilon|R")->default_str("lambda_r");
    app->add_option("--values", o.values, "sweep values")->delimiter(',');
    app->add_option("--label", o.label, "series label written to every row");
}

void add_run_options(CLI::App* app, Overrides& o, std::string& output, const char* trials_default = "100") {
    app->add_option("--trials", o.trials, "Monte Carlo trials per point")->default_str(trials_default);
    app->add_option("--seed", o.seed, "master seed")->default_str("1");
    app->add_option("-o,--output", output, "CSV output path, - for stdout")->capture_default_str();
    app->add_option("--rel-tol", o.rel_tol, "tolerance of single integrals")->default_str("1e-06");
    app->add_option("--pipeline-tol", o.pipeline_tol, "tolerance of the nested P2 integral")->default_str("0.001");
    app->add_option("--max-evals", o.max_evaluations, "integrand-call budget per P2 evaluation")->default_str("200000000");
    app->add_option("--own-cluster", o.own_cluster, "directional|isotropic own-cluster model")->default_str("directional");
}

void apply_run(const Overrides& o, ExperimentSpec& s) {
    if (o.trials) s.base.n_trials = *o.trials;
    if (o.seed) s.base.master_seed = *o.seed;
    if (o.rel_tol) s.quad.rel_tol = *o.rel_tol;
    if (o.pipeline_tol) s.quad.pipeline_rel_tol = *o.pipeline_tol;
    if (o.max_evaluations) s.quad.max_evaluations = *o.max_evaluations;
    if (o.own_cluster) {
        if (*o.own_cluster == "directional") s.own_cluster = OwnCluster::Directional;
        else if (*o.own_cluster == "isotropic") s.own_cluster = OwnCluster::Isotropic;
        else throw ParameterError("--own-cluster: expected directional or isotropic");
    }
}

void apply_network(const Overrides& o, ExperimentSpec& s) {
    SimulationConfig& c = s.base;
    if (o.lambda_s) c.lambda_s = *o.lambda_s;
    if (o.lambda_r) c.lambda_r = *o.lambda_r;
    if (o.R) c.link_distance = *o.R;
    if (o.T) c.threshold = *o.T;
    if (o.alpha || o.bounded) c.path_loss = PathLossModel(o.alpha.value_or(c.path_loss.alpha()), o.bounded || c.path_loss.bounded());
    if (o.half_width || o.margin) {
        const double half = o.half_width.value_or(c.window.half_width());
        c.window = o.margin ? Window(half, *o.margin) : Window(half);
    }
    if (o.policy) {
        switch (parse_policy_kind(*o.policy)) {
            case PolicyKind::AllTransmit: c.policy = SelectionPolicy::all_transmit(); break;
            case PolicyKind::RssThinning: c.policy = SelectionPolicy::rss_thinning(0.0); break;
            case PolicyKind::Sectorized: c.policy = SelectionPolicy::sectorized(std::numbers::pi); break;
            case PolicyKind::DistanceThinning: c.policy = SelectionPolicy::distance_thinning(0.0); break;
            case PolicyKind::CenterBaseline: c.policy = SelectionPolicy::center_baseline(); break;
        }
    }
    if (o.parameter) c.policy = c.policy.with_parameter(*o.parameter);
    if (o.label) s.label = *o.label;
    if (o.axis) s.axis = parse_sweep_axis(*o.axis);
    if (!o.values.empty()) s.values = o.values;
    else if (o.axis || o.lambda_r || o.R || o.parameter) {
        // no explicit sweep: one point at the configured value
        switch (s.axis) {
            case SweepAxis::LambdaR: s.values = {c.lambda_r}; break;
            case SweepAxis::LinkDistance: s.values = {c.link_distance}; break;
            default: s.values = {c.policy.parameter()}; break;
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("--config: cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::vector<ExperimentSpec>& specs, const std::string& output) {
    try {
        const auto rows = run_experiments(specs, {output, &std::cerr});
        if (specs.front().mode == Mode::Both) {
            const Comparison c = compare_modes(rows);
            (output == "-" ? std::cerr : std::cout) << "max |Ps_sim - Ps_analytic| = " << c.max_gap << " over "
                                                    << c.rows.size() << " points\n";
        }
        return exit_code::ok;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_code::config_error;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exhausted: " << e.what() << " (partial value " << e.partial_value()
                  << "); raise --max-evals or loosen --pipeline-tol\n";
        return exit_code::budget_exhausted;
    } catch (const EstimationError& e) {
        std::cerr << "empty measurement: " << e.what() << '\n';
        return exit_code::empty_measurement;
    } catch (const Interrupted& e) {
        std::cerr << "interrupted: " << e.what() << "; completed rows were kept\n";
        return exit_code::interrupted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::runtime_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-hop relay selection: Monte Carlo simulation and stochastic-geometry analysis.\n"
                 "Writes one CSV row per sweep point. Environment: TWOHOP_WORKERS caps the worker threads."};
    app.require_subcommand(1);

    Overrides o;
    std::string output = "-";
    std::string config_path;
    bool dump = false;

    std::vector<std::pair<CLI::App*, Mode>> modes;
    for (auto [name, mode, help] : {std::tuple{"simulate", Mode::Simulate, "Monte Carlo estimate at each sweep point"},
                                    std::tuple{"analytic", Mode::Analytic, "numerical evaluation of the analysis"},
                                    std::tuple{"both", Mode::Both, "both engines plus the |Ps gap| per point"}}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "JSON config file; command-line flags override it")
            ->check(CLI::ExistingFile);
        sub->add_flag("--dump-config", dump, "print the resolved config as JSON and exit");
        add_network_options(sub, o);
        add_run_options(sub, o, output);
        modes.emplace_back(sub, mode);
    }

    std::string preset_name;
    std::string scale = "desk";
    CLI::App* pre = app.add_subcommand("preset", "figure recipes: fig1, fig2, fig3");
    pre->add_option("name", preset_name, "fig1|fig2|fig3")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    pre->add_option("--scale", scale, "desk (half-width 15) or paper (half-width 30)")
        ->capture_default_str()
        ->check(CLI::IsMember({"desk", "paper"}));
    pre->add_flag("--dump-config", dump, "print the resolved configs as JSON and exit");
    add_run_options(pre, o, output, "per preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::config_error;
    }

    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);

    std::vector<ExperimentSpec> specs;
    try {
        if (pre->parsed()) {
            specs = preset(preset_name, scale == "paper" ? Scale::Paper : Scale::Desk);
            for (ExperimentSpec& s : specs) apply_run(o, s);
        } else {
            for (auto [sub, mode] : modes) {
                if (!sub->parsed()) continue;
                ExperimentSpec s;
                std::string file_output;
                if (!config_path.empty()) s = spec_from_json(read_file(config_path), &file_output);
                if (!file_output.empty() && sub->count("--output") == 0) output = file_output;
                s.mode = mode;
                apply_network(o, s);
                apply_run(o, s);
                if (s.values.empty()) s.values = {s.base.lambda_r};
                specs.push_back(s);
            }
        }
        if (dump) {
            for (const ExperimentSpec& s : specs) std::cout << spec_to_json(s) << '\n';
            return exit_code::ok;
        }
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_code::config_error;
    }
    return run(specs, output);
}
