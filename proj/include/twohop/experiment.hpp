#pragma once

// Parameter sweeps over the simulator and the analytic engine, with CSV
// output and the figure presets.

#include <atomic>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twohop/analytic.hpp"
#include "twohop/simulator.hpp"

namespace twohop {

enum class Mode { Simulate, Analytic, Both };
enum class SweepAxis { LambdaR, Delta, Theta, Epsilon, LinkDistance };

std::string to_string(Mode mode);
std::string to_string(SweepAxis axis);
Mode parse_mode(const std::string& name);
SweepAxis parse_sweep_axis(const std::string& name);

// Process exit status of the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int budget_exhausted = 3;
inline constexpr int empty_measurement = 4;
inline constexpr int runtime_error = 5;
inline constexpr int interrupted = 130;
}  // namespace exit_code

struct ExperimentSpec {
    Mode mode = Mode::Simulate;
    std::string label;        // series name written to every row
    SimulationConfig base;    // also supplies the analytic inputs; master_seed is the seed
    QuadratureConfig quad;
    OwnCluster own_cluster = OwnCluster::Directional;
    SweepAxis axis = SweepAxis::LambdaR;
    std::vector<double> values;

    // Throws ParameterError naming the offending field. Every sweep point is
    // checked against the domain of its axis.
    void validate() const;

    // The configuration of one sweep point. Every point runs with the same
    // master seed, so neighbouring points share their random deployments.
    SimulationConfig point_config(std::size_t i) const;
    AnalyticInputs point_inputs(std::size_t i) const;
};

struct ResultRow {
    std::string label;
    Mode mode = Mode::Simulate;
    SimulationConfig config;  // the point's full parameter set
    SweepAxis axis = SweepAxis::LambdaR;
    double sweep_value = 0.0;
    // delta, 4 theta / pi or epsilon / 6 for the policy axes; the raw value otherwise
    double x_normalized = 0.0;
    std::optional<EstimateRecord> simulated;
    std::optional<AnalyticEstimate> analytic;
    std::optional<double> gap;  // |Ps simulated - Ps analytic|, mode both only
    double wall_seconds = 0.0;
};

// Column names for a mode; the same list for every run in that mode.
std::vector<std::string> csv_columns(Mode mode);
void write_csv_header(std::ostream& out, Mode mode);
// Numbers with 6 significant digits; absent fields empty.
void write_csv_row(std::ostream& out, const ResultRow& row);

// Stop flag polled between sweep points; safe to set from a signal handler.
std::atomic<bool>& stop_requested();

struct RunOptions {
    std::string output;                // CSV path; "-" for stdout, empty writes nothing
    std::ostream* progress = nullptr;  // one line per finished point
};

// Thrown when stop_requested() was set mid-sweep. The rows finished so far
// are already in the output file.
struct Interrupted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs every spec in order and writes them to a single CSV; all specs must
// share one mode. Rows are written in sweep order as they complete, so an
// exception leaves a valid partial file behind. Analytic points run
// concurrently on the worker pool; simulated points run one at a time with
// their trials spread over the pool.
std::vector<ResultRow> run_experiments(const std::vector<ExperimentSpec>& specs, const RunOptions& options = {});
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

struct Comparison {
    std::vector<ResultRow> rows;
    double max_gap = 0.0;
};

// Fills the gap column of mode-both rows and finds the largest gap.
Comparison compare_modes(std::vector<ResultRow> rows);

// Config files are JSON objects with the sections
//   mode, label, output,
//   network  { lambda_s, lambda_r, R, T, alpha, bounded_path_loss }
//   window   { half_width, margin }
//   policy   { name, parameter }
//   simulation { trials, seed }
//   analytic { rel_tol, pipeline_rel_tol, radial_nodes, max_radial_nodes,
//              max_evaluations, own_cluster }
//   sweep    { axis, values }
// Every key is optional and unknown keys are rejected.
// Throws ParameterError naming the offending key. The output path, if
// present, goes to *output.
ExperimentSpec spec_from_json(const std::string& text, std::string* output = nullptr);
std::string spec_to_json(const ExperimentSpec& spec);

enum class Scale { Desk, Paper };

// Named recipes: fig1 (Method 3 against the centre baseline for two link
// lengths), fig2 (Method 3 simulation against analysis over lambda_r) and
// fig3 (Methods 1-4 over their normalized parameter).
std::vector<ExperimentSpec> preset(const std::string& name, Scale scale);
std::vector<std::string> preset_names();

}  // namespace twohop
