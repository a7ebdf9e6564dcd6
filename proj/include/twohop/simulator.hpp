#pragma once

// Monte Carlo estimation of direct, two-hop and end-to-end success.

#include <cstdint>
#include <vector>

#include "twohop/geometry.hpp"
#include "twohop/relay_policy.hpp"

namespace twohop {

struct SimulationConfig {
    double lambda_s = 0.1;
    double lambda_r = 0.0;
    double link_distance = 1.0;  // R
    double threshold = 3.0;      // T
    PathLossModel path_loss{4.0, false};
    Window window{15.0, 5.0};
    SelectionPolicy policy;
    std::uint64_t n_trials = 100;
    std::uint64_t master_seed = 1;

    // Throws ParameterError on invalid values; warns on T <= 1.
    void validate() const;
};

struct SourceOutcome {
    std::uint32_t source_index = 0;
    bool direct_success = false;
    bool twohop_success = false;
    bool joint_success = false;  // direct || twohop
    std::uint32_t decode_set_size = 0;
    std::vector<std::uint32_t> transmitters;  // relay indices in N_x, ascending
};

// Outcomes for the sources inside the measurement region, in source order.
struct TrialRecord {
    std::uint64_t trial_index = 0;
    std::vector<SourceOutcome> sources;
};

struct EstimateRecord {
    double p1 = 0.0;
    double p2 = 0.0;
    double ps_composed = 0.0;  // 1 - (1 - p1)(1 - p2)
    double ps_joint = 0.0;     // empirical fraction with direct || twohop
    double se_p1 = 0.0;
    double se_p2 = 0.0;
    double se_ps_composed = 0.0;
    double se_ps_joint = 0.0;
    double mean_cluster_size = 0.0;  // mean |N_x|
    double se_cluster_size = 0.0;
    std::uint64_t n_sources_measured = 0;
    std::uint64_t n_trials = 0;

    friend bool operator==(const EstimateRecord&, const EstimateRecord&) = default;
};

// Draws the deployment of one trial. Deterministic in (master_seed, trial).
NetworkRealization sample_realization(const SimulationConfig& config, std::uint64_t trial_index);

// One two-slot frame: sources transmit in slot 0, the selected relays in
// slot 1 with fresh fading. CenterBaseline swaps in midpoint relays.
TrialRecord run_trial(const SimulationConfig& config, std::uint64_t trial_index);
// The same frame on a given deployment; trial_index is left at 0.
TrialRecord run_frame(const SimulationConfig& config, NetworkRealization realization);

// Pools trials. Standard errors treat each trial as one cluster (ratio
// estimator over per-trial sums). Throws EstimationError if no source was
// ever measured.
EstimateRecord estimate(const SimulationConfig& config);
EstimateRecord aggregate(const std::vector<TrialRecord>& trials);

// Empirical intensity of relays that decode a tagged source at the origin,
// on annuli [edges[k], edges[k+1]). Interferers are a PPP of intensity
// lambda_s on `window`; relays are sampled only out to the last edge.
struct DensityProfile {
    std::vector<double> bin_edges;
    std::vector<double> density;  // relays per unit area
    std::vector<double> standard_error;
};

DensityProfile measure_cluster_density(double lambda_s, double lambda_r, double threshold,
                                       const PathLossModel& model, const Window& window,
                                       const std::vector<double>& bin_edges,
                                       std::uint64_t n_realizations, std::uint64_t seed);

}  // namespace twohop
