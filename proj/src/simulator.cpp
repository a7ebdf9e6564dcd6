#include "twohop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <random>
#include <thread>

#include "twohop/channel.hpp"
#include "twohop/errors.hpp"
#include "twohop/parallel.hpp"
#include "twohop/random.hpp"

namespace twohop {

void SimulationConfig::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(lambda_s)) throw ParameterError("lambda_s must be finite and >= 0");
    if (!finite_nonneg(lambda_r)) throw ParameterError("lambda_r must be finite and >= 0");
    if (!(std::isfinite(link_distance) && link_distance > 0.0)) throw ParameterError("R must be positive");
    if (!(std::isfinite(threshold) && threshold > 0.0)) throw ParameterError("T must be positive");
    if (n_trials < 1) throw ParameterError("n_trials must be at least 1");
    if (threshold <= 1.0)
        std::cerr << "warning: T=" << threshold << " <= 1, decode sets may overlap\n";
}

NetworkRealization sample_realization(const SimulationConfig& config, std::uint64_t trial_index) {
    const std::uint64_t trial_seed = derive_seed(config.master_seed, Stream::Trial, trial_index);
    NetworkRealization net;
    net.link_distance = config.link_distance;
    net.sources = sample_ppp(config.lambda_s, config.window, derive_seed(trial_seed, Stream::SourceProcess));
    net.relays = sample_ppp(config.lambda_r, config.window, derive_seed(trial_seed, Stream::RelayProcess));
    net.fading_seed = derive_seed(trial_seed, Stream::Fading);

    std::mt19937_64 rng(derive_seed(trial_seed, Stream::DestinationAngles));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    net.dest_angles.resize(net.sources.points.size());
    for (double& a : net.dest_angles) a = angle(rng);
    return net;
}

TrialRecord run_trial(const SimulationConfig& config, std::uint64_t trial_index) {
    TrialRecord record = run_frame(config, sample_realization(config, trial_index));
    record.trial_index = trial_index;
    return record;
}

TrialRecord run_frame(const SimulationConfig& config, NetworkRealization net) {
    if (config.policy.kind() == PolicyKind::CenterBaseline) net = center_baseline_realization(net);

    const FadingField fading(net.fading_seed);
    const PathLossModel& model = config.path_loss;
    const double T = config.threshold;
    const auto& src = net.sources.points;

    std::vector<Node> sources;
    sources.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i)
        sources.push_back({{NodeKind::Source, static_cast<std::uint32_t>(i)}, src[i]});

    // slot 0
    const auto clusters = decode_sets(net, fading, T, model);

    std::vector<std::vector<DecodeRecord>> selected(src.size());
    std::vector<Node> psi;
    std::vector<std::uint32_t> psi_owner;
    for (std::size_t i = 0; i < src.size(); ++i) {
        selected[i] = select(config.policy, src[i], net.destination(i), clusters[i], T);
        for (const DecodeRecord& r : selected[i]) {
            psi.push_back({r.relay_id, r.relay});
            psi_owner.push_back(static_cast<std::uint32_t>(i));
        }
    }

    TrialRecord record;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (!config.window.in_measurement_region(src[i])) continue;
        const Node dest{{NodeKind::Destination, static_cast<std::uint32_t>(i)}, net.destination(i)};

        SourceOutcome out;
        out.source_index = static_cast<std::uint32_t>(i);
        const Reception first = observe(dest, sources, fading, 0, model);
        out.direct_success = first.decodes(T) && first.best_index == i;

        // slot 1: all of psi interferes, including x's own other relays
        if (!selected[i].empty()) {
            const Reception second = observe(dest, psi, fading, 1, model);
            out.twohop_success = second.decodes(T) && psi_owner[second.best_index] == i;
        }
        out.joint_success = out.direct_success || out.twohop_success;
        out.decode_set_size = static_cast<std::uint32_t>(clusters[i].size());
        out.transmitters.reserve(selected[i].size());
        for (const DecodeRecord& r : selected[i]) out.transmitters.push_back(r.relay_id.index);
        std::sort(out.transmitters.begin(), out.transmitters.end());
        record.sources.push_back(std::move(out));
    }
    return record;
}

unsigned worker_count() {
    if (const char* env = std::getenv("TWOHOP_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct TrialSums {
    double n = 0, direct = 0, twohop = 0, joint = 0, cluster = 0;
};

TrialSums summarize(const TrialRecord& t) {
    TrialSums s;
    for (const SourceOutcome& o : t.sources) {
        s.n += 1;
        s.direct += o.direct_success;
        s.twohop += o.twohop_success;
        s.joint += o.joint_success;
        s.cluster += static_cast<double>(o.transmitters.size());
    }
    return s;
}

EstimateRecord aggregate_sums(const std::vector<TrialSums>& sums) {
    EstimateRecord e;
    e.n_trials = sums.size();
    double n = 0, d = 0, h = 0, j = 0, c = 0;
    for (const TrialSums& s : sums) {
        n += s.n;
        d += s.direct;
        h += s.twohop;
        j += s.joint;
        c += s.cluster;
    }
    if (n == 0) throw EstimationError("no source fell inside the measurement region in any trial; "
                                      "increase lambda_s, the window, or the trial count");
    e.n_sources_measured = static_cast<std::uint64_t>(n);
    e.p1 = d / n;
    e.p2 = h / n;
    e.ps_joint = j / n;
    e.ps_composed = 1.0 - (1.0 - e.p1) * (1.0 - e.p2);
    e.mean_cluster_size = c / n;

    // ratio-estimator variance with trials as clusters
    const double k = static_cast<double>(sums.size());
    if (k > 1) {
        double v1 = 0, v2 = 0, vj = 0, vc = 0, vs = 0;
        for (const TrialSums& s : sums) {
            const double r1 = s.direct - e.p1 * s.n;
            const double r2 = s.twohop - e.p2 * s.n;
            const double rs = (1.0 - e.p2) * r1 + (1.0 - e.p1) * r2;
            v1 += r1 * r1;
            v2 += r2 * r2;
            vs += rs * rs;
            vj += (s.joint - e.ps_joint * s.n) * (s.joint - e.ps_joint * s.n);
            vc += (s.cluster - e.mean_cluster_size * s.n) * (s.cluster - e.mean_cluster_size * s.n);
        }
        const double f = k / (k - 1.0);
        e.se_p1 = std::sqrt(f * v1) / n;
        e.se_p2 = std::sqrt(f * v2) / n;
        e.se_ps_composed = std::sqrt(f * vs) / n;
        e.se_ps_joint = std::sqrt(f * vj) / n;
        e.se_cluster_size = std::sqrt(f * vc) / n;
    }
    return e;
}

}  // namespace

EstimateRecord aggregate(const std::vector<TrialRecord>& trials) {
    std::vector<TrialSums> sums;
    sums.reserve(trials.size());
    for (const TrialRecord& t : trials) sums.push_back(summarize(t));
    return aggregate_sums(sums);
}

EstimateRecord estimate(const SimulationConfig& config) {
    config.validate();
    std::vector<TrialSums> sums(config.n_trials);
    parallel_for(config.n_trials, [&](std::uint64_t t) { sums[t] = summarize(run_trial(config, t)); });
    return aggregate_sums(sums);
}

DensityProfile measure_cluster_density(double lambda_s, double lambda_r, double threshold,
                                       const PathLossModel& model, const Window& window,
                                       const std::vector<double>& bin_edges,
                                       std::uint64_t n_realizations, std::uint64_t seed) {
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end()) || bin_edges.front() < 0.0)
        throw ParameterError("bin edges must be sorted, non-negative and at least two");
    if (n_realizations < 2) throw ParameterError("need at least two realizations");

    const std::size_t nbins = bin_edges.size() - 1;
    const Window relay_window(bin_edges.back(), 0.0);
    std::vector<std::vector<double>> counts(n_realizations, std::vector<double>(nbins, 0.0));

    parallel_for(n_realizations, [&](std::uint64_t k) {
        const std::uint64_t s = derive_seed(seed, Stream::Trial, k);
        std::vector<Node> tx{{{NodeKind::Source, 0}, {0.0, 0.0}}};
        const PppSample others = sample_ppp(lambda_s, window, derive_seed(s, Stream::SourceProcess));
        for (std::size_t i = 0; i < others.points.size(); ++i)
            tx.push_back({{NodeKind::Source, static_cast<std::uint32_t>(i + 1)}, others.points[i]});
        const PppSample relays = sample_ppp(lambda_r, relay_window, derive_seed(s, Stream::RelayProcess));
        const FadingField fading(derive_seed(s, Stream::Fading));

        for (std::size_t j = 0; j < relays.points.size(); ++j) {
            const double r = norm(relays.points[j]);
            const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), r);
            if (it == bin_edges.begin() || it == bin_edges.end()) continue;
            const Node rx{{NodeKind::Relay, static_cast<std::uint32_t>(j)}, relays.points[j]};
            const Reception rec = observe(rx, tx, fading, 0, model);
            if (rec.decodes(threshold) && rec.best_index == 0)
                counts[k][static_cast<std::size_t>(it - bin_edges.begin()) - 1] += 1.0;
        }
    });

    DensityProfile out;
    out.bin_edges = bin_edges;
    const double n = static_cast<double>(n_realizations);
    for (std::size_t b = 0; b < nbins; ++b) {
        const double area = std::numbers::pi * (bin_edges[b + 1] * bin_edges[b + 1] - bin_edges[b] * bin_edges[b]);
        double mean = 0, sq = 0;
        for (const auto& c : counts) mean += c[b];
        mean /= n;
        for (const auto& c : counts) sq += (c[b] - mean) * (c[b] - mean);
        out.density.push_back(mean / area);
        out.standard_error.push_back(std::sqrt(sq / (n - 1.0) / n) / area);
    }
    return out;
}

}  // namespace twohop
