#include "twohop/relay_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twohop/errors.hpp"
#include "twohop/random.hpp"

namespace twohop {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Absolute angle in [0, pi] between two vectors.
double angle_between(Point2 a, Point2 b) noexcept {
    const double cross = a.x * b.y - a.y * b.x;
    const double dot = a.x * b.x + a.y * b.y;
    return std::abs(std::atan2(cross, dot));
}

}  // namespace

SelectionPolicy::SelectionPolicy(Variant v) : v_(v) {
    std::visit(overloaded{
                   [](const policy::RssThinning& p) {
                       if (!(p.delta >= 0.0 && std::isfinite(p.delta)))
                           throw ParameterError("delta must be a finite non-negative number");
                   },
                   [](const policy::Sectorized& p) {
                       if (!(p.theta >= 0.0 && p.theta <= std::numbers::pi))
                           throw ParameterError("theta must lie in [0, pi]");
                   },
                   [](const policy::DistanceThinning& p) {
                       if (!(p.epsilon >= 0.0 && std::isfinite(p.epsilon)))
                           throw ParameterError("epsilon must be a finite non-negative number");
                   },
                   [](const auto&) {},
               },
               v_);
}

double SelectionPolicy::parameter() const noexcept {
    return std::visit(overloaded{
                          [](const policy::RssThinning& p) { return p.delta; },
                          [](const policy::Sectorized& p) { return p.theta; },
                          [](const policy::DistanceThinning& p) { return p.epsilon; },
                          [](const auto&) { return 0.0; },
                      },
                      v_);
}

SelectionPolicy SelectionPolicy::with_parameter(double value) const {
    return std::visit(overloaded{
                          [&](const policy::RssThinning&) { return rss_thinning(value); },
                          [&](const policy::Sectorized&) { return sectorized(value); },
                          [&](const policy::DistanceThinning&) { return distance_thinning(value); },
                          [&](const auto&) { return *this; },
                      },
                      v_);
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::AllTransmit: return "method1";
        case PolicyKind::RssThinning: return "method2";
        case PolicyKind::Sectorized: return "method3";
        case PolicyKind::DistanceThinning: return "method4";
        case PolicyKind::CenterBaseline: return "center";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
    if (name == "method1" || name == "all") return PolicyKind::AllTransmit;
    if (name == "method2" || name == "rss") return PolicyKind::RssThinning;
    if (name == "method3" || name == "sector") return PolicyKind::Sectorized;
    if (name == "method4" || name == "distance") return PolicyKind::DistanceThinning;
    if (name == "center") return PolicyKind::CenterBaseline;
    throw ParameterError("unknown policy '" + name + "'");
}

double thinning_uniform(std::uint64_t fading_seed, std::uint32_t relay_index) noexcept {
    return hash_to_unit(hash_combine({fading_seed, static_cast<std::uint64_t>(Stream::Thinning), relay_index}));
}

std::vector<std::vector<DecodeRecord>> decode_sets(const NetworkRealization& realization,
                                                   const FadingField& fading, double threshold,
                                                   const PathLossModel& model) {
    const auto& src = realization.sources.points;
    std::vector<Node> tx_set;
    tx_set.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i)
        tx_set.push_back({{NodeKind::Source, static_cast<std::uint32_t>(i)}, src[i]});

    std::vector<std::vector<DecodeRecord>> sets(src.size());
    if (tx_set.empty()) return sets;

    const auto& relays = realization.relays.points;
    for (std::size_t j = 0; j < relays.size(); ++j) {
        const Node rx{{NodeKind::Relay, static_cast<std::uint32_t>(j)}, relays[j]};
        const Reception r = observe(rx, tx_set, fading, 0, model);
        if (!r.decodes(threshold)) continue;
        sets[r.best_index].push_back({rx.id, rx.position, src[r.best_index], r.total_power,
                                      thinning_uniform(realization.fading_seed, rx.id.index)});
    }
    return sets;
}

std::vector<DecodeRecord> select(const SelectionPolicy& policy, Point2 source, Point2 dest,
                                 const std::vector<DecodeRecord>& records, double threshold) {
    const Point2 to_dest = dest - source;
    const double link = norm(to_dest);
    std::vector<DecodeRecord> out;

    auto keep_if = [&](auto pred) {
        std::copy_if(records.begin(), records.end(), std::back_inserter(out), pred);
    };

    std::visit(overloaded{
                   [&](const policy::AllTransmit&) { out = records; },
                   [&](const policy::RssThinning& p) {
                       if (p.delta == 0.0) {
                           out = records;
                           return;
                       }
                       keep_if([&](const DecodeRecord& r) {
                           return r.thinning_uniform < std::exp(-p.delta * r.rss_value / (1.0 + threshold));
                       });
                   },
                   [&](const policy::Sectorized& p) {
                       // a full sector keeps relays lying exactly on the back ray too
                       if (p.theta >= std::numbers::pi) {
                           out = records;
                           return;
                       }
                       keep_if([&](const DecodeRecord& r) {
                           return angle_between(r.relay - source, to_dest) < p.theta;
                       });
                   },
                   [&](const policy::DistanceThinning& p) {
                       keep_if([&](const DecodeRecord& r) {
                           return r.thinning_uniform < std::exp(-p.epsilon * 2.0 * distance(r.relay, dest) / link);
                       });
                   },
                   [&](const policy::CenterBaseline&) {
                       const Point2 mid = 0.5 * (source + dest);
                       keep_if([&](const DecodeRecord& r) { return distance(r.relay, mid) <= 1e-9 * link; });
                   },
               },
               policy.variant());
    return out;
}

NetworkRealization center_baseline_realization(const NetworkRealization& realization) {
    NetworkRealization out = realization;
    out.relays.points.clear();
    out.relays.intensity = realization.sources.intensity;
    out.relays.points.reserve(realization.sources.points.size());
    for (std::size_t i = 0; i < realization.sources.points.size(); ++i)
        out.relays.points.push_back(0.5 * (realization.sources.points[i] + realization.destination(i)));
    return out;
}

}  // namespace twohop
