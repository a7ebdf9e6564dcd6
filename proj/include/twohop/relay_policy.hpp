#pragma once

// First-hop decode sets and the decentralized relay selection rules.

#include <string>
#include <variant>
#include <vector>

#include "twohop/channel.hpp"
#include "twohop/geometry.hpp"

namespace twohop {

namespace policy {
// Method 1: every relay that decoded forwards.
struct AllTransmit {};
// Method 2: forward with probability exp(-delta * RSS / (1 + T)).
struct RssThinning {
    double delta = 0.0;
};
// Method 3: forward iff the angle at the source between relay and
// destination is below theta (half-aperture; total sector is 2*theta).
struct Sectorized {
    double theta = 0.0;
};
// Method 4: forward with probability exp(-2 * epsilon * |y - r(x)| / R).
struct DistanceThinning {
    double epsilon = 0.0;
};
// One relay per pair at the source/destination midpoint.
struct CenterBaseline {};
}  // namespace policy

enum class PolicyKind { AllTransmit, RssThinning, Sectorized, DistanceThinning, CenterBaseline };

class SelectionPolicy {
public:
    using Variant = std::variant<policy::AllTransmit, policy::RssThinning, policy::Sectorized,
                                 policy::DistanceThinning, policy::CenterBaseline>;

    SelectionPolicy() = default;
    // Throws ParameterError for delta < 0, epsilon < 0 or theta outside [0, pi].
    SelectionPolicy(Variant v);  // NOLINT(google-explicit-constructor)

    static SelectionPolicy all_transmit() { return {policy::AllTransmit{}}; }
    static SelectionPolicy rss_thinning(double delta) { return {policy::RssThinning{delta}}; }
    static SelectionPolicy sectorized(double theta) { return {policy::Sectorized{theta}}; }
    static SelectionPolicy distance_thinning(double epsilon) { return {policy::DistanceThinning{epsilon}}; }
    static SelectionPolicy center_baseline() { return {policy::CenterBaseline{}}; }

    PolicyKind kind() const noexcept { return static_cast<PolicyKind>(v_.index()); }
    const Variant& variant() const noexcept { return v_; }

    // The single tunable parameter (delta, theta or epsilon); 0 otherwise.
    double parameter() const noexcept;
    SelectionPolicy with_parameter(double value) const;

private:
    Variant v_{policy::AllTransmit{}};
};

// "method1".."method4", "center".
std::string to_string(PolicyKind kind);
// Accepts the names above plus "all", "rss", "sector", "distance".
PolicyKind parse_policy_kind(const std::string& name);

struct DecodeRecord {
    NodeId relay_id;
    Point2 relay;
    Point2 source;
    double rss_value = 0.0;
    double thinning_uniform = 0.0;  // U_y, bound to the relay's identity
};

// The relay's thinning uniform; depends only on the seed and relay index.
double thinning_uniform(std::uint64_t fading_seed, std::uint32_t relay_index) noexcept;

// Slot 0 with every source transmitting. Entry i lists the relays that
// decode source i. Sets are disjoint when T > 1.
std::vector<std::vector<DecodeRecord>> decode_sets(const NetworkRealization& realization,
                                                   const FadingField& fading, double threshold,
                                                   const PathLossModel& model);

// Second-hop transmit set N_x drawn from source x's own decode records.
// CenterBaseline keeps only the record of the midpoint relay.
std::vector<DecodeRecord> select(const SelectionPolicy& policy, Point2 source, Point2 dest,
                                 const std::vector<DecodeRecord>& records, double threshold);

// Replaces the relay field by one relay per source at (source + dest) / 2.
// Relay i serves source i.
NetworkRealization center_baseline_realization(const NetworkRealization& realization);

}  // namespace twohop
