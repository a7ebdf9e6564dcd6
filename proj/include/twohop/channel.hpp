#pragma once

// Rayleigh block fading, SIR and decoding for one time slot.

#include <cmath>
#include <cstdint>
#include <span>

#include "twohop/geometry.hpp"
#include "twohop/random.hpp"

namespace twohop {

enum class NodeKind : std::uint8_t { Source = 0, Relay = 1, Destination = 2 };

struct NodeId {
    NodeKind kind = NodeKind::Source;
    std::uint32_t index = 0;

    std::uint64_t key() const noexcept {
        return (static_cast<std::uint64_t>(kind) << 32) | index;
    }
    friend constexpr bool operator==(NodeId, NodeId) = default;
};

struct Node {
    NodeId id;
    Point2 position;
};

// Power fading coefficients h(tx, rx, slot) ~ Exp(1), i.i.d. over ordered
// (tx, rx, slot) triples and a pure function of them. Even slots carry the
// first hop, odd slots the second; every slot is an independent draw.
class FadingField {
public:
    explicit FadingField(std::uint64_t seed, double scale = 1.0) : seed_(seed), scale_(scale) {}

    double coefficient(NodeId tx, NodeId rx, std::uint64_t slot) const noexcept {
        return scale_ * hash_to_exponential(hash_combine({seed_, tx.key(), rx.key(), slot}));
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    double scale_;
};

struct LinkBudget {
    double signal = 0.0;        // h * g(tx - rx)
    double interference = 0.0;  // sum over the other transmitters
};

// Signal from `tx` and interference from the rest of `tx_set` at `rx`.
// Throws ContractViolation if tx is not in tx_set or rx is.
LinkBudget link_budget(NodeId tx, const Node& rx, std::span<const Node> tx_set,
                       const FadingField& fading, std::uint64_t slot, const PathLossModel& model);

// +inf when tx is the only transmitter.
double sir(NodeId tx, const Node& rx, std::span<const Node> tx_set,
           const FadingField& fading, std::uint64_t slot, const PathLossModel& model);

// SIR > T, strictly. Warns once on stderr if T <= 1.
bool connects(NodeId tx, const Node& rx, std::span<const Node> tx_set,
              const FadingField& fading, std::uint64_t slot, const PathLossModel& model, double threshold);

// Received signal strength S + I at rx. Throws ContractViolation unless
// connected_tx actually connects at threshold T.
double rss(const Node& rx, NodeId connected_tx, std::span<const Node> tx_set,
           const FadingField& fading, std::uint64_t slot, const PathLossModel& model, double threshold);

// Everything a receiver observes in one pass over the transmitters.
struct Reception {
    double total_power = 0.0;   // S + I for the strongest transmitter
    double best_signal = 0.0;
    std::size_t best_index = 0;  // index into tx_set; meaningless if tx_set is empty

    // Only the strongest transmitter can clear a threshold above one.
    bool decodes(double threshold) const noexcept {
        // colocated transmitter under the unbounded model
        if (std::isinf(best_signal)) return true;
        const double interference = total_power - best_signal;
        return best_signal > threshold * interference;
    }
};

Reception observe(const Node& rx, std::span<const Node> tx_set, const FadingField& fading,
                  std::uint64_t slot, const PathLossModel& model) noexcept;

}  // namespace twohop
