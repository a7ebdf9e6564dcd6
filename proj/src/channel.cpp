#include "twohop/channel.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>

#include "twohop/errors.hpp"

namespace twohop {
namespace {

void warn_if_not_narrowband(double threshold) {
    static std::once_flag once;
    if (threshold <= 1.0) {
        std::call_once(once, [threshold] {
            std::cerr << "warning: SIR threshold T=" << threshold
                      << " <= 1; a receiver may connect to more than one transmitter\n";
        });
    }
}

}  // namespace

LinkBudget link_budget(NodeId tx, const Node& rx, std::span<const Node> tx_set,
                       const FadingField& fading, std::uint64_t slot, const PathLossModel& model) {
    LinkBudget budget;
    bool found = false;
    for (const Node& z : tx_set) {
        if (z.id == rx.id) throw ContractViolation("receiver is part of the transmitting set");
        const double p = fading.coefficient(z.id, rx.id, slot) * model.gain_sq(squared_norm(z.position - rx.position));
        if (z.id == tx) {
            budget.signal = p;
            found = true;
        } else {
            budget.interference += p;
        }
    }
    if (!found) throw ContractViolation("transmitter is not in the transmitting set");
    return budget;
}

double sir(NodeId tx, const Node& rx, std::span<const Node> tx_set,
           const FadingField& fading, std::uint64_t slot, const PathLossModel& model) {
    const LinkBudget b = link_budget(tx, rx, tx_set, fading, slot, model);
    if (tx_set.size() == 1) return std::numeric_limits<double>::infinity();
    return b.signal / b.interference;
}

bool connects(NodeId tx, const Node& rx, std::span<const Node> tx_set,
              const FadingField& fading, std::uint64_t slot, const PathLossModel& model, double threshold) {
    warn_if_not_narrowband(threshold);
    return sir(tx, rx, tx_set, fading, slot, model) > threshold;
}

double rss(const Node& rx, NodeId connected_tx, std::span<const Node> tx_set,
           const FadingField& fading, std::uint64_t slot, const PathLossModel& model, double threshold) {
    const LinkBudget b = link_budget(connected_tx, rx, tx_set, fading, slot, model);
    const bool ok = tx_set.size() == 1 || b.signal / b.interference > threshold;
    if (!ok) throw ContractViolation("rss requested for a transmitter that does not connect");
    return b.signal + b.interference;
}

Reception observe(const Node& rx, std::span<const Node> tx_set, const FadingField& fading,
                  std::uint64_t slot, const PathLossModel& model) noexcept {
    Reception r;
    for (std::size_t i = 0; i < tx_set.size(); ++i) {
        const Node& z = tx_set[i];
        const double p = fading.coefficient(z.id, rx.id, slot) * model.gain_sq(squared_norm(z.position - rx.position));
        r.total_power += p;
        if (p > r.best_signal || i == 0) {
            r.best_signal = p;
            r.best_index = i;
        }
    }
    return r;
}

}  // namespace twohop
