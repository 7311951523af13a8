#pragma once

#include "wban/types.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace wban {

enum class RadioState : std::uint8_t { Tx, Rx, Listen, Idle, Sleep };

inline constexpr std::size_t kRadioStateCount = 5;

const char* to_string(RadioState state);

/// Radio power draws in milliwatts (CC2420-class defaults).
struct PowerDraws {
    double tx_mw = 52.2;
    double rx_mw = 56.4;
    double listen_mw = 56.4;
    double idle_mw = 1.28;
    double sleep_mw = 0.0;

    double for_state(RadioState s) const;
};

/// Running sum with Kahan compensation.
class CompensatedSum {
public:
    void add(double x)
    {
        const double y = x - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Per-node battery accounting. Nodes not marked as battery powered are
/// tracked for completeness but never counted in the energy residue.
class EnergyLedger {
public:
    EnergyLedger() = default;
    EnergyLedger(std::size_t node_count, double initial_joules);

    void set_initial(NodeId node, double joules, bool battery_powered = true);

    /// Deducts draw_watts * duration. The deduction is capped at the remaining
    /// energy; reaching zero marks the node dead. Returns the joules deducted.
    double spend(NodeId node, RadioState state, Time duration, double draw_watts);

    double initial(NodeId node) const { return entries_.at(node.value).initial; }
    double remaining(NodeId node) const { return entries_.at(node.value).remaining.value(); }
    double cumulative(NodeId node, RadioState state) const;
    double total_spent(NodeId node) const;
    bool dead(NodeId node) const { return entries_.at(node.value).dead; }
    bool battery_powered(NodeId node) const { return entries_.at(node.value).battery; }

    /// |initial - remaining - sum(cumulative)| / initial.
    double conservation_error(NodeId node) const;

    /// Sum of remaining energy over all battery powered nodes.
    double energy_residue() const;

    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        double initial = 0.0;
        CompensatedSum remaining;
        std::array<CompensatedSum, kRadioStateCount> cumulative{};
        bool dead = false;
        bool battery = true;
    };
    std::vector<Entry> entries_;
};

}  // namespace wban
