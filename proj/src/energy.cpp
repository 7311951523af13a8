#include "wban/energy.hpp"

#include <algorithm>
#include <cmath>

namespace wban {

const char* to_string(RadioState state)
{
    switch (state) {
    case RadioState::Tx: return "tx";
    case RadioState::Rx: return "rx";
    case RadioState::Listen: return "listen";
    case RadioState::Idle: return "idle";
    case RadioState::Sleep: return "sleep";
    }
    return "?";
}

double PowerDraws::for_state(RadioState s) const
{
    switch (s) {
    case RadioState::Tx: return tx_mw;
    case RadioState::Rx: return rx_mw;
    case RadioState::Listen: return listen_mw;
    case RadioState::Idle: return idle_mw;
    case RadioState::Sleep: return sleep_mw;
    }
    return 0.0;
}

EnergyLedger::EnergyLedger(std::size_t node_count, double initial_joules) : entries_(node_count)
{
    for (std::size_t i = 0; i < node_count; ++i) {
        set_initial(NodeId{static_cast<std::uint32_t>(i)}, initial_joules);
    }
}

void EnergyLedger::set_initial(NodeId node, double joules, bool battery_powered)
{
    if (!(std::isfinite(joules) && joules >= 0.0)) {
        throw ConfigError("initial_energy_j: must be finite and non-negative");
    }
    auto& e = entries_.at(node.value);
    e = Entry{};
    e.initial = joules;
    e.remaining.add(joules);
    e.battery = battery_powered;
    e.dead = battery_powered && joules <= 0.0;
}

double EnergyLedger::spend(NodeId node, RadioState state, Time duration, double draw_watts)
{
    if (duration < Time::zero()) {
        throw std::logic_error("spend_energy: negative duration for node " + std::to_string(node.value));
    }
    if (!(std::isfinite(draw_watts) && draw_watts >= 0.0)) {
        throw std::logic_error("spend_energy: invalid power draw");
    }
    auto& e = entries_.at(node.value);
    if (e.dead || duration == Time::zero()) {
        return 0.0;
    }
    double joules = draw_watts * to_seconds(duration);
    if (!e.battery) {
        e.cumulative[static_cast<std::size_t>(state)].add(joules);
        e.remaining.add(-joules);
        return joules;
    }
    const double left = e.remaining.value();
    if (joules >= left) {
        joules = left;
        e.dead = true;
    }
    e.cumulative[static_cast<std::size_t>(state)].add(joules);
    if (e.dead) {
        // Pin to exactly zero rather than leaving compensated residue.
        e.remaining = CompensatedSum{};
    } else {
        e.remaining.add(-joules);
    }
    return joules;
}

double EnergyLedger::cumulative(NodeId node, RadioState state) const
{
    return entries_.at(node.value).cumulative[static_cast<std::size_t>(state)].value();
}

double EnergyLedger::total_spent(NodeId node) const
{
    CompensatedSum s;
    for (const auto& c : entries_.at(node.value).cumulative) {
        s.add(c.value());
    }
    return s.value();
}

double EnergyLedger::conservation_error(NodeId node) const
{
    const auto& e = entries_.at(node.value);
    const double gap = std::abs(e.initial - e.remaining.value() - total_spent(node));
    return e.initial > 0.0 ? gap / e.initial : gap;
}

double EnergyLedger::energy_residue() const
{
    CompensatedSum s;
    for (const auto& e : entries_) {
        if (e.battery) {
            s.add(e.remaining.value());
        }
    }
    return s.value();
}

}  // namespace wban
