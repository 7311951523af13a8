#include "wban/invariants.hpp"

#include <algorithm>

namespace wban {

InvariantChecker::InvariantChecker(const SimConfig& config, bool strict)
    : config_(config), strict_(strict), iaa_(config.scheme == Scheme::Iaa)
{
}

void InvariantChecker::fail(Time at, const std::string& what)
{
    std::string msg = "t=" + std::to_string(at.count()) + "ns frame " + std::to_string(frame_.frame) + ": " + what;
    violations_.push_back(msg);
    if (strict_) {
        throw InvariantViolation(msg);
    }
}

void InvariantChecker::on_event(const TraceEvent& e)
{
    ++events_checked_;
    const Time at = event_time(e);
    if (at < last_time_) {
        fail(at, "clock went backwards from " + std::to_string(last_time_.count()) + "ns");
    }
    last_time_ = at;
    std::visit([this](const auto& ev) { check(ev); }, e);
}

void InvariantChecker::check(const FrameStartEvent& e)
{
    if (in_frame_) {
        fail(e.at, "frame start without the previous frame ending");
    }
    frame_ = e;
    in_frame_ = true;
    decoded_.clear();
    collisions_.clear();
    delivered_this_frame_.clear();

    std::set<NodeId> unique(e.fixed_slots.begin(), e.fixed_slots.end());
    if (unique.size() != e.fixed_slots.size()) {
        fail(e.at, "a node holds two fixed slots");
    }
    if (!iaa_) {
        if (!e.fixed_slots.empty() || e.flexible_slots != 0) {
            fail(e.at, "contention-only scheme announced TDMA slots");
        }
        return;
    }
    if (!e.fixed_slots.empty() && e.flexible_slots < 1) {
        fail(e.at, "p > m violated: " + std::to_string(e.fixed_slots.size()) + " fixed slots and no flexible slot");
    }
    if (!std::is_sorted(e.fixed_slots.begin(), e.fixed_slots.end())) {
        fail(e.at, "fixed slots not in ascending id order");
    }
    std::set<NodeId> expected;
    for (const auto& f : delivery_history_) expected.insert(f.begin(), f.end());
    if (expected != unique) {
        fail(e.at, "fixed part differs from relays heard in the last three frames");
    }
}

void InvariantChecker::check(const PhaseEvent&) {}

void InvariantChecker::check(const SenseEvent& e)
{
    if (!iaa_ && e.channel.is_reserved()) {
        fail(e.at, "single-channel scheme sensed a reserved channel");
    }
}

void InvariantChecker::check(const TxStartEvent& e)
{
    if (!in_frame_) {
        fail(e.at, "transmission outside any frame");
        return;
    }
    open_tx_[e.id] = TxInfo{e.node, e.role, e.kind, e.period};
    if (e.end > frame_.frame_end) {
        fail(e.at, "transmission " + std::to_string(e.id) + " runs past the end of the frame");
    }
    if (!iaa_) {
        if (e.channel.is_reserved()) {
            fail(e.at, "single-channel scheme transmitted on " + to_string(e.channel));
        }
        if (config_.scheme == Scheme::Pc && e.kind == TxKind::Data &&
            (e.power_dbm < config_.pc_min_dbm || e.power_dbm > config_.pc_max_dbm)) {
            fail(e.at, "power " + format_double(e.power_dbm) + " dBm outside the control bounds");
        }
        if (e.kind == TxKind::Data && (e.at < frame_.cap1a_start || e.end > frame_.cap1a_end)) {
            fail(e.at, "data transmission leaves the contention period");
        }
        return;
    }

    if (e.kind != TxKind::Data) {
        return;
    }
    if (e.role == Role::Source) {
        switch (e.period) {
        case Period::Cap1a:
            if (!e.channel.is_base() || e.at < frame_.cap1a_start || e.end > frame_.cap1a_end) {
                fail(e.at, "case-1 transmission not contained in CAP-1A on base");
            }
            break;
        case Period::Cap1b:
            if (!e.channel.is_base() || e.at < frame_.cap1a_end || e.end > frame_.cap1b_end) {
                fail(e.at, "case-2 transmission not contained in CAP-1B on base");
            }
            break;
        case Period::Cap2:
            if (!e.channel.is_reserved() || e.at < frame_.cap1b_end || e.end > frame_.cap2_end) {
                fail(e.at, "case-3 transmission not contained in CAP-2 on a reserved channel");
            }
            break;
        default: fail(e.at, "source data outside the contention periods");
        }
    } else if (e.role == Role::Relay) {
        if (e.period != Period::Tdma || e.slot < 0) {
            fail(e.at, "relay data outside the TDMA part");
            return;
        }
        const auto slot = static_cast<std::uint32_t>(e.slot);
        const Time s = frame_.cap2_end + frame_.slot_duration * slot;
        if (e.at < s || e.end > s + frame_.slot_duration) {
            fail(e.at, "relay burst spills out of slot " + std::to_string(slot));
        }
        if (slot < frame_.fixed_slots.size()) {
            if (frame_.fixed_slots[slot] != e.node) {
                fail(e.at, "relay " + std::to_string(e.node.value) + " used fixed slot of another node");
            }
        } else if (std::find(frame_.fixed_slots.begin(), frame_.fixed_slots.end(), e.node) !=
                   frame_.fixed_slots.end()) {
            fail(e.at, "relay with a fixed slot contended for a flexible one");
        } else if (slot >= frame_.fixed_slots.size() + frame_.flexible_slots) {
            fail(e.at, "slot index beyond the announced schedule");
        }
    }
}

void InvariantChecker::check(const TxEndEvent& e)
{
    auto it = open_tx_.find(e.id);
    if (it == open_tx_.end()) {
        fail(e.at, "end of unknown transmission " + std::to_string(e.id));
        return;
    }
    const TxInfo info = it->second;
    open_tx_.erase(it);
    if (e.decoded && info.role == Role::Source && info.kind == TxKind::Data) {
        decoded_[info.node.value].push_back(info.period);
    }
    if (e.decoded && !e.attempt) {
        fail(e.at, "decoded a transmission its receiver never locked on");
    }
}

void InvariantChecker::check(const CollisionEvent& e) { collisions_.insert({e.channel, e.period}); }

void InvariantChecker::check(const JamEvent& e)
{
    if (!iaa_) {
        fail(e.at, "jam signal in a scheme without collision signalling");
    }
    if (!collisions_.count({e.channel, e.period})) {
        fail(e.at, "jam on " + to_string(e.channel) + " without a preceding collision in the same period");
    }
}

void InvariantChecker::check(const DeliveryEvent& e) { delivered_this_frame_.insert(e.relay); }

void InvariantChecker::check(const FrameEndEvent& e)
{
    if (!in_frame_ || e.frame != frame_.frame) {
        fail(e.at, "frame end does not match an open frame");
    }
    in_frame_ = false;
    ++frames_checked_;

    if (!open_tx_.empty()) {
        fail(e.at, std::to_string(open_tx_.size()) + " transmissions still open at frame end");
        open_tx_.clear();
    }

    // Case partition.
    std::set<NodeId> pending(frame_.pending.begin(), frame_.pending.end());
    std::set<NodeId> reported;
    for (const auto& [node, outcome] : e.outcomes) {
        if (!reported.insert(node).second) {
            fail(e.at, "source " + std::to_string(node.value) + " reported two outcomes");
        }
        if (!pending.count(node)) {
            fail(e.at, "source " + std::to_string(node.value) + " has an outcome but no pending data");
        }
        const auto it = decoded_.find(node.value);
        const std::size_t n = it == decoded_.end() ? 0 : it->second.size();
        const bool delivered = outcome == Outcome::Case1 || outcome == Outcome::Case2 ||
                               outcome == Outcome::Case3 || outcome == Outcome::Delivered;
        if (delivered != (n == 1) || n > 1) {
            fail(e.at, "source " + std::to_string(node.value) + " outcome " + to_string(outcome) + " with " +
                           std::to_string(n) + " delivered transmissions");
            continue;
        }
        if (iaa_ && n == 1) {
            const Period p = it->second.front();
            const Outcome expect = p == Period::Cap1a ? Outcome::Case1 : p == Period::Cap1b ? Outcome::Case2 : Outcome::Case3;
            if (outcome != expect) {
                fail(e.at, "source " + std::to_string(node.value) + " reported " + to_string(outcome) +
                               " but delivered in " + to_string(p));
            }
        }
        if (iaa_ && (outcome == Outcome::Delivered || outcome == Outcome::Failed)) {
            fail(e.at, "IAA source reported a baseline outcome");
        }
        if (!iaa_ && outcome != Outcome::Delivered && outcome != Outcome::Failed) {
            fail(e.at, "baseline source reported an IAA case");
        }
    }
    if (reported != pending) {
        fail(e.at, "not every pending source reported exactly one outcome");
    }

    for (const auto& [node, ch] : e.channels) {
        if (!ch.is_base()) {
            fail(e.at, "node " + std::to_string(node.value) + " ended the frame on " + to_string(ch));
        }
    }

    if (!(e.max_energy_error <= kEnergyTolerance)) {
        fail(e.at, "energy ledger off by " + format_double(e.max_energy_error) + " (relative)");
    }

    delivery_history_.push_back(delivered_this_frame_);
    if (delivery_history_.size() > 3) {
        delivery_history_.erase(delivery_history_.begin());
    }
}

}  // namespace wban
