#pragma once

#include "wban/config.hpp"
#include "wban/trace.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace wban {

class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Watches a trace and checks the protocol invariants against it. Everything
/// is recomputed from the events alone; nothing is read from engine state.
class InvariantChecker : public TraceSink {
public:
    /// In strict mode the first violation throws InvariantViolation.
    explicit InvariantChecker(const SimConfig& config, bool strict = false);

    void on_event(const TraceEvent& e) override;

    const std::vector<std::string>& violations() const { return violations_; }
    bool ok() const { return violations_.empty(); }
    std::uint64_t frames_checked() const { return frames_checked_; }
    std::uint64_t events_checked() const { return events_checked_; }

    static constexpr double kEnergyTolerance = 1e-12;

private:
    struct TxInfo {
        NodeId node;
        Role role = Role::Source;
        TxKind kind = TxKind::Data;
        Period period = Period::Cap1a;
    };

    void fail(Time at, const std::string& what);
    void check(const FrameStartEvent& e);
    void check(const PhaseEvent& e);
    void check(const SenseEvent& e);
    void check(const TxStartEvent& e);
    void check(const TxEndEvent& e);
    void check(const CollisionEvent& e);
    void check(const JamEvent& e);
    void check(const DeliveryEvent& e);
    void check(const FrameEndEvent& e);

    SimConfig config_;
    bool strict_;
    bool iaa_;
    std::vector<std::string> violations_;
    std::uint64_t frames_checked_ = 0;
    std::uint64_t events_checked_ = 0;

    Time last_time_{std::numeric_limits<Time::rep>::min()};
    bool in_frame_ = false;
    FrameStartEvent frame_;
    std::unordered_map<std::uint64_t, TxInfo> open_tx_;
    // Decoded source data per source in this frame, with the period used.
    std::unordered_map<std::uint32_t, std::vector<Period>> decoded_;
    std::set<std::pair<ChannelId, Period>> collisions_;
    std::set<NodeId> delivered_this_frame_;
    // Oldest first; at most three frames.
    std::vector<std::set<NodeId>> delivery_history_;
};

}  // namespace wban
