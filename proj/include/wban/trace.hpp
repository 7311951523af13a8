#pragma once

#include "wban/config.hpp"
#include "wban/radio_channel.hpp"
#include "wban/types.hpp"

#include <cstdint>
#include <deque>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wban {

enum class Period : std::uint8_t { Beacon, Cap1a, Cap1b, Cap2, Tdma };

const char* to_string(Period p);

/// How a source with pending data finished a frame. IAA sources report the
/// case they took; the baselines only know delivered or not.
enum class Outcome : std::uint8_t { None, Case1, Case2, Case3, Deferred, Delivered, Failed };

const char* to_string(Outcome o);

struct FrameStartEvent {
    Time at{0};
    std::uint64_t frame = 0;
    Time cap1a_start{0};
    Time cap1a_end{0};
    Time cap1b_end{0};
    Time cap2_end{0};
    Time frame_end{0};
    Time slot_duration{0};
    std::vector<NodeId> fixed_slots;  // slot order
    std::uint32_t flexible_slots = 0;
    std::vector<NodeId> pending;
};

struct PhaseEvent {
    Time at{0};
    NodeId node;
    const char* from = "";
    const char* to = "";
    const char* action = "";
    ChannelId channel;
};

struct SenseEvent {
    Time at{0};
    NodeId node;
    ChannelId channel;
    double delta_db = 0.0;
    bool has_receiver = false;
};

struct TxStartEvent {
    Time at{0};
    std::uint64_t id = 0;
    NodeId node;
    Role role = Role::Source;
    NodeId destination;
    ChannelId channel;
    TxKind kind = TxKind::Data;
    Time end{0};
    double power_dbm = 0.0;
    std::uint32_t packets = 0;
    Period period = Period::Cap1a;
    /// TDMA slot index, or -1 outside the TDMA part.
    std::int32_t slot = -1;
};

struct TxEndEvent {
    Time at{0};
    std::uint64_t id = 0;
    NodeId node;
    NodeId destination;
    /// The intended receiver was locked on this transmission.
    bool attempt = false;
    bool decoded = false;
    bool aborted = false;
    double min_sinr_db = 0.0;
};

struct CollisionEvent {
    Time at{0};
    std::uint64_t frame = 0;
    ChannelId channel;
    Period period = Period::Cap1a;
};

struct JamEvent {
    Time at{0};
    std::uint64_t frame = 0;
    NodeId relay;
    ChannelId channel;
    Period period = Period::Cap1a;
    Time duration{0};
};

/// Packets that reached the coordinator.
struct DeliveryEvent {
    Time at{0};
    std::uint64_t frame = 0;
    NodeId relay;
    std::uint32_t packets = 0;
};

struct FrameEndEvent {
    Time at{0};
    std::uint64_t frame = 0;
    std::vector<std::pair<NodeId, Outcome>> outcomes;  // sources in P
    std::vector<std::pair<NodeId, ChannelId>> channels;  // every source and relay
    double max_energy_error = 0.0;
    double energy_residue_j = 0.0;
};

using TraceEvent = std::variant<FrameStartEvent, PhaseEvent, SenseEvent, TxStartEvent, TxEndEvent, CollisionEvent,
                                JamEvent, DeliveryEvent, FrameEndEvent>;

Time event_time(const TraceEvent& e);

/// One JSON object per event, keys in a fixed order.
std::string to_json_line(const TraceEvent& e);

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_event(const TraceEvent& e) = 0;
};

class JsonlTraceWriter : public TraceSink {
public:
    explicit JsonlTraceWriter(std::ostream& out) : out_(out) {}
    void on_event(const TraceEvent& e) override;

private:
    std::ostream& out_;
};

/// Keeps the last few serialized events for diagnostics.
class TraceTail : public TraceSink {
public:
    explicit TraceTail(std::size_t capacity = 32) : capacity_(capacity) {}
    void on_event(const TraceEvent& e) override;
    std::string text() const;

private:
    std::size_t capacity_;
    std::deque<std::string> lines_;
};

/// Fans events out to several sinks in order.
class TraceFanout : public TraceSink {
public:
    void add(TraceSink* sink) { sinks_.push_back(sink); }
    bool empty() const { return sinks_.empty(); }
    void on_event(const TraceEvent& e) override
    {
        for (auto* s : sinks_) s->on_event(e);
    }

private:
    std::vector<TraceSink*> sinks_;
};

}  // namespace wban
