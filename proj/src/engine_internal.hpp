#pragma once

#include "wban/config.hpp"
#include "wban/energy.hpp"
#include "wban/metrics.hpp"
#include "wban/radio_channel.hpp"
#include "wban/superframe.hpp"
#include "wban/trace.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

namespace wban::detail {

struct Event {
    Time at{0};
    std::uint8_t priority = 1;  // lower runs first at equal times
    std::uint64_t seq = 0;
    std::uint16_t kind = 0;
    std::uint32_t node = 0;
    std::uint64_t aux = 0;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.at != b.at) return a.at > b.at;
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.seq > b.seq;
    }
};

/// Kinds shared by every scheme. Scheme engines number theirs from kFirstSchemeEvent.
enum CoreEvent : std::uint16_t { kFrameStart = 0, kFrameEnd, kRecord, kEnd, kRadioSet, kFirstSchemeEvent };

struct Radio {
    RadioState state = RadioState::Idle;
    double draw_mw = 0.0;
    Time since{0};
};

/// Event queue, medium, energy and metrics plumbing shared by the schemes.
class EngineCore {
public:
    EngineCore(const SimConfig& config, TraceSink* trace);
    virtual ~EngineCore() = default;

    RunResult run();

protected:
    virtual void begin_frame(Time at) = 0;
    /// Reports outcomes, builds the next beacon.
    virtual void finish_frame(Time at, FrameEndEvent& ev) = 0;
    virtual void dispatch(const Event& e) = 0;
    virtual Period period_at(Time t) const = 0;

    void schedule(Time at, std::uint16_t kind, std::uint32_t node = 0, std::uint64_t aux = 0, std::uint8_t priority = 1);

    bool tracing() const { return trace_ != nullptr; }
    void emit(TraceEvent e)
    {
        if (trace_) trace_->on_event(e);
    }

    // Radio and energy.
    void set_radio(NodeId node, RadioState state, Time at, std::optional<double> draw_mw = std::nullopt);
    void set_radio_later(NodeId node, RadioState state, Time at);
    void charge_all(Time at);
    bool alive(NodeId node) const { return !ledger_.dead(node); }
    double max_energy_error() const;

    // Medium.
    std::uint64_t start_tx(Transmission tx, Role role, std::int32_t slot = -1);
    /// Recomputes the running minimum SINR of every locked reception on `channel`.
    void update_sinr(ChannelId channel);
    /// Removes a transmission and reports it. Returns the final record.
    Transmission finish_tx(std::uint64_t id, bool decoded, bool aborted);
    double sinr_db(const Transmission& tx) const { return linear_to_db(tx.min_sinr_linear); }
    bool decodable(const Transmission& tx) const
    {
        return tx.receiver_ready && !tx.collided && sinr_db(tx) >= config_.decode_threshold_db;
    }
    double nominal_mw() const { return nominal_mw_; }

    /// Next backoff slot boundary at or after `t`, counting from `origin`.
    Time next_boundary(Time t, Time origin) const;

    void count_delivery(NodeId relay, std::uint32_t packets, Time at);

    const SimConfig config_;
    const Time slot_;
    const Time airtime_;
    const Time ack_time_;
    TraceSink* trace_;
    ChannelEnvironment env_;
    EnergyLedger ledger_;
    PowerDraws draws_;
    std::vector<Radio> radio_;
    std::vector<std::uint64_t> rx_lock_;  // tx id a node is receiving, 0 if none
    std::vector<std::uint64_t> tx_busy_;  // tx id a node is sending, 0 if none
    std::vector<Rng> node_rng_;
    std::vector<Rng> traffic_rng_;

    Superframe frame_;
    std::uint64_t frame_count_ = 0;
    Time now_{0};
    WindowStats frame_stats_;
    RunSummary summary_;
    std::uint64_t delivered_ = 0;

    /// Sources with a new packet this frame.
    std::vector<NodeId> draw_arrivals();

    std::uint32_t source_index(NodeId n) const { return n.value - 1 - config_.n_relays; }
    std::uint32_t relay_index(NodeId n) const { return n.value - 1; }

private:
    void run_frame_end(Time at);
    void record(Time at);

    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t next_tx_id_ = 1;
    double nominal_mw_;
    IntervalAggregator interval_;
    std::vector<MetricsRecord> summary_records_;
    double weighted_min_ = 0.0;
    double weighted_min_s_ = 0.0;
    double sinr_sum_ = 0.0;
    bool stop_ = false;
};

std::unique_ptr<EngineCore> make_iaa_engine(const SimConfig& config, TraceSink* trace);
std::unique_ptr<EngineCore> make_baseline_engine(const SimConfig& config, TraceSink* trace);

}  // namespace wban::detail
