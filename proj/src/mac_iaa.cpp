#include "wban/mac_iaa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wban {

namespace {

[[noreturn]] void fault(const SourceState& s, SourceEvent::Kind k)
{
    throw ProtocolFault("source " + std::to_string(s.node_id.value) + ": event " + to_string(k) +
                        " is illegal in phase " + to_string(s.phase) + (s.in_flight ? " (in flight)" : ""));
}

[[noreturn]] void fault(const RelayState& s, const char* what)
{
    throw ProtocolFault("relay " + std::to_string(s.node_id.value) + ": " + what);
}

bool is_sensing(SourcePhase p)
{
    return p == SourcePhase::SensingCap1A || p == SourcePhase::SensingCap1B || p == SourcePhase::SensingCap2;
}

SourceStep defer(SourceState s)
{
    s.phase = SourcePhase::Deferred;
    s.outcome = SourceCase::Deferred;
    s.channel = ChannelId::base();
    s.in_flight = false;
    return {s, SourceAction::SwitchToBase, ChannelId::base(), false};
}

SourceStep on_sense(SourceState s, double delta_db, const SourceEvent& ev, const MacParams& p)
{
    const bool clear = delta_db >= p.threshold_db;
    switch (s.phase) {
    case SourcePhase::SensingCap1A:
        if (clear) {
            s.in_flight = true;
            return {s, SourceAction::Transmit, ChannelId::base(), false};
        }
        s.cw = std::min(s.cw * 2, p.cw_max);
        s.phase = SourcePhase::CwExtended;
        return {s, SourceAction::DoubleCw, s.channel, false};
    case SourcePhase::SensingCap1B:
        if (clear) {
            s.in_flight = true;
            return {s, SourceAction::Transmit, ChannelId::base(), false};
        }
        s.channel = ev.reserved_target;
        s.phase = SourcePhase::SwitchedReserved;
        return {s, SourceAction::SwitchToReserved, s.channel, false};
    case SourcePhase::SensingCap2:
        if (clear) {
            s.in_flight = true;
            return {s, SourceAction::Transmit, s.channel, false};
        }
        ++s.q;
        ++s.retries;
        if (s.q > p.q_thr || s.retries >= p.max_retries) {
            return defer(s);
        }
        return {s, SourceAction::Backoff, s.channel, false};
    default:
        fault(s, ev.kind);
    }
}

}  // namespace

void MacParams::validate() const
{
    if (cw_min < 1) throw ConfigError("cw_min: must be >= 1");
    if (cw_max < cw_min) throw ConfigError("cw_max: must be >= cw_min");
    if (max_retries < 1) throw ConfigError("max_retries: must be >= 1");
    if (!std::isfinite(threshold_db)) throw ConfigError("sinr_threshold_db: must be finite");
}

Membership classify_source(const SinrSample& delta, double threshold_db)
{
    return delta.value_db >= threshold_db ? Membership::S : Membership::IS;
}

const char* to_string(SourcePhase phase)
{
    switch (phase) {
    case SourcePhase::Idle: return "Idle";
    case SourcePhase::SensingCap1A: return "SensingCap1A";
    case SourcePhase::CwExtended: return "CwExtended";
    case SourcePhase::SensingCap1B: return "SensingCap1B";
    case SourcePhase::SwitchedReserved: return "SwitchedReserved";
    case SourcePhase::SensingCap2: return "SensingCap2";
    case SourcePhase::TxDone: return "TxDone";
    case SourcePhase::Deferred: return "Deferred";
    }
    return "?";
}

const char* to_string(SourceCase c)
{
    switch (c) {
    case SourceCase::None: return "none";
    case SourceCase::Case1: return "case1";
    case SourceCase::Case2: return "case2";
    case SourceCase::Case3: return "case3";
    case SourceCase::Deferred: return "deferred";
    }
    return "?";
}

const char* to_string(SourceEvent::Kind kind)
{
    using K = SourceEvent::Kind;
    switch (kind) {
    case K::Cap1aStart: return "cap1a_start";
    case K::SenseResult: return "sense_result";
    case K::NoReceiver: return "no_receiver";
    case K::Cap1aEnd: return "cap1a_end";
    case K::CwElapsed: return "cw_elapsed";
    case K::Cap1bEnd: return "cap1b_end";
    case K::TxAck: return "tx_ack";
    case K::JamHeard: return "jam_heard";
    case K::AckTimeout: return "ack_timeout";
    case K::Cap2End: return "cap2_end";
    case K::FrameEnd: return "frame_end";
    }
    return "?";
}

const char* to_string(SourceAction action)
{
    switch (action) {
    case SourceAction::Transmit: return "Transmit";
    case SourceAction::DoubleCw: return "DoubleCw";
    case SourceAction::SwitchToReserved: return "SwitchToReserved";
    case SourceAction::SwitchToBase: return "SwitchToBase";
    case SourceAction::Backoff: return "Backoff";
    case SourceAction::Sense: return "Sense";
    case SourceAction::Wait: return "Wait";
    case SourceAction::Drop: return "Drop";
    }
    return "?";
}

const char* to_string(RelayAction action)
{
    switch (action) {
    case RelayAction::ListenBase: return "ListenBase";
    case RelayAction::ListenReserved: return "ListenReserved";
    case RelayAction::EmitJam: return "EmitJam";
    case RelayAction::BufferPacket: return "BufferPacket";
    case RelayAction::SwitchToBase: return "SwitchToBase";
    }
    return "?";
}

SourceStep source_step(const SourceState& state, const SourceEvent& ev, const MacParams& p)
{
    using K = SourceEvent::Kind;
    SourceState s = state;
    const SourceStep wait{s, SourceAction::Wait, s.channel, false};

    switch (ev.kind) {
    case K::Cap1aStart:
        if (s.phase != SourcePhase::Idle) fault(s, ev.kind);
        if (!s.pending_message) return wait;
        s.phase = SourcePhase::SensingCap1A;
        s.cw = p.cw_min;
        s.q = 0;
        s.retries = 0;
        s.channel = ChannelId::base();
        s.outcome = SourceCase::None;
        return {s, SourceAction::Backoff, s.channel, false};

    case K::CwElapsed:
        if (!is_sensing(s.phase) || s.in_flight) fault(s, ev.kind);
        return {s, SourceAction::Sense, s.channel, false};

    case K::SenseResult:
        if (!is_sensing(s.phase) || s.in_flight || !ev.delta) fault(s, ev.kind);
        return on_sense(s, ev.delta->value_db, ev, p);

    case K::NoReceiver:
        if (!is_sensing(s.phase) || s.in_flight) fault(s, ev.kind);
        if (s.phase == SourcePhase::SensingCap2) return defer(s);
        return on_sense(s, kNoReceiverSinrDb, ev, p);

    case K::TxAck:
        if (!s.in_flight || !is_sensing(s.phase)) fault(s, ev.kind);
        s.outcome = s.phase == SourcePhase::SensingCap1A   ? SourceCase::Case1
                    : s.phase == SourcePhase::SensingCap1B ? SourceCase::Case2
                                                           : SourceCase::Case3;
        s.in_flight = false;
        s.phase = SourcePhase::TxDone;
        s.pending_message.reset();
        return {s, SourceAction::Wait, s.channel, false};

    case K::JamHeard:
    case K::AckTimeout:
        if (!s.in_flight || !is_sensing(s.phase)) fault(s, ev.kind);
        s.in_flight = false;
        ++s.retries;
        if (s.phase == SourcePhase::SensingCap2 && s.retries >= p.max_retries) {
            return defer(s);
        }
        return {s, SourceAction::Backoff, s.channel, true};

    case K::Cap1aEnd:
        if (s.in_flight) fault(s, ev.kind);
        switch (s.phase) {
        case SourcePhase::Idle:
        case SourcePhase::TxDone: return wait;
        case SourcePhase::CwExtended:
            s.phase = SourcePhase::SensingCap1B;
            return {s, SourceAction::Backoff, s.channel, false};
        case SourcePhase::SensingCap1A:
            // Ran out of CAP-1A without a clear assessment: extend and move on.
            s.cw = std::min(s.cw * 2, p.cw_max);
            s.phase = SourcePhase::SensingCap1B;
            return {s, SourceAction::Backoff, s.channel, false};
        default: fault(s, ev.kind);
        }

    case K::Cap1bEnd:
        if (s.in_flight) fault(s, ev.kind);
        switch (s.phase) {
        case SourcePhase::Idle:
        case SourcePhase::TxDone: return wait;
        case SourcePhase::SwitchedReserved:
            // The rendezvous channel may have moved if the chosen relay
            // stayed on base.
            s.channel = ev.reserved_target;
            s.phase = SourcePhase::SensingCap2;
            s.q = 0;
            s.retries = 0;
            return {s, SourceAction::Backoff, s.channel, false};
        case SourcePhase::SensingCap1B:
            s.channel = ev.reserved_target;
            s.phase = SourcePhase::SensingCap2;
            s.q = 0;
            s.retries = 0;
            return {s, SourceAction::SwitchToReserved, s.channel, false};
        default: fault(s, ev.kind);
        }

    case K::Cap2End:
        if (s.in_flight) fault(s, ev.kind);
        switch (s.phase) {
        case SourcePhase::Idle:
        case SourcePhase::TxDone:
        case SourcePhase::Deferred: return wait;
        case SourcePhase::SensingCap2: return defer(s);
        default: fault(s, ev.kind);
        }

    case K::FrameEnd: {
        if (s.in_flight) fault(s, ev.kind);
        if (s.phase != SourcePhase::Idle && s.phase != SourcePhase::TxDone && s.phase != SourcePhase::Deferred) {
            fault(s, ev.kind);
        }
        const bool was_reserved = s.channel.is_reserved();
        bool dropped = false;
        if (s.phase == SourcePhase::Deferred && s.pending_message) {
            // One frame of carry, then the packet is dropped.
            if (++s.pending_message->carried_frames > 1) {
                s.pending_message.reset();
                dropped = true;
            }
        }
        s.phase = SourcePhase::Idle;
        s.channel = ChannelId::base();
        s.cw = p.cw_min;
        s.q = 0;
        s.retries = 0;
        s.outcome = SourceCase::None;
        const SourceAction a = dropped ? SourceAction::Drop : was_reserved ? SourceAction::SwitchToBase : SourceAction::Wait;
        return {s, a, ChannelId::base(), false};
    }
    }
    fault(s, ev.kind);
}

RelayStep relay_step(const RelayState& state, const RelayEvent& ev, const MacParams& p)
{
    using K = RelayEvent::Kind;
    RelayState r = state;
    switch (ev.kind) {
    case K::CapSegmentSense:
        if (!ev.delta) fault(r, "cap_segment_sense without a sample");
        if (!r.listening_channel.is_base()) fault(r, "cap_segment_sense while off the base channel");
        if (ev.delta->value_db >= p.threshold_db) {
            return {r, RelayAction::ListenBase};
        }
        r.listening_channel = r.reserved_channel;
        r.retries = 0;
        return {r, RelayAction::ListenReserved};

    case K::ReservedSense:
        if (!ev.delta) fault(r, "reserved sense without a sample");
        if (!r.listening_channel.is_reserved()) fault(r, "reserved sense while on the base channel");
        if (ev.delta->value_db < p.threshold_db && ++r.retries >= p.max_retries) {
            r.listening_channel = ChannelId::base();
            return {r, RelayAction::SwitchToBase};
        }
        return {r, RelayAction::ListenReserved};

    case K::RetriesExhausted:
        r.listening_channel = ChannelId::base();
        return {r, RelayAction::SwitchToBase};

    case K::CollisionDetected:
        return {r, RelayAction::EmitJam};

    case K::PacketReceived:
        if (!ev.packet) fault(r, "packet_received without a packet");
        r.received_buffer.push_back(*ev.packet);
        return {r, RelayAction::BufferPacket};

    case K::FrameEnd:
        r.listening_channel = ChannelId::base();
        r.retries = 0;
        return {r, RelayAction::ListenBase};
    }
    fault(r, "unknown event");
}

void InterferenceSets::clear_all()
{
    pending.clear();
    clear.clear();
    interfering.clear();
    delivered_relays.clear();
}

namespace {
void insert_sorted(std::vector<NodeId>& v, NodeId n)
{
    auto it = std::lower_bound(v.begin(), v.end(), n);
    if (it == v.end() || *it != n) {
        v.insert(it, n);
    }
}
bool contains_sorted(const std::vector<NodeId>& v, NodeId n) { return std::binary_search(v.begin(), v.end(), n); }
}  // namespace

void InterferenceSets::classify(NodeId node, Membership m)
{
    if (classified(node)) {
        return;
    }
    insert_sorted(m == Membership::S ? clear : interfering, node);
}

bool InterferenceSets::classified(NodeId node) const
{
    return contains_sorted(clear, node) || contains_sorted(interfering, node);
}

double InterferenceSets::interference_level() const
{
    const std::size_t n = clear.size() + interfering.size();
    return n == 0 ? 0.0 : static_cast<double>(interfering.size()) / static_cast<double>(n);
}

std::uint32_t flex_slot_count(double interference_level, std::uint32_t n_sources)
{
    const double il = std::clamp(interference_level, 0.0, 1.0);
    const auto raw = static_cast<std::uint32_t>(std::ceil(il * n_sources / 2.0 - 1e-12));
    return std::min(std::max<std::uint32_t>(1, raw), std::max<std::uint32_t>(1, n_sources));
}

std::uint32_t fixed_part_size(std::uint32_t base_relays, std::uint32_t reserved_relays, std::uint32_t cw_extended_relays)
{
    return base_relays + reserved_relays + cw_extended_relays;
}

Superframe coordinator_step(std::span<const NodeId> acknowledged_relays, double interference_level,
                            std::uint32_t n_sources, const Superframe& current, const FrameTiming& timing)
{
    std::vector<NodeId> fixed(acknowledged_relays.begin(), acknowledged_relays.end());
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
    return build_superframe(current, fixed, flex_slot_count(interference_level, n_sources), timing);
}

std::uint32_t csma_backoff_draw(std::uint32_t cw, Rng& rng)
{
    if (cw < 1) {
        throw std::invalid_argument("csma_backoff_draw: cw must be >= 1");
    }
    return static_cast<std::uint32_t>(rng.uniform_below(cw));
}

}  // namespace wban
