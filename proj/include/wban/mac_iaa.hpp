#pragma once

#include "wban/radio_channel.hpp"
#include "wban/rng.hpp"
#include "wban/superframe.hpp"
#include "wban/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wban {

struct Packet {
    NodeId origin;
    std::uint64_t sequence = 0;
    std::uint64_t created_frame = 0;
    std::uint32_t carried_frames = 0;
};

/// Knobs shared by the IAA state machines.
struct MacParams {
    std::uint32_t cw_min = 8;
    std::uint32_t cw_max = 128;
    std::uint32_t q_thr = 2;
    std::uint32_t max_retries = 4;
    double threshold_db = 20.0;

    void validate() const;
};

enum class Membership : std::uint8_t { S, IS };

/// Clear (S) or interfering (IS); the threshold itself counts as clear.
Membership classify_source(const SinrSample& delta, double threshold_db);

enum class SourcePhase : std::uint8_t {
    Idle,
    SensingCap1A,
    CwExtended,
    SensingCap1B,
    SwitchedReserved,
    SensingCap2,
    TxDone,
    Deferred,
};

const char* to_string(SourcePhase phase);

/// Which path a source ended the frame on.
enum class SourceCase : std::uint8_t { None, Case1, Case2, Case3, Deferred };

const char* to_string(SourceCase c);

struct SourceState {
    NodeId node_id;
    SourcePhase phase = SourcePhase::Idle;
    std::uint32_t cw = 8;
    std::uint32_t backoff_counter = 0;
    std::uint32_t q = 0;
    std::uint32_t retries = 0;
    ChannelId channel = ChannelId::base();
    std::optional<Packet> pending_message;
    bool in_flight = false;
    SourceCase outcome = SourceCase::None;
};

struct SourceEvent {
    enum class Kind : std::uint8_t {
        Cap1aStart,
        SenseResult,
        NoReceiver,
        Cap1aEnd,
        CwElapsed,
        Cap1bEnd,
        TxAck,
        JamHeard,
        AckTimeout,
        Cap2End,
        FrameEnd,
    };

    Kind kind = Kind::Cap1aStart;
    std::optional<SinrSample> delta;
    /// Reserved channel the source should move to on SwitchToReserved, and
    /// the channel it settles on at the end of CAP-1B.
    ChannelId reserved_target = ChannelId::reserved(0);

    static SourceEvent of(Kind k, ChannelId target = ChannelId::reserved(0))
    {
        return SourceEvent{k, std::nullopt, target};
    }
    static SourceEvent sense(SinrSample s, ChannelId reserved_target = ChannelId::reserved(0))
    {
        return SourceEvent{Kind::SenseResult, s, reserved_target};
    }
};

const char* to_string(SourceEvent::Kind kind);

enum class SourceAction : std::uint8_t {
    Transmit,
    DoubleCw,
    SwitchToReserved,
    SwitchToBase,
    Backoff,
    Sense,
    Wait,
    Drop,
};

const char* to_string(SourceAction action);

struct SourceStep {
    SourceState state;
    SourceAction action = SourceAction::Wait;
    ChannelId channel;
    /// Backoff should be drawn from [0, cw_min) without doubling (jam or lost ack).
    bool simple_backoff = false;
};

/// Source side of IAA as a pure transition function. Timing (when a backoff
/// expires, whether a transmission fits) is the engine's job; this decides
/// what the source does with each outcome. Illegal (event, phase) pairs raise
/// ProtocolFault.
SourceStep source_step(const SourceState& state, const SourceEvent& event, const MacParams& params);

/// Relay side of IAA.
struct RelayState {
    NodeId node_id;
    ChannelId listening_channel = ChannelId::base();
    ChannelId reserved_channel = ChannelId::reserved(0);
    std::vector<Packet> received_buffer;
    std::uint32_t retries = 0;
};

struct RelayEvent {
    enum class Kind : std::uint8_t { CapSegmentSense, ReservedSense, CollisionDetected, PacketReceived, RetriesExhausted, FrameEnd };

    Kind kind = Kind::CapSegmentSense;
    std::optional<SinrSample> delta;
    std::optional<Packet> packet;
};

enum class RelayAction : std::uint8_t { ListenBase, ListenReserved, EmitJam, BufferPacket, SwitchToBase };

const char* to_string(RelayAction action);

struct RelayStep {
    RelayState state;
    RelayAction action = RelayAction::ListenBase;
};

RelayStep relay_step(const RelayState& state, const RelayEvent& event, const MacParams& params);

struct JamSignal {
    NodeId emitting_relay;
    ChannelId channel;
    Time duration{0};
};

/// Per-frame classification sets. Stored sorted by node id.
struct InterferenceSets {
    std::vector<NodeId> pending;      // P
    std::vector<NodeId> clear;        // S
    std::vector<NodeId> interfering;  // IS
    std::vector<NodeId> delivered_relays;  // TxR

    void clear_all();
    /// Records the first classification of `node` in this frame.
    void classify(NodeId node, Membership m);
    bool classified(NodeId node) const;
    /// |IS| / |classified|, or 0 when nothing was classified.
    double interference_level() const;
};

/// Number of flexible slots for the next frame from the observed
/// interference level: max(1, ceil(IL * N / 2)), capped at N.
std::uint32_t flex_slot_count(double interference_level, std::uint32_t n_sources);

/// Fixed part size from the per-case relay counts: TS = B + Re + BW.
std::uint32_t fixed_part_size(std::uint32_t base_relays, std::uint32_t reserved_relays, std::uint32_t cw_extended_relays);

/// Coordinator: builds beacon b_{k+1}. One fixed slot per acknowledged relay
/// in ascending id order, then the flexible part.
Superframe coordinator_step(std::span<const NodeId> acknowledged_relays, double interference_level,
                            std::uint32_t n_sources, const Superframe& current, const FrameTiming& timing);

/// Uniform backoff in [0, cw - 1].
std::uint32_t csma_backoff_draw(std::uint32_t cw, Rng& rng);

}  // namespace wban
