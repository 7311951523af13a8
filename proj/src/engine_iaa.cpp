#include "engine_internal.hpp"

#include "wban/mac_iaa.hpp"

#include <algorithm>
#include <limits>

namespace wban::detail {

namespace {

enum IaaEvent : std::uint16_t {
    kCap1aStart = kFirstSchemeEvent,
    kCap1aEnd,
    kCap1bEnd,
    kCap2End,
    kSense,
    kTxBegin,
    kDataEnd,
    kAckEnd,
    kAckTimeout,
    kJamEnd,
    kUndeaf,
    kSlot,
    kBurstEnd,
    kBurstAckEnd,
    kBurstTimeout,
};

constexpr double kNoSample = 200.0;

Outcome outcome_of(SourceCase c)
{
    switch (c) {
    case SourceCase::Case1: return Outcome::Case1;
    case SourceCase::Case2: return Outcome::Case2;
    case SourceCase::Case3: return Outcome::Case3;
    default: return Outcome::Deferred;
    }
}

const char* channel_kind(ChannelId c) { return c.is_base() ? "base" : "reserved"; }

class IaaEngine final : public EngineCore {
public:
    IaaEngine(const SimConfig& config, TraceSink* trace)
        : EngineCore(config, trace),
          mac_(config.mac_params()),
          timing_(config.frame_timing()),
          activity_(config.node_count())
    {
        src_.resize(config.n_sources);
        for (std::uint32_t i = 0; i < config.n_sources; ++i) {
            src_[i].st.node_id = source_id(config, i);
            src_[i].st.cw = mac_.cw_min;
        }
        rel_.resize(config.n_relays);
        for (std::uint32_t i = 0; i < config.n_relays; ++i) {
            rel_[i].st.node_id = relay_id(config, i);
            rel_[i].st.reserved_channel = ChannelId::reserved(static_cast<std::uint16_t>(i));
        }
    }

private:
    struct Src {
        SourceState st;
        NodeId target;
        Time cca_start{0};
        std::uint64_t epoch = 0;
        std::uint64_t tx = 0;
    };
    struct Rel {
        RelayState st;
        bool listening = false;
        bool deaf = false;
        std::uint64_t epoch = 0;
        double cap1_min_db = kNoSample;
        std::optional<std::uint32_t> flex_slot;
        std::uint32_t burst = 0;
    };

    Src& src(NodeId n) { return src_[source_index(n)]; }
    Rel& rel(NodeId n) { return rel_[relay_index(n)]; }
    bool is_relay(NodeId n) const { return n.value >= 1 && n.value <= config_.n_relays; }

    Period period_at(Time t) const override
    {
        if (t < frame_.cap1a.start) return Period::Beacon;
        if (t < frame_.cap1a.end) return Period::Cap1a;
        if (t < frame_.cap1b.end) return Period::Cap1b;
        if (t < frame_.cap2.end) return Period::Cap2;
        return Period::Tdma;
    }

    // ---- frame boundaries ----

    void begin_frame(Time at) override
    {
        if (frame_count_ == 0) {
            frame_ = build_superframe(0, at, {}, flex_slot_count(0.0, config_.n_sources), timing_);
        } else {
            frame_ = next_frame_;
        }
        for (NodeId s : draw_arrivals()) {
            auto& st = src(s).st;
            if (st.pending_message) {
                ++summary_.overflow;
            } else {
                st.pending_message = Packet{s, packet_seq_++, frame_count_, 0};
            }
        }
        sets_.clear_all();
        for (auto& s : src_) {
            if (s.st.pending_message && alive(s.st.node_id)) sets_.pending.push_back(s.st.node_id);
        }

        // Beacon: everyone alive listens, the coordinator sends.
        set_radio(coordinator_id(), RadioState::Tx, at);
        for (std::uint32_t i = 1; i < config_.node_count(); ++i) {
            if (alive(NodeId{i})) set_radio(NodeId{i}, RadioState::Rx, at);
        }

        if (tracing()) {
            FrameStartEvent ev;
            ev.at = at;
            ev.frame = frame_.frame_index;
            ev.cap1a_start = frame_.cap1a.start;
            ev.cap1a_end = frame_.cap1a.end;
            ev.cap1b_end = frame_.cap1b.end;
            ev.cap2_end = frame_.cap2.end;
            ev.frame_end = frame_.end();
            ev.slot_duration = frame_.slot_duration;
            for (const auto& a : frame_.fixed_slots) ev.fixed_slots.push_back(a.node_id);
            ev.flexible_slots = frame_.flexible_slot_count;
            ev.pending = sets_.pending;
            emit(std::move(ev));
        }

        schedule(frame_.cap1a.start, kCap1aStart);
        schedule(frame_.cap1a.end, kCap1aEnd);
        schedule(frame_.cap1b.end, kCap1bEnd);
        schedule(frame_.cap2.end, kCap2End);
        for (std::uint32_t i = 0; i < frame_.total_slots(); ++i) {
            schedule(frame_.slot(i).start, kSlot, 0, i);
        }
        schedule(frame_.end(), kFrameEnd);
    }

    void finish_frame(Time at, FrameEndEvent& ev) override
    {
        for (NodeId n : sets_.pending) {
            auto& s = src(n);
            Outcome o = outcome_of(s.st.outcome);
            if (!alive(n)) {
                // A source that died mid-frame is simply taken off the air.
                s.st = SourceState{};
                s.st.node_id = n;
                s.st.cw = mac_.cw_min;
                o = Outcome::Deferred;
            } else {
                const auto res = step(s, SourceEvent::of(SourceEvent::Kind::FrameEnd), at);
                if (res.action == SourceAction::Drop) ++summary_.dropped;
            }
            switch (o) {
            case Outcome::Case1: ++summary_.case1; break;
            case Outcome::Case2: ++summary_.case2; break;
            case Outcome::Case3: ++summary_.case3; break;
            default: ++summary_.deferred; break;
            }
            ev.outcomes.emplace_back(n, o);
        }
        if (tracing()) {
            for (const auto& r : rel_) ev.channels.emplace_back(r.st.node_id, r.st.listening_channel);
            for (const auto& s : src_) ev.channels.emplace_back(s.st.node_id, s.st.channel);
        }

        activity_.push_frame(sets_.delivered_relays);
        const auto active = activity_.active_nodes();
        next_frame_ = coordinator_step(active, sets_.interference_level(), config_.n_sources, frame_, timing_);
    }

    // ---- the state machine glue ----

    SourceStep step(Src& s, const SourceEvent& ev, Time earliest)
    {
        const SourcePhase before = s.st.phase;
        SourceStep res = source_step(s.st, ev, mac_);
        s.st = res.state;
        const NodeId n = s.st.node_id;
        if (tracing()) {
            emit(PhaseEvent{now_, n, to_string(before), to_string(s.st.phase), to_string(res.action), res.channel});
        }
        switch (res.action) {
        case SourceAction::Transmit:
            schedule(s.cca_start + slot_, kTxBegin, n.value, s.epoch);
            break;
        case SourceAction::Backoff: {
            const std::uint32_t cw = res.simple_backoff ? mac_.cw_min : s.st.cw;
            attempt(s, csma_backoff_draw(cw, node_rng_[n.value]), earliest);
            break;
        }
        case SourceAction::SwitchToReserved:
            if (s.st.phase == SourcePhase::SensingCap2) {
                attempt(s, csma_backoff_draw(s.st.cw, node_rng_[n.value]), earliest);
            }
            break;
        default: break;
        }
        return res;
    }

    Interval period_of(const SourceState& st) const
    {
        switch (st.phase) {
        case SourcePhase::SensingCap1A: return frame_.cap1a;
        case SourcePhase::SensingCap1B: return frame_.cap1b;
        case SourcePhase::SensingCap2: return frame_.cap2;
        default: throw ProtocolFault("attempt scheduled outside a sensing phase");
        }
    }

    /// Schedules the sensing slot after `slots` backoff slots, if the whole
    /// exchange still fits the period. Otherwise the source waits for the
    /// period boundary.
    void attempt(Src& s, std::uint32_t slots, Time earliest)
    {
        const Interval p = period_of(s.st);
        const Time t0 = next_boundary(std::max({now_, earliest, p.start}), p.start);
        const Time cca = t0 + slot_ * slots;
        if (cca + slot_ + airtime_ + ack_time_ < p.end) {
            s.cca_start = cca;
            schedule(cca + slot_ / 2, kSense, s.st.node_id.value, s.epoch);
        }
    }

    bool relay_can_receive(NodeId r, ChannelId c) const
    {
        const auto& x = rel_[relay_index(r)];
        return alive(r) && x.listening && !x.deaf && x.st.listening_channel == c && tx_busy_[r.value] == 0 &&
               rx_lock_[r.value] == 0;
    }

    /// Nearest relay listening on `c`; ties go to the lowest id.
    std::optional<NodeId> receiver_for(NodeId s, ChannelId c) const
    {
        std::optional<NodeId> best;
        double best_gain = -1.0;
        for (const auto& x : rel_) {
            const NodeId r = x.st.node_id;
            if (!alive(r) || !x.listening || x.deaf || x.st.listening_channel != c || tx_busy_[r.value] != 0) continue;
            const double g = env_.gain(r, s);
            if (g > best_gain) {
                best = r;
                best_gain = g;
            }
        }
        return best;
    }

    NodeId nearest_relay(NodeId s) const
    {
        NodeId best = rel_.front().st.node_id;
        for (const auto& x : rel_) {
            if (env_.gain(x.st.node_id, s) > env_.gain(best, s)) best = x.st.node_id;
        }
        return best;
    }

    ChannelId reserved_of(NodeId r) const { return rel_[relay_index(r)].st.reserved_channel; }

    void on_sense(const Event& e)
    {
        const NodeId n{e.node};
        auto& s = src(n);
        if (e.aux != s.epoch || !alive(n)) return;
        set_radio(n, RadioState::Listen, s.cca_start);
        const ChannelId c = s.st.channel;
        const auto r = receiver_for(n, c);
        SourceEvent ev;
        double delta = kNoReceiverSinrDb;
        if (r) {
            delta = linear_to_db(nominal_mw() * env_.gain(*r, n) / (env_.interference_mw(n, c) + env_.noise_mw()));
            s.target = *r;
            ev = SourceEvent::sense(SinrSample{delta, now_, c, n}, reserved_of(*r));
        } else {
            s.target = nearest_relay(n);
            ev = SourceEvent::of(SourceEvent::Kind::NoReceiver, reserved_of(s.target));
        }
        if (s.st.phase == SourcePhase::SensingCap1A) {
            sets_.classify(n, r ? classify_source(SinrSample{delta, now_, c, n}, mac_.threshold_db) : Membership::IS);
        }
        emit(SenseEvent{now_, n, c, delta, r.has_value()});
        const auto res = step(s, ev, s.cca_start + slot_);
        if (res.action != SourceAction::Transmit) {
            set_radio_later(n, RadioState::Idle, s.cca_start + slot_);
        }
    }

    void on_tx_begin(const Event& e)
    {
        const NodeId n{e.node};
        auto& s = src(n);
        if (e.aux != s.epoch || !alive(n)) return;
        const ChannelId c = s.st.channel;
        const NodeId r = s.target;
        Transmission tx;
        tx.source = n;
        tx.destination = r;
        tx.channel = c;
        tx.start = now_;
        tx.end = now_ + airtime_;
        tx.power_dbm = config_.tx_power_dbm;
        tx.power_mw = nominal_mw();
        tx.kind = TxKind::Data;
        tx.packets = 1;
        tx.receiver_ready = relay_can_receive(r, c);
        bool overlap = false;
        for (const auto& o : env_.registry().all()) {
            if (o.channel == c && (o.kind == TxKind::Data || o.kind == TxKind::Ack)) overlap = true;
        }
        set_radio(n, RadioState::Tx, now_);
        s.tx = start_tx(tx, Role::Source);
        if (tx.receiver_ready) set_radio(r, RadioState::Rx, now_);
        update_sinr(c);
        if (overlap && collide(c)) return;
        schedule(tx.end, kDataEnd, n.value, s.tx);
    }

    /// Relays listening on `c` detect the overlap and jam; every data
    /// transmission on `c` is abandoned. Without a listening relay nobody
    /// notices and the transmissions carry on.
    bool collide(ChannelId c)
    {
        std::vector<NodeId> jammers;
        for (const auto& x : rel_) {
            const NodeId r = x.st.node_id;
            if (alive(r) && x.listening && !x.deaf && x.st.listening_channel == c && tx_busy_[r.value] == 0) {
                jammers.push_back(r);
            }
        }
        if (jammers.empty()) return false;
        const Period p = period_at(now_);
        ++summary_.collisions;
        emit(CollisionEvent{now_, frame_.frame_index, c, p});
        const Time jam_end = now_ + slot_;

        std::vector<std::uint64_t> victims;
        for (const auto& o : env_.registry().all()) {
            if (o.channel == c && o.kind == TxKind::Data) victims.push_back(o.id);
        }
        for (std::uint64_t id : victims) {
            const Transmission tx = finish_tx(id, false, true);
            observe(tx);
            auto& s = src(tx.source);
            s.tx = 0;
            ++s.epoch;
            set_radio(tx.source, RadioState::Rx, now_);
            set_radio_later(tx.source, RadioState::Idle, jam_end);
            step(s, SourceEvent::of(SourceEvent::Kind::JamHeard), jam_end);
        }
        for (NodeId r : jammers) {
            auto& x = rel(r);
            const auto res = relay_step(x.st, RelayEvent{RelayEvent::Kind::CollisionDetected, std::nullopt, std::nullopt}, mac_);
            x.st = res.state;
            x.deaf = true;
            ++x.epoch;
            Transmission jam;
            jam.source = r;
            jam.destination = r;
            jam.channel = c;
            jam.start = now_;
            jam.end = jam_end;
            jam.power_dbm = config_.tx_power_dbm;
            jam.power_mw = nominal_mw();
            jam.kind = TxKind::Jam;
            set_radio(r, RadioState::Tx, now_);
            const auto id = start_tx(jam, Role::Relay);
            ++summary_.jams;
            emit(JamEvent{now_, frame_.frame_index, r, c, p, slot_});
            schedule(jam_end, kJamEnd, r.value, id);
        }
        return true;
    }

    /// A relay's first-segment sample: the worst reception it saw on base
    /// during CAP-1.
    void observe(const Transmission& tx)
    {
        if (tx.kind != TxKind::Data || !tx.receiver_ready || !is_relay(tx.destination) || !tx.channel.is_base()) return;
        if (tx.start >= frame_.cap1b.end) return;
        auto& x = rel(tx.destination);
        x.cap1_min_db = std::min(x.cap1_min_db, sinr_db(tx));
    }

    void relay_radio_rest(NodeId r)
    {
        const auto& x = rel(r);
        set_radio(r, x.listening ? RadioState::Listen : RadioState::Idle, now_);
    }

    void on_data_end(const Event& e)
    {
        const auto* p = env_.registry().find(e.aux);
        if (!p) return;
        const NodeId r = p->destination;
        const bool locked = rx_lock_[r.value] == p->id;
        const bool decoded = decodable(*p) && locked;
        const Transmission tx = finish_tx(e.aux, decoded, false);
        observe(tx);
        auto& s = src(tx.source);
        s.tx = 0;
        if (locked) relay_radio_rest(r);
        set_radio(tx.source, RadioState::Rx, now_);
        auto& x = rel(r);
        if (decoded) {
            ++summary_.delivered_to_relays;
            if (x.st.received_buffer.size() >= config_.relay_buffer_limit) {
                ++summary_.overflow;
            } else {
                RelayEvent ev{RelayEvent::Kind::PacketReceived, std::nullopt, *s.st.pending_message};
                x.st = relay_step(x.st, ev, mac_).state;
            }
            Transmission ack;
            ack.source = r;
            ack.destination = tx.source;
            ack.channel = tx.channel;
            ack.start = now_;
            ack.end = now_ + ack_time_;
            ack.power_dbm = config_.tx_power_dbm;
            ack.power_mw = nominal_mw();
            ack.kind = TxKind::Ack;
            set_radio(r, RadioState::Tx, now_);
            const auto id = start_tx(ack, Role::Relay);
            schedule(ack.end, kAckEnd, tx.source.value, id);
            return;
        }
        schedule(now_ + ack_time_, kAckTimeout, tx.source.value, s.epoch);
        if (tx.channel.is_reserved() && tx.receiver_ready && x.listening && x.st.listening_channel == tx.channel) {
            RelayEvent ev{RelayEvent::Kind::ReservedSense, SinrSample{sinr_db(tx), now_, tx.channel, r}, std::nullopt};
            const auto res = relay_step(x.st, ev, mac_);
            x.st = res.state;
            if (res.action == RelayAction::SwitchToBase) {
                x.listening = false;
                relay_radio_rest(r);
                if (tracing()) emit(PhaseEvent{now_, r, "reserved", "base", to_string(res.action), x.st.listening_channel});
            }
        }
    }

    void on_ack_end(const Event& e)
    {
        const Transmission ack = finish_tx(e.aux, false, false);
        relay_radio_rest(ack.source);
        const NodeId n{e.node};
        set_radio(n, RadioState::Idle, now_);
        step(src(n), SourceEvent::of(SourceEvent::Kind::TxAck), now_);
    }

    void on_ack_timeout(const Event& e)
    {
        const NodeId n{e.node};
        auto& s = src(n);
        if (e.aux != s.epoch || !alive(n)) return;
        set_radio(n, RadioState::Idle, now_);
        step(s, SourceEvent::of(SourceEvent::Kind::AckTimeout), now_);
    }

    void on_jam_end(const Event& e)
    {
        finish_tx(e.aux, false, false);
        const NodeId r{e.node};
        auto& x = rel(r);
        relay_radio_rest(r);
        const auto wait = csma_backoff_draw(mac_.cw_min, node_rng_[r.value]);
        if (wait == 0) {
            x.deaf = false;
        } else {
            schedule(now_ + slot_ * wait, kUndeaf, r.value, x.epoch);
        }
    }

    void on_undeaf(const Event& e)
    {
        auto& x = rel(NodeId{e.node});
        if (e.aux == x.epoch) x.deaf = false;
    }

    // ---- period boundaries ----

    void on_cap1a_start()
    {
        set_radio(coordinator_id(), RadioState::Idle, now_);
        for (auto& x : rel_) {
            x.listening = true;
            x.deaf = false;
            ++x.epoch;
            x.cap1_min_db = kNoSample;
            x.flex_slot.reset();
            if (alive(x.st.node_id)) set_radio(x.st.node_id, RadioState::Listen, now_);
        }
        for (auto& s : src_) {
            if (alive(s.st.node_id)) set_radio(s.st.node_id, RadioState::Idle, now_);
        }
        for (NodeId n : sets_.pending) {
            auto& s = src(n);
            ++s.epoch;
            step(s, SourceEvent::of(SourceEvent::Kind::Cap1aStart), now_);
        }
    }

    void on_cap1a_end()
    {
        for (NodeId n : sets_.pending) {
            auto& s = src(n);
            if (!alive(n)) continue;
            if (s.st.phase == SourcePhase::SensingCap1A || s.st.phase == SourcePhase::CwExtended) {
                ++s.epoch;
                step(s, SourceEvent::of(SourceEvent::Kind::Cap1aEnd), now_);
            }
        }
    }

    void on_cap1b_end()
    {
        for (auto& x : rel_) {
            const NodeId r = x.st.node_id;
            if (!alive(r)) continue;
            RelayEvent ev{RelayEvent::Kind::CapSegmentSense, SinrSample{x.cap1_min_db, now_, ChannelId::base(), r}, std::nullopt};
            const auto res = relay_step(x.st, ev, mac_);
            x.st = res.state;
            // Nothing is sent on base during CAP-2, so a relay staying there has no role until TDMA.
            x.listening = res.action == RelayAction::ListenReserved;
            x.deaf = false;
            ++x.epoch;
            relay_radio_rest(r);
            if (tracing()) emit(PhaseEvent{now_, r, "base", channel_kind(x.st.listening_channel), to_string(res.action), x.st.listening_channel});
        }
        for (NodeId n : sets_.pending) {
            auto& s = src(n);
            if (!alive(n)) continue;
            if (s.st.phase != SourcePhase::SwitchedReserved && s.st.phase != SourcePhase::SensingCap1B) continue;
            ++s.epoch;
            step(s, SourceEvent::of(SourceEvent::Kind::Cap1bEnd, rendezvous(s)), now_);
        }
    }

    /// The reserved channel of the source's chosen relay if that relay moved
    /// there, else the lowest reserved channel somebody listens on.
    ChannelId rendezvous(const Src& s) const
    {
        const auto& pref = rel_[relay_index(s.target)];
        if (pref.listening && pref.st.listening_channel.is_reserved()) return pref.st.listening_channel;
        for (const auto& x : rel_) {
            if (alive(x.st.node_id) && x.listening && x.st.listening_channel.is_reserved()) return x.st.listening_channel;
        }
        return pref.st.reserved_channel;
    }

    void on_cap2_end()
    {
        for (NodeId n : sets_.pending) {
            auto& s = src(n);
            if (!alive(n)) continue;
            if (s.st.phase == SourcePhase::SensingCap2) {
                ++s.epoch;
                step(s, SourceEvent::of(SourceEvent::Kind::Cap2End), now_);
            }
        }
        set_radio(coordinator_id(), RadioState::Listen, now_);
        for (auto& x : rel_) {
            const NodeId r = x.st.node_id;
            const bool was_reserved = x.st.listening_channel.is_reserved();
            x.st = relay_step(x.st, RelayEvent{RelayEvent::Kind::FrameEnd, std::nullopt, std::nullopt}, mac_).state;
            x.listening = false;
            x.deaf = false;
            ++x.epoch;
            if (!alive(r)) continue;
            set_radio(r, RadioState::Idle, now_);
            if (was_reserved && tracing()) emit(PhaseEvent{now_, r, "reserved", "base", "SwitchToBase", x.st.listening_channel});
            if (!frame_.fixed_slot_of(r) && !x.st.received_buffer.empty()) {
                x.flex_slot = flexible_slot_contend(r, frame_, node_rng_[r.value]);
            }
        }
    }

    // ---- TDMA ----

    void on_slot(const Event& e)
    {
        const auto slot = static_cast<std::uint32_t>(e.aux);
        std::vector<NodeId> senders;
        if (slot < frame_.fixed_count()) {
            senders.push_back(frame_.fixed_slots[slot].node_id);
        } else {
            for (const auto& x : rel_) {
                if (x.flex_slot == slot) senders.push_back(x.st.node_id);
            }
        }
        const Time start = frame_.slot(slot).start;
        for (NodeId r : senders) {
            auto& x = rel(r);
            if (!alive(r) || x.st.received_buffer.empty()) continue;
            x.burst = std::min<std::uint32_t>(static_cast<std::uint32_t>(x.st.received_buffer.size()), config_.max_aggregate);
            Transmission tx;
            tx.source = r;
            tx.destination = coordinator_id();
            tx.channel = ChannelId::base();
            tx.start = start;
            tx.end = start + airtime_ * x.burst;
            tx.power_dbm = config_.tx_power_dbm;
            tx.power_mw = nominal_mw();
            tx.kind = TxKind::Data;
            tx.packets = x.burst;
            tx.receiver_ready = rx_lock_[coordinator_id().value] == 0;
            bool collided = false;
            for (auto& o : env_.registry().all()) {
                if (o.kind == TxKind::Data && o.channel.is_base()) {
                    o.collided = true;
                    collided = true;
                }
            }
            tx.collided = collided;
            set_radio(r, RadioState::Tx, now_);
            const auto id = start_tx(tx, Role::Relay, static_cast<std::int32_t>(slot));
            if (tx.receiver_ready) set_radio(coordinator_id(), RadioState::Rx, now_);
            update_sinr(ChannelId::base());
            schedule(tx.end, kBurstEnd, r.value, id);
        }
    }

    void on_burst_end(const Event& e)
    {
        const auto* p = env_.registry().find(e.aux);
        const bool locked = rx_lock_[coordinator_id().value] == p->id;
        const bool decoded = decodable(*p) && locked;
        const Transmission tx = finish_tx(e.aux, decoded, false);
        if (locked) set_radio(coordinator_id(), RadioState::Listen, now_);
        set_radio(tx.source, RadioState::Rx, now_);
        if (!decoded) {
            set_radio_later(tx.source, RadioState::Idle, now_ + ack_time_);
            return;
        }
        Transmission ack;
        ack.source = coordinator_id();
        ack.destination = tx.source;
        ack.channel = ChannelId::base();
        ack.start = now_;
        ack.end = now_ + ack_time_;
        ack.power_dbm = config_.tx_power_dbm;
        ack.power_mw = nominal_mw();
        ack.kind = TxKind::Ack;
        set_radio(coordinator_id(), RadioState::Tx, now_);
        const auto id = start_tx(ack, Role::Coordinator);
        schedule(ack.end, kBurstAckEnd, tx.source.value, id);
    }

    void on_burst_ack_end(const Event& e)
    {
        finish_tx(e.aux, false, false);
        set_radio(coordinator_id(), RadioState::Listen, now_);
        const NodeId r{e.node};
        auto& x = rel(r);
        set_radio(r, RadioState::Idle, now_);
        auto& buf = x.st.received_buffer;
        buf.erase(buf.begin(), buf.begin() + x.burst);
        count_delivery(r, x.burst, now_);
        if (std::find(sets_.delivered_relays.begin(), sets_.delivered_relays.end(), r) == sets_.delivered_relays.end()) {
            sets_.delivered_relays.push_back(r);
            std::sort(sets_.delivered_relays.begin(), sets_.delivered_relays.end());
        }
    }

    void dispatch(const Event& e) override
    {
        switch (e.kind) {
        case kCap1aStart: on_cap1a_start(); break;
        case kCap1aEnd: on_cap1a_end(); break;
        case kCap1bEnd: on_cap1b_end(); break;
        case kCap2End: on_cap2_end(); break;
        case kSense: on_sense(e); break;
        case kTxBegin: on_tx_begin(e); break;
        case kDataEnd: on_data_end(e); break;
        case kAckEnd: on_ack_end(e); break;
        case kAckTimeout: on_ack_timeout(e); break;
        case kJamEnd: on_jam_end(e); break;
        case kUndeaf: on_undeaf(e); break;
        case kSlot: on_slot(e); break;
        case kBurstEnd: on_burst_end(e); break;
        case kBurstAckEnd: on_burst_ack_end(e); break;
        default: throw std::logic_error("iaa engine: unknown event kind " + std::to_string(e.kind));
        }
    }

    MacParams mac_;
    FrameTiming timing_;
    ActivityTracker activity_;
    InterferenceSets sets_;
    Superframe next_frame_;
    std::vector<Src> src_;
    std::vector<Rel> rel_;
    std::uint64_t packet_seq_ = 0;
};

}  // namespace

std::unique_ptr<EngineCore> make_iaa_engine(const SimConfig& config, TraceSink* trace)
{
    return std::make_unique<IaaEngine>(config, trace);
}

}  // namespace wban::detail
