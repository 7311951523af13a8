#include "engine_internal.hpp"

#include "wban/baselines.hpp"
#include "wban/mac_iaa.hpp"

#include <algorithm>

namespace wban::detail {

namespace {

enum BaselineEvent : std::uint16_t {
    kCapStart = kFirstSchemeEvent,
    kSense,
    kTxBegin,
    kDataEnd,
    kAckEnd,
    kAckTimeout,
};

class BaselineEngine final : public EngineCore {
public:
    BaselineEngine(const SimConfig& config, TraceSink* trace)
        : EngineCore(config, trace),
          beb_(config.beb_params()),
          pc_(config.pc_params()),
          timing_(config.frame_timing()),
          power_control_(config.scheme == Scheme::Pc),
          nodes_(config.node_count()),
          link_dbm_(config.node_count() * config.node_count(), config.tx_power_dbm)
    {
        if (power_control_) {
            std::fill(link_dbm_.begin(), link_dbm_.end(), pc_.bounds.min_dbm);
        }
    }

private:
    // One contender: a source with a packet, or a relay with a backlog.
    struct Node {
        BebState beb;
        bool contending = false;
        bool in_flight = false;
        NodeId target;
        Time cca_start{0};
        std::uint64_t epoch = 0;
        std::optional<Packet> pending;  // sources
        std::vector<Packet> buffer;     // relays
        std::uint32_t burst = 0;
        double reported_sinr_db = 0.0;
        bool delivered = false;
    };

    bool is_relay(NodeId n) const { return n.value >= 1 && n.value <= config_.n_relays; }
    double& link(NodeId from, NodeId to) { return link_dbm_[from.value * config_.node_count() + to.value]; }

    Period period_at(Time t) const override { return t < frame_.cap1a.start ? Period::Beacon : Period::Cap1a; }

    void begin_frame(Time at) override
    {
        frame_ = build_contention_frame(frame_count_, at, timing_);
        for (NodeId s : draw_arrivals()) {
            auto& x = nodes_[s.value];
            if (x.pending) {
                ++summary_.overflow;
            } else {
                x.pending = Packet{s, packet_seq_++, frame_count_, 0};
            }
        }
        pending_.clear();
        for (std::uint32_t i = 0; i < config_.n_sources; ++i) {
            const NodeId s = source_id(config_, i);
            if (nodes_[s.value].pending && alive(s)) pending_.push_back(s);
        }

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
            ev.pending = pending_;
            emit(std::move(ev));
        }
        schedule(frame_.cap1a.start, kCapStart);
        schedule(frame_.end(), kFrameEnd);
    }

    void finish_frame(Time at, FrameEndEvent& ev) override
    {
        (void)at;
        for (NodeId s : pending_) {
            auto& x = nodes_[s.value];
            ev.outcomes.emplace_back(s, x.delivered ? Outcome::Delivered : Outcome::Failed);
            x.delivered = false;
            // Same carry rule as IAA: one more frame, then the packet is gone.
            if (x.pending && ++x.pending->carried_frames > 1) {
                x.pending.reset();
                ++summary_.dropped;
            }
        }
        for (auto& x : nodes_) {
            x.contending = false;
            x.in_flight = false;
            ++x.epoch;
        }
        if (tracing()) {
            for (std::uint32_t i = 1; i < config_.node_count(); ++i) ev.channels.emplace_back(NodeId{i}, ChannelId::base());
        }
    }

    void on_cap_start()
    {
        set_radio(coordinator_id(), RadioState::Listen, now_);
        for (std::uint32_t i = 0; i < config_.n_relays; ++i) {
            const NodeId r = relay_id(config_, i);
            if (!alive(r)) continue;
            set_radio(r, RadioState::Listen, now_);
            start_contention(r);
        }
        for (std::uint32_t i = 0; i < config_.n_sources; ++i) {
            const NodeId s = source_id(config_, i);
            if (alive(s)) set_radio(s, RadioState::Idle, now_);
        }
        for (NodeId s : pending_) start_contention(s);
    }

    void start_contention(NodeId n)
    {
        auto& x = nodes_[n.value];
        if (x.contending || !alive(n)) return;
        if (is_relay(n) ? x.buffer.empty() : !x.pending) return;
        x.contending = true;
        x.beb = beb_reset(beb_);
        attempt(n, now_);
    }

    Time exchange_time(NodeId n) const
    {
        const std::uint32_t k = is_relay(n) ? nodes_[n.value].burst : 1;
        return slot_ + airtime_ * k + ack_time_;
    }

    void attempt(NodeId n, Time earliest)
    {
        auto& x = nodes_[n.value];
        if (is_relay(n)) {
            x.burst = std::min<std::uint32_t>(static_cast<std::uint32_t>(x.buffer.size()), config_.max_aggregate);
        }
        const Interval p = frame_.cap1a;
        const Time t0 = next_boundary(std::max({now_, earliest, p.start}), p.start);
        const Time cca = t0 + slot_ * csma_backoff_draw(x.beb.cw, node_rng_[n.value]);
        if (cca + exchange_time(n) < p.end) {
            x.cca_start = cca;
            schedule(cca + slot_ / 2, kSense, n.value, x.epoch);
        }
    }

    /// Relay a source would address right now: best SINR at the relay.
    std::optional<NodeId> pick_relay(NodeId s) const
    {
        std::vector<RelayCandidate> c;
        for (std::uint32_t i = 0; i < config_.n_relays; ++i) {
            const NodeId r = relay_id(config_, i);
            if (!alive(r) || tx_busy_[r.value] != 0) continue;
            const double sig = nominal_mw() * env_.gain(s, r);
            c.push_back({r, linear_to_db(sig / (env_.interference_mw(r, ChannelId::base()) + env_.noise_mw()))});
        }
        return or_relay_select(c);
    }

    double tx_power_dbm(NodeId from, NodeId to)
    {
        return power_control_ ? link(from, to) : config_.tx_power_dbm;
    }

    double tx_draw_mw(double power_dbm) const
    {
        return power_control_ ? pc_tx_draw_mw(power_dbm, draws_.tx_mw, pc_.circuit_mw) : draws_.tx_mw;
    }

    void on_sense(const Event& e)
    {
        const NodeId n{e.node};
        auto& x = nodes_[n.value];
        if (e.aux != x.epoch || !alive(n)) return;
        set_radio(n, RadioState::Listen, x.cca_start);
        std::optional<NodeId> rx;
        bool clear = false;
        double delta = kNoReceiverSinrDb;
        if (is_relay(n)) {
            rx = coordinator_id();
            delta = linear_to_db(dbm_to_mw(tx_power_dbm(*rx, n)) * env_.gain(*rx, n) /
                                 (env_.interference_mw(n, ChannelId::base()) + env_.noise_mw()));
            clear = delta >= config_.sinr_threshold_db && rx_lock_[n.value] == 0;
        } else {
            rx = pick_relay(n);
            if (rx) {
                delta = linear_to_db(dbm_to_mw(tx_power_dbm(*rx, n)) * env_.gain(*rx, n) /
                                     (env_.interference_mw(n, ChannelId::base()) + env_.noise_mw()));
                clear = delta >= config_.sinr_threshold_db;
            }
        }
        emit(SenseEvent{now_, n, ChannelId::base(), delta, rx.has_value()});
        const BebVerdict v = beb_on_cca(x.beb, clear, beb_);
        if (v == BebVerdict::Transmit) {
            x.target = *rx;
            schedule(x.cca_start + slot_, kTxBegin, n.value, x.epoch);
            return;
        }
        set_radio_later(n, is_relay(n) ? RadioState::Listen : RadioState::Idle, x.cca_start + slot_);
        if (v == BebVerdict::GiveUp) {
            give_up(n);
            if (!x.contending) return;
        }
        attempt(n, x.cca_start + slot_);
    }

    /// Sources drop the packet; relays keep their backlog and start over.
    void give_up(NodeId n)
    {
        auto& x = nodes_[n.value];
        if (is_relay(n)) {
            x.beb = beb_reset(beb_);
            return;
        }
        x.contending = false;
        x.pending.reset();
        ++summary_.dropped;
    }

    void on_tx_begin(const Event& e)
    {
        const NodeId n{e.node};
        auto& x = nodes_[n.value];
        if (e.aux != x.epoch || !alive(n)) return;
        const NodeId r = x.target;
        Transmission tx;
        tx.source = n;
        tx.destination = r;
        tx.channel = ChannelId::base();
        tx.start = now_;
        tx.power_dbm = tx_power_dbm(n, r);
        tx.power_mw = dbm_to_mw(tx.power_dbm);
        tx.kind = TxKind::Data;
        tx.packets = is_relay(n) ? x.burst : 1;
        tx.end = now_ + airtime_ * tx.packets;
        tx.receiver_ready = alive(r) && rx_lock_[r.value] == 0 && tx_busy_[r.value] == 0;
        if (rx_lock_[n.value] != 0) {
            // Started receiving after its assessment; that reception is lost.
            env_.registry().find(rx_lock_[n.value])->collided = true;
        }
        x.in_flight = true;
        set_radio(n, RadioState::Tx, now_, tx_draw_mw(tx.power_dbm));
        const auto id = start_tx(tx, is_relay(n) ? Role::Relay : Role::Source);
        if (tx.receiver_ready) set_radio(r, RadioState::Rx, now_);
        update_sinr(ChannelId::base());
        schedule(tx.end, kDataEnd, n.value, id);
    }

    void on_data_end(const Event& e)
    {
        const auto* p = env_.registry().find(e.aux);
        const NodeId r = p->destination;
        const bool locked = rx_lock_[r.value] == p->id;
        const bool decoded = decodable(*p) && locked;
        const Transmission tx = finish_tx(e.aux, decoded, false);
        const NodeId n = tx.source;
        auto& x = nodes_[n.value];
        if (locked) set_radio(r, RadioState::Listen, now_);
        set_radio(n, RadioState::Rx, now_);
        if (!decoded) {
            schedule(now_ + ack_time_, kAckTimeout, n.value, x.epoch);
            return;
        }
        x.reported_sinr_db = sinr_db(tx);
        if (is_relay(r)) {
            auto& y = nodes_[r.value];
            ++summary_.delivered_to_relays;
            if (y.buffer.size() >= config_.relay_buffer_limit) {
                ++summary_.overflow;
            } else {
                y.buffer.push_back(*x.pending);
            }
        }
        Transmission ack;
        ack.source = r;
        ack.destination = n;
        ack.channel = ChannelId::base();
        ack.start = now_;
        ack.end = now_ + ack_time_;
        ack.power_dbm = tx_power_dbm(r, n);
        ack.power_mw = dbm_to_mw(ack.power_dbm);
        ack.kind = TxKind::Ack;
        set_radio(r, RadioState::Tx, now_, r == coordinator_id() ? std::nullopt : std::optional<double>(tx_draw_mw(ack.power_dbm)));
        const auto id = start_tx(ack, r == coordinator_id() ? Role::Coordinator : Role::Relay);
        schedule(ack.end, kAckEnd, n.value, id);
    }

    double pc_target() const { return config_.sinr_threshold_db + pc_.target_offset_db; }

    void on_ack_end(const Event& e)
    {
        const Transmission ack = finish_tx(e.aux, false, false);
        const NodeId r = ack.source;
        const NodeId n{e.node};
        auto& x = nodes_[n.value];
        set_radio(r, RadioState::Listen, now_);
        x.in_flight = false;
        x.contending = false;
        if (power_control_) {
            double& pw = link(n, r);
            pw = pc_power_update(pw, x.reported_sinr_db, pc_target(), pc_.step_db, pc_.hysteresis_db, pc_.bounds);
            link(r, n) = pw;
        }
        if (is_relay(n)) {
            set_radio(n, RadioState::Listen, now_);
            x.buffer.erase(x.buffer.begin(), x.buffer.begin() + x.burst);
            count_delivery(n, x.burst, now_);
            start_contention(n);
        } else {
            set_radio(n, RadioState::Idle, now_);
            x.pending.reset();
            x.delivered = true;
            if (alive(r)) start_contention(r);
        }
    }

    void on_ack_timeout(const Event& e)
    {
        const NodeId n{e.node};
        auto& x = nodes_[n.value];
        if (e.aux != x.epoch) return;
        x.in_flight = false;
        set_radio(n, is_relay(n) ? RadioState::Listen : RadioState::Idle, now_);
        if (!alive(n)) return;
        if (power_control_ && config_.pc_raise_on_loss) {
            double& pw = link(n, x.target);
            pw = std::min(pw + pc_.step_db, pc_.bounds.max_dbm);
            link(x.target, n) = pw;
        }
        if (beb_on_no_ack(x.beb, beb_) == BebVerdict::GiveUp) {
            give_up(n);
            if (!x.contending) return;
        }
        attempt(n, now_);
    }

    void dispatch(const Event& e) override
    {
        switch (e.kind) {
        case kCapStart: on_cap_start(); break;
        case kSense: on_sense(e); break;
        case kTxBegin: on_tx_begin(e); break;
        case kDataEnd: on_data_end(e); break;
        case kAckEnd: on_ack_end(e); break;
        case kAckTimeout: on_ack_timeout(e); break;
        default: throw std::logic_error("baseline engine: unknown event kind " + std::to_string(e.kind));
        }
    }

    BebParams beb_;
    PcParams pc_;
    FrameTiming timing_;
    bool power_control_;
    std::vector<Node> nodes_;
    std::vector<double> link_dbm_;
    std::vector<NodeId> pending_;
    std::uint64_t packet_seq_ = 0;
};

}  // namespace

std::unique_ptr<EngineCore> make_baseline_engine(const SimConfig& config, TraceSink* trace)
{
    return std::make_unique<BaselineEngine>(config, trace);
}

}  // namespace wban::detail
