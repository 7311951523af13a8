#include "wban/engine.hpp"

#include "engine_internal.hpp"
#include "wban/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace wban {
namespace detail {

namespace {

ChannelEnvironment make_environment(const SimConfig& c)
{
    c.validate();
    Rng placement = Rng::stream(c.seed, stream_ids::kPlacement);
    std::optional<Rng> shadowing;
    if (c.shadowing_sigma_db > 0.0) {
        shadowing = Rng::stream(c.seed, stream_ids::kShadowing);
    }
    return ChannelEnvironment(place_nodes(c, placement), c.path_loss(), c.noise_dbm, c.shadowing_sigma_db, shadowing);
}

}  // namespace

EngineCore::EngineCore(const SimConfig& config, TraceSink* trace)
    : config_(config),
      slot_(config.backoff_slot()),
      airtime_(config.packet_airtime()),
      ack_time_(config.ack_airtime()),
      trace_(trace),
      env_(make_environment(config)),
      ledger_(config.node_count(), config.initial_energy_j),
      draws_(config.power_draws()),
      radio_(config.node_count()),
      rx_lock_(config.node_count(), 0),
      tx_busy_(config.node_count(), 0),
      traffic_rng_(traffic_streams(config)),
      nominal_mw_(dbm_to_mw(config.tx_power_dbm))
{
    if (config.coordinator_energy_j > 0.0) {
        ledger_.set_initial(coordinator_id(), config.coordinator_energy_j, true);
    } else {
        ledger_.set_initial(coordinator_id(), 0.0, false);
    }
    node_rng_.reserve(config.node_count());
    for (std::uint32_t i = 0; i < config.node_count(); ++i) {
        node_rng_.push_back(Rng::stream(config.seed, i));
        radio_[i].draw_mw = draws_.idle_mw;
    }
    summary_.scheme = config.scheme;
    summary_.threshold_db = config.sinr_threshold_db;
    summary_.seed = config.seed;
    for (std::uint32_t i = 0; i < config.node_count(); ++i) {
        if (ledger_.battery_powered(NodeId{i})) summary_.initial_energy_j += ledger_.initial(NodeId{i});
    }
}

void EngineCore::schedule(Time at, std::uint16_t kind, std::uint32_t node, std::uint64_t aux, std::uint8_t priority)
{
    if (at < now_) {
        throw std::logic_error("schedule: event in the past");
    }
    queue_.push(Event{at, priority, seq_++, kind, node, aux});
}

void EngineCore::set_radio(NodeId node, RadioState state, Time at, std::optional<double> draw_mw)
{
    auto& r = radio_[node.value];
    at = std::max(at, r.since);
    ledger_.spend(node, r.state, at - r.since, r.draw_mw * 1e-3);
    r.state = state;
    r.draw_mw = draw_mw ? *draw_mw : draws_.for_state(state);
    r.since = at;
}

void EngineCore::set_radio_later(NodeId node, RadioState state, Time at)
{
    schedule(at, kRadioSet, node.value, static_cast<std::uint64_t>(state));
}

void EngineCore::charge_all(Time at)
{
    for (std::uint32_t i = 0; i < radio_.size(); ++i) {
        const auto& r = radio_[i];
        set_radio(NodeId{i}, r.state, at, r.draw_mw);
    }
}

double EngineCore::max_energy_error() const
{
    double worst = 0.0;
    for (std::uint32_t i = 0; i < radio_.size(); ++i) {
        worst = std::max(worst, ledger_.conservation_error(NodeId{i}));
    }
    return worst;
}

std::uint64_t EngineCore::start_tx(Transmission tx, Role role, std::int32_t slot)
{
    tx.id = next_tx_id_++;
    tx.min_sinr_linear = std::numeric_limits<double>::infinity();
    env_.registry().add(tx);
    tx_busy_[tx.source.value] = tx.id;
    if (tx.receiver_ready) {
        rx_lock_[tx.destination.value] = tx.id;
    }
    if (tracing()) {
        emit(TxStartEvent{tx.start, tx.id, tx.source, role, tx.destination, tx.channel, tx.kind, tx.end,
                          tx.power_dbm, tx.packets, period_at(tx.start), slot});
    }
    return tx.id;
}

void EngineCore::update_sinr(ChannelId channel)
{
    for (auto& tx : env_.registry().all()) {
        if (tx.kind != TxKind::Data || tx.channel != channel || !tx.receiver_ready) continue;
        const double signal = tx.power_mw * env_.gain(tx.source, tx.destination);
        const double sinr = signal / (env_.interference_mw(tx.destination, channel, tx.id) + env_.noise_mw());
        tx.min_sinr_linear = std::min(tx.min_sinr_linear, sinr);
    }
}

Transmission EngineCore::finish_tx(std::uint64_t id, bool decoded, bool aborted)
{
    auto* p = env_.registry().find(id);
    if (!p) {
        throw std::logic_error("finish_tx: unknown transmission " + std::to_string(id));
    }
    Transmission tx = *p;
    env_.registry().remove(id);
    if (tx_busy_[tx.source.value] == id) tx_busy_[tx.source.value] = 0;
    if (rx_lock_[tx.destination.value] == id) rx_lock_[tx.destination.value] = 0;
    const bool attempt = tx.kind == TxKind::Data && tx.receiver_ready;
    const double db = attempt ? sinr_db(tx) : 0.0;
    if (attempt) {
        frame_stats_.add(db);
        sinr_sum_ += db;
        ++summary_.receptions;
        if (!decoded) ++summary_.failed_receptions;
    }
    if (tracing()) {
        emit(TxEndEvent{now_, id, tx.source, tx.destination, attempt, decoded, aborted, db});
    }
    return tx;
}

Time EngineCore::next_boundary(Time t, Time origin) const
{
    if (t <= origin) return origin;
    const auto n = (t - origin + slot_ - Time{1}) / slot_;
    return origin + slot_ * n;
}

void EngineCore::count_delivery(NodeId relay, std::uint32_t packets, Time at)
{
    delivered_ += packets;
    summary_.delivered += packets;
    emit(DeliveryEvent{at, frame_.frame_index, relay, packets});
}

std::vector<NodeId> EngineCore::draw_arrivals()
{
    if (config_.traffic_frames != 0 && frame_count_ >= config_.traffic_frames) {
        return {};
    }
    auto a = traffic_arrivals(config_, traffic_rng_);
    summary_.generated += a.size();
    return a;
}

void EngineCore::record(Time at)
{
    charge_all(at);
    summary_.max_energy_error = std::max(summary_.max_energy_error, max_energy_error());
    summary_records_.push_back(interval_.flush(to_seconds(at), ledger_.energy_residue(), delivered_, config_.scheme,
                                               config_.sinr_threshold_db, config_.seed));
}

void EngineCore::run_frame_end(Time at)
{
    FrameEndEvent ev;
    ev.at = at;
    ev.frame = frame_.frame_index;
    finish_frame(at, ev);

    const Time length = at - frame_.beacon_time;
    interval_.add_frame(frame_stats_, length);
    if (frame_stats_.min_sinr_db) {
        weighted_min_ += *frame_stats_.min_sinr_db * to_seconds(length);
        weighted_min_s_ += to_seconds(length);
    }
    frame_stats_ = WindowStats{};
    ++frame_count_;
    ++summary_.frames;

    if (tracing() || config_.check_invariants) {
        charge_all(at);
        ev.max_energy_error = max_energy_error();
        ev.energy_residue_j = ledger_.energy_residue();
        summary_.max_energy_error = std::max(summary_.max_energy_error, ev.max_energy_error);
        emit(std::move(ev));
    }
    if (config_.max_frames != 0 && frame_count_ >= config_.max_frames) {
        stop_ = true;
        return;
    }
    schedule(at, kFrameStart);
}

RunResult EngineCore::run()
{
    const Time duration = from_seconds(config_.duration_s);
    const Time interval = from_seconds(config_.record_interval_s);
    schedule(Time{0}, kFrameStart);
    for (Time t = interval; t <= duration; t += interval) {
        schedule(t, kRecord, 0, 0, 2);
    }
    schedule(duration, kEnd, 0, 0, 3);

    Time last_record{0};
    while (!queue_.empty() && !stop_) {
        const Event e = queue_.top();
        queue_.pop();
        now_ = e.at;
        switch (e.kind) {
        case kFrameStart:
            frame_stats_ = WindowStats{};
            begin_frame(e.at);
            break;
        case kFrameEnd: run_frame_end(e.at); break;
        case kRecord:
            record(e.at);
            last_record = e.at;
            break;
        case kEnd: stop_ = true; break;
        case kRadioSet: set_radio(NodeId{e.node}, static_cast<RadioState>(e.aux), e.at); break;
        default: dispatch(e);
        }
    }

    // A frame cut short by the end of the run still counts for the run figures.
    if (frame_stats_.min_sinr_db && now_ > frame_.beacon_time) {
        const double w = to_seconds(now_ - frame_.beacon_time);
        weighted_min_ += *frame_stats_.min_sinr_db * w;
        weighted_min_s_ += w;
    }
    if (now_ > last_record || summary_records_.empty()) {
        interval_.add_frame(frame_stats_, now_ - frame_.beacon_time);
        record(now_);
    }

    RunResult out;
    summary_.duration_s = to_seconds(now_);
    if (weighted_min_s_ > 0.0) summary_.time_avg_min_sinr_db = weighted_min_ / weighted_min_s_;
    if (summary_.receptions > 0) summary_.avg_sinr_db = sinr_sum_ / static_cast<double>(summary_.receptions);
    summary_.final_energy_residue_j = ledger_.energy_residue();
    for (std::uint32_t i = 0; i < config_.node_count(); ++i) {
        if (ledger_.battery_powered(NodeId{i}) && ledger_.dead(NodeId{i})) ++summary_.dead_nodes;
    }
    out.records = std::move(summary_records_);
    out.summary = summary_;
    out.ledger = ledger_;
    return out;
}

}  // namespace detail

RunResult run(const SimConfig& config, TraceSink* trace)
{
    config.validate();
    TraceFanout fanout;
    std::optional<InvariantChecker> checker;
    std::optional<TraceTail> tail;
    if (trace) fanout.add(trace);
    if (config.check_invariants) {
        checker.emplace(config, true);
        tail.emplace(24);
        fanout.add(&*tail);
        fanout.add(&*checker);
    }
    TraceSink* sink = fanout.empty() ? nullptr : &fanout;
    auto engine = config.scheme == Scheme::Iaa ? detail::make_iaa_engine(config, sink)
                                                : detail::make_baseline_engine(config, sink);
    try {
        return engine->run();
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(std::string(e.what()) + "\nlast events:\n" + (tail ? tail->text() : std::string{}));
    }
}

}  // namespace wban
