#include "wban/trace.hpp"

#include <json.hpp>

namespace wban {

using json = nlohmann::ordered_json;

const char* to_string(Period p)
{
    switch (p) {
    case Period::Beacon: return "beacon";
    case Period::Cap1a: return "cap1a";
    case Period::Cap1b: return "cap1b";
    case Period::Cap2: return "cap2";
    case Period::Tdma: return "tdma";
    }
    return "?";
}

const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::None: return "none";
    case Outcome::Case1: return "case1";
    case Outcome::Case2: return "case2";
    case Outcome::Case3: return "case3";
    case Outcome::Deferred: return "deferred";
    case Outcome::Delivered: return "delivered";
    case Outcome::Failed: return "failed";
    }
    return "?";
}

Time event_time(const TraceEvent& e)
{
    return std::visit([](const auto& ev) { return ev.at; }, e);
}

namespace {

json ids(const std::vector<NodeId>& v)
{
    json a = json::array();
    for (NodeId n : v) a.push_back(n.value);
    return a;
}

std::int64_t ns(Time t) { return t.count(); }

json encode(const FrameStartEvent& e)
{
    return json{{"ev", "frame_start"},   {"t_ns", ns(e.at)},          {"frame", e.frame},
                {"cap1a", ns(e.cap1a_start)}, {"cap1a_end", ns(e.cap1a_end)}, {"cap1b_end", ns(e.cap1b_end)},
                {"cap2_end", ns(e.cap2_end)}, {"frame_end", ns(e.frame_end)}, {"slot_ns", ns(e.slot_duration)},
                {"fixed", ids(e.fixed_slots)},
                {"flexible", e.flexible_slots}, {"pending", ids(e.pending)}};
}

json encode(const PhaseEvent& e)
{
    return json{{"ev", "phase"}, {"t_ns", ns(e.at)}, {"node", e.node.value}, {"from", e.from},
                {"to", e.to},    {"action", e.action}, {"channel", to_string(e.channel)}};
}

json encode(const SenseEvent& e)
{
    json j{{"ev", "sense"}, {"t_ns", ns(e.at)}, {"node", e.node.value}, {"channel", to_string(e.channel)}};
    j["delta_db"] = e.has_receiver ? json(e.delta_db) : json(nullptr);
    return j;
}

json encode(const TxStartEvent& e)
{
    return json{{"ev", "tx_start"},
                {"t_ns", ns(e.at)},
                {"id", e.id},
                {"node", e.node.value},
                {"role", to_string(e.role)},
                {"dst", e.destination.value},
                {"channel", to_string(e.channel)},
                {"kind", to_string(e.kind)},
                {"end_ns", ns(e.end)},
                {"power_dbm", e.power_dbm},
                {"packets", e.packets},
                {"period", to_string(e.period)},
                {"slot", e.slot}};
}

json encode(const TxEndEvent& e)
{
    json j{{"ev", "tx_end"},         {"t_ns", ns(e.at)},        {"id", e.id},
           {"node", e.node.value},   {"dst", e.destination.value}, {"attempt", e.attempt},
           {"decoded", e.decoded},   {"aborted", e.aborted}};
    j["min_sinr_db"] = e.attempt ? json(e.min_sinr_db) : json(nullptr);
    return j;
}

json encode(const CollisionEvent& e)
{
    return json{{"ev", "collision"}, {"t_ns", ns(e.at)}, {"frame", e.frame}, {"channel", to_string(e.channel)},
                {"period", to_string(e.period)}};
}

json encode(const JamEvent& e)
{
    return json{{"ev", "jam"},         {"t_ns", ns(e.at)},          {"frame", e.frame},
                {"relay", e.relay.value}, {"channel", to_string(e.channel)}, {"period", to_string(e.period)},
                {"duration_ns", ns(e.duration)}};
}

json encode(const DeliveryEvent& e)
{
    return json{{"ev", "delivery"}, {"t_ns", ns(e.at)}, {"frame", e.frame}, {"relay", e.relay.value},
                {"packets", e.packets}};
}

json encode(const FrameEndEvent& e)
{
    json outcomes = json::array();
    for (const auto& [n, o] : e.outcomes) outcomes.push_back(json::array({n.value, to_string(o)}));
    json channels = json::array();
    for (const auto& [n, c] : e.channels) channels.push_back(json::array({n.value, to_string(c)}));
    return json{{"ev", "frame_end"},     {"t_ns", ns(e.at)},          {"frame", e.frame},
                {"outcomes", outcomes},  {"channels", channels},      {"energy_error", e.max_energy_error},
                {"energy_residue_j", e.energy_residue_j}};
}

}  // namespace

std::string to_json_line(const TraceEvent& e)
{
    return std::visit([](const auto& ev) { return encode(ev).dump(); }, e);
}

void JsonlTraceWriter::on_event(const TraceEvent& e) { out_ << to_json_line(e) << '\n'; }

void TraceTail::on_event(const TraceEvent& e)
{
    lines_.push_back(to_json_line(e));
    if (lines_.size() > capacity_) lines_.pop_front();
}

std::string TraceTail::text() const
{
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace wban
