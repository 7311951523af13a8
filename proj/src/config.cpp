#include "wban/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

namespace wban {

const char* to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::Iaa: return "iaa";
    case Scheme::Or: return "or";
    case Scheme::Pc: return "pc";
    }
    return "?";
}

Scheme parse_scheme(std::string_view text)
{
    if (text == "iaa") return Scheme::Iaa;
    if (text == "or") return Scheme::Or;
    if (text == "pc") return Scheme::Pc;
    throw ConfigError("scheme: expected one of iaa, or, pc, got '" + std::string(text) + "'");
}

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, end);
}

namespace {

using Member = std::variant<double SimConfig::*, std::uint32_t SimConfig::*, std::uint64_t SimConfig::*,
                            bool SimConfig::*, std::string SimConfig::*, Scheme SimConfig::*>;

struct Field {
    const char* name;
    Member member;
};

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        {"duration_s", &SimConfig::duration_s},
        {"n_sources", &SimConfig::n_sources},
        {"n_relays", &SimConfig::n_relays},
        {"area_width_m", &SimConfig::area_width_m},
        {"area_height_m", &SimConfig::area_height_m},
        {"positions_file", &SimConfig::positions_file},
        {"tx_power_dbm", &SimConfig::tx_power_dbm},
        {"noise_dbm", &SimConfig::noise_dbm},
        {"data_rate_bps", &SimConfig::data_rate_bps},
        {"packet_bytes", &SimConfig::packet_bytes},
        {"ack_bytes", &SimConfig::ack_bytes},
        {"beacon_bytes", &SimConfig::beacon_bytes},
        {"alpha", &SimConfig::alpha},
        {"ref_loss_db", &SimConfig::ref_loss_db},
        {"ref_distance_m", &SimConfig::ref_distance_m},
        {"shadowing_sigma_db", &SimConfig::shadowing_sigma_db},
        {"sinr_threshold_db", &SimConfig::sinr_threshold_db},
        {"decode_threshold_db", &SimConfig::decode_threshold_db},
        {"scheme", &SimConfig::scheme},
        {"seed", &SimConfig::seed},
        {"cap1a_ms", &SimConfig::cap1a_ms},
        {"cap1b_ms", &SimConfig::cap1b_ms},
        {"cap2_ms", &SimConfig::cap2_ms},
        {"tdma_slot_ms", &SimConfig::tdma_slot_ms},
        {"backoff_slot_ms", &SimConfig::backoff_slot_ms},
        {"cw_min", &SimConfig::cw_min},
        {"cw_max", &SimConfig::cw_max},
        {"q_thr", &SimConfig::q_thr},
        {"max_retries", &SimConfig::max_retries},
        {"max_csma_backoffs", &SimConfig::max_csma_backoffs},
        {"max_frame_retries", &SimConfig::max_frame_retries},
        {"max_aggregate", &SimConfig::max_aggregate},
        {"relay_buffer_limit", &SimConfig::relay_buffer_limit},
        {"p_traffic", &SimConfig::p_traffic},
        {"traffic_frames", &SimConfig::traffic_frames},
        {"tx_mw", &SimConfig::tx_mw},
        {"rx_mw", &SimConfig::rx_mw},
        {"listen_mw", &SimConfig::listen_mw},
        {"idle_mw", &SimConfig::idle_mw},
        {"sleep_mw", &SimConfig::sleep_mw},
        {"initial_energy_j", &SimConfig::initial_energy_j},
        {"coordinator_energy_j", &SimConfig::coordinator_energy_j},
        {"pc_target_offset_db", &SimConfig::pc_target_offset_db},
        {"pc_step_db", &SimConfig::pc_step_db},
        {"pc_hysteresis_db", &SimConfig::pc_hysteresis_db},
        {"pc_min_dbm", &SimConfig::pc_min_dbm},
        {"pc_max_dbm", &SimConfig::pc_max_dbm},
        {"pc_circuit_mw", &SimConfig::pc_circuit_mw},
        {"pc_raise_on_loss", &SimConfig::pc_raise_on_loss},
        {"record_interval_s", &SimConfig::record_interval_s},
        {"check_invariants", &SimConfig::check_invariants},
        {"max_frames", &SimConfig::max_frames},
    };
    return table;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected)
{
    throw ConfigError(std::string(key) + ": expected " + expected + ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, const char* expected)
{
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        bad_value(key, value, expected);
    }
    return out;
}

void require(bool ok, const char* message)
{
    if (!ok) throw ConfigError(message);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void SimConfig::set(std::string_view key, std::string_view raw)
{
    const std::string_view value = trim(raw);
    for (const auto& f : fields()) {
        if (key != f.name) continue;
        std::visit(
            [&](auto member) {
                using M = std::remove_reference_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<M, double>) {
                    this->*member = parse_number<double>(key, value, "a number");
                } else if constexpr (std::is_same_v<M, std::uint32_t>) {
                    this->*member = parse_number<std::uint32_t>(key, value, "a non-negative integer");
                } else if constexpr (std::is_same_v<M, std::uint64_t>) {
                    this->*member = parse_number<std::uint64_t>(key, value, "a non-negative integer");
                } else if constexpr (std::is_same_v<M, bool>) {
                    if (value == "true" || value == "1") this->*member = true;
                    else if (value == "false" || value == "0") this->*member = false;
                    else bad_value(key, value, "true or false");
                } else if constexpr (std::is_same_v<M, std::string>) {
                    this->*member = std::string(value);
                } else {
                    this->*member = parse_scheme(value);
                }
            },
            f.member);
        return;
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> SimConfig::to_key_values() const
{
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(fields().size());
    for (const auto& f : fields()) {
        std::string text = std::visit(
            [&](auto member) -> std::string {
                using M = std::remove_cvref_t<decltype(this->*member)>;
                const auto& v = this->*member;
                if constexpr (std::is_same_v<M, double>) return format_double(v);
                else if constexpr (std::is_same_v<M, bool>) return v ? "true" : "false";
                else if constexpr (std::is_same_v<M, std::string>) return v;
                else if constexpr (std::is_same_v<M, Scheme>) return to_string(v);
                else return std::to_string(v);
            },
            f.member);
        out.emplace_back(f.name, std::move(text));
    }
    return out;
}

void SimConfig::validate() const
{
    require(finite(duration_s) && duration_s > 0.0, "duration_s: must be positive");
    require(n_sources >= 1, "n_sources: must be >= 1");
    require(n_relays >= 1, "n_relays: must be >= 1");
    require(n_relays <= 60000, "n_relays: too many relays");
    require(finite(area_width_m) && area_width_m > 0.0, "area_width_m: must be positive");
    require(finite(area_height_m) && area_height_m > 0.0, "area_height_m: must be positive");
    require(finite(tx_power_dbm), "tx_power_dbm: must be finite");
    require(finite(noise_dbm), "noise_dbm: must be finite");
    require(finite(data_rate_bps) && data_rate_bps > 0.0, "data_rate_bps: must be positive");
    require(packet_bytes >= 1, "packet_bytes: must be >= 1");
    require(ack_bytes >= 1, "ack_bytes: must be >= 1");
    require(beacon_bytes >= 1, "beacon_bytes: must be >= 1");
    path_loss().validate();
    require(finite(shadowing_sigma_db) && shadowing_sigma_db >= 0.0, "shadowing_sigma_db: must be >= 0");
    require(finite(sinr_threshold_db), "sinr_threshold_db: must be finite");
    require(finite(decode_threshold_db), "decode_threshold_db: must be finite");
    require(finite(backoff_slot_ms) && backoff_slot_ms > 0.0, "backoff_slot_ms: must be positive");
    frame_timing().validate();
    mac_params().validate();
    beb_params().validate();
    pc_params().validate();
    require(max_aggregate >= 1, "max_aggregate: must be >= 1");
    require(packet_airtime() * max_aggregate + ack_airtime() <= frame_timing().slot,
            "max_aggregate: aggregated burst plus ack does not fit a TDMA slot");
    require(packet_airtime() + ack_airtime() + backoff_slot() < frame_timing().cap1a,
            "cap1a_ms: too short for one sensed transmission");
    require(relay_buffer_limit >= 1, "relay_buffer_limit: must be >= 1");
    require(finite(p_traffic) && p_traffic >= 0.0 && p_traffic <= 1.0, "p_traffic: must lie in [0, 1]");
    for (double mw : {tx_mw, rx_mw, listen_mw, idle_mw, sleep_mw}) {
        require(finite(mw) && mw >= 0.0, "tx_mw/rx_mw/listen_mw/idle_mw/sleep_mw: power draws must be >= 0");
    }
    require(pc_circuit_mw <= tx_mw, "pc_circuit_mw: must not exceed tx_mw");
    require(finite(initial_energy_j) && initial_energy_j > 0.0, "initial_energy_j: must be positive");
    require(finite(coordinator_energy_j) && coordinator_energy_j >= 0.0, "coordinator_energy_j: must be >= 0");
    require(finite(record_interval_s) && record_interval_s > 0.0, "record_interval_s: must be positive");
}

Time SimConfig::packet_airtime() const { return from_seconds(packet_bytes * 8.0 / data_rate_bps); }
Time SimConfig::ack_airtime() const { return from_seconds(ack_bytes * 8.0 / data_rate_bps); }
Time SimConfig::beacon_airtime() const { return from_seconds(beacon_bytes * 8.0 / data_rate_bps); }

FrameTiming SimConfig::frame_timing() const
{
    FrameTiming t;
    t.beacon = beacon_airtime();
    t.cap1a = from_millis(cap1a_ms);
    t.cap1b = from_millis(cap1b_ms);
    t.cap2 = from_millis(cap2_ms);
    t.slot = from_millis(tdma_slot_ms);
    return t;
}

MacParams SimConfig::mac_params() const
{
    return MacParams{cw_min, cw_max, q_thr, max_retries, sinr_threshold_db};
}

BebParams SimConfig::beb_params() const { return BebParams{cw_min, cw_max, max_csma_backoffs, max_frame_retries}; }

PcParams SimConfig::pc_params() const
{
    return PcParams{pc_target_offset_db, pc_step_db, pc_hysteresis_db, {pc_min_dbm, pc_max_dbm}, pc_circuit_mw};
}

PowerDraws SimConfig::power_draws() const { return PowerDraws{tx_mw, rx_mw, listen_mw, idle_mw, sleep_mw}; }

PathLossModel SimConfig::path_loss() const { return PathLossModel{alpha, ref_loss_db, ref_distance_m}; }

Role role_of(const SimConfig& c, NodeId node)
{
    if (node.value == 0) return Role::Coordinator;
    if (node.value <= c.n_relays) return Role::Relay;
    if (node.value < c.node_count()) return Role::Source;
    throw std::out_of_range("role_of: node " + std::to_string(node.value) + " out of range");
}

void apply_config_text(SimConfig& config, std::string_view text, std::string_view origin)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

SimConfig load_config(const std::filesystem::path& path, SimConfig base)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(base, ss.str(), path.string());
    return base;
}

void apply_override(SimConfig& config, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
    }
    config.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<NodePosition> place_nodes(const SimConfig& config, Rng& rng)
{
    std::vector<NodePosition> pos(config.node_count());
    for (std::uint32_t i = 0; i < pos.size(); ++i) {
        pos[i].node_id = NodeId{i};
    }
    const double cx = config.area_width_m / 2.0;
    const double cy = config.area_height_m / 2.0;
    pos[0].x = cx;
    pos[0].y = cy;

    static constexpr double kSquare[4][2] = {{0.0, -0.5}, {0.0, 0.5}, {-0.5, 0.0}, {0.5, 0.0}};
    for (std::uint32_t i = 0; i < config.n_relays; ++i) {
        auto& p = pos[relay_id(config, i).value];
        if (config.n_relays <= 4) {
            p.x = cx + kSquare[i][0];
            p.y = cy + kSquare[i][1];
        } else {
            const double a = -M_PI / 2.0 + 2.0 * M_PI * i / config.n_relays;
            p.x = cx + 0.5 * std::cos(a);
            p.y = cy + 0.5 * std::sin(a);
        }
    }

    if (config.positions_file.empty()) {
        for (std::uint32_t i = 0; i < config.n_sources; ++i) {
            auto& p = pos[source_id(config, i).value];
            p.x = rng.uniform(0.0, config.area_width_m);
            p.y = rng.uniform(0.0, config.area_height_m);
        }
        return pos;
    }

    // "id x y" per line; ids not listed keep their default placement.
    std::ifstream in(config.positions_file);
    if (!in) {
        throw ConfigError("positions_file: cannot open " + config.positions_file);
    }
    std::vector<bool> seen(pos.size(), false);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::uint32_t id = 0;
        double x = 0.0, y = 0.0;
        if (!(ls >> id)) continue;
        if (!(ls >> x >> y)) throw ConfigError("positions_file: malformed line '" + line + "'");
        if (id >= pos.size()) throw ConfigError("positions_file: node id " + std::to_string(id) + " out of range");
        if (x < 0.0 || x > config.area_width_m || y < 0.0 || y > config.area_height_m) {
            throw ConfigError("positions_file: node " + std::to_string(id) + " lies outside the area");
        }
        pos[id].x = x;
        pos[id].y = y;
        seen[id] = true;
    }
    for (std::uint32_t i = 0; i < config.n_sources; ++i) {
        const auto id = source_id(config, i).value;
        if (!seen[id]) {
            throw ConfigError("positions_file: missing source " + std::to_string(id));
        }
    }
    return pos;
}

std::vector<Rng> traffic_streams(const SimConfig& config)
{
    std::vector<Rng> out;
    out.reserve(config.n_sources);
    for (std::uint32_t i = 0; i < config.n_sources; ++i) {
        out.push_back(Rng::stream(config.seed, stream_ids::kTrafficBase + source_id(config, i).value));
    }
    return out;
}

std::vector<NodeId> traffic_arrivals(const SimConfig& config, std::span<Rng> streams)
{
    if (streams.size() != config.n_sources) {
        throw std::invalid_argument("traffic_arrivals: one stream per source required");
    }
    std::vector<NodeId> pending;
    for (std::uint32_t i = 0; i < config.n_sources; ++i) {
        // Always draw so the stream position does not depend on p_traffic edge cases.
        if (streams[i].uniform01() < config.p_traffic) {
            pending.push_back(source_id(config, i));
        }
    }
    return pending;
}

}  // namespace wban
