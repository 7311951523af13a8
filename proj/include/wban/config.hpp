#pragma once

#include "wban/baselines.hpp"
#include "wban/energy.hpp"
#include "wban/mac_iaa.hpp"
#include "wban/radio_channel.hpp"
#include "wban/rng.hpp"
#include "wban/superframe.hpp"
#include "wban/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wban {

enum class Scheme : std::uint8_t { Iaa, Or, Pc };

const char* to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

struct SimConfig {
    double duration_s = 3000.0;
    std::uint32_t n_sources = 12;
    std::uint32_t n_relays = 4;
    double area_width_m = 2.0;
    double area_height_m = 2.0;
    std::string positions_file;

    double tx_power_dbm = 0.0;
    double noise_dbm = -100.0;
    double data_rate_bps = 250000.0;
    std::uint32_t packet_bytes = 12;
    std::uint32_t ack_bytes = 11;
    std::uint32_t beacon_bytes = 20;
    double alpha = 4.22;
    double ref_loss_db = 40.0;
    double ref_distance_m = 1.0;
    double shadowing_sigma_db = 0.0;

    double sinr_threshold_db = 20.0;
    double decode_threshold_db = 5.0;
    Scheme scheme = Scheme::Iaa;
    std::uint64_t seed = 1;

    double cap1a_ms = 20.0;
    double cap1b_ms = 10.0;
    double cap2_ms = 15.0;
    double tdma_slot_ms = 2.0;
    double backoff_slot_ms = 0.32;
    std::uint32_t cw_min = 8;
    std::uint32_t cw_max = 128;
    std::uint32_t q_thr = 2;
    std::uint32_t max_retries = 4;
    std::uint32_t max_csma_backoffs = 4;
    std::uint32_t max_frame_retries = 3;
    std::uint32_t max_aggregate = 4;
    std::uint32_t relay_buffer_limit = 32;

    double p_traffic = 1.0;
    /// Arrivals only happen in the first this-many frames; 0 means always.
    std::uint64_t traffic_frames = 0;

    double tx_mw = 52.2;
    double rx_mw = 56.4;
    double listen_mw = 56.4;
    double idle_mw = 1.28;
    double sleep_mw = 0.0;
    double initial_energy_j = 250.0;
    /// 0 means the coordinator is mains powered.
    double coordinator_energy_j = 0.0;

    double pc_target_offset_db = 5.0;
    double pc_step_db = 1.0;
    double pc_hysteresis_db = 2.0;
    double pc_min_dbm = -20.0;
    double pc_max_dbm = 0.0;
    double pc_circuit_mw = 30.0;
    /// Raise the link power one step when a transmission goes unacknowledged.
    bool pc_raise_on_loss = false;

    double record_interval_s = 30.0;
    bool check_invariants = false;
    /// Stop after this many frames; 0 runs for duration_s.
    std::uint64_t max_frames = 0;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    /// Sets one field from its text form. Unknown keys and unparsable values
    /// raise ConfigError.
    void set(std::string_view key, std::string_view value);

    /// Every field as (key, value) in a fixed order. Feeding the pairs back
    /// through set() reproduces the config exactly.
    std::vector<std::pair<std::string, std::string>> to_key_values() const;

    std::uint32_t node_count() const { return 1 + n_relays + n_sources; }

    Time packet_airtime() const;
    Time ack_airtime() const;
    Time beacon_airtime() const;
    Time backoff_slot() const { return from_millis(backoff_slot_ms); }

    FrameTiming frame_timing() const;
    MacParams mac_params() const;
    BebParams beb_params() const;
    PcParams pc_params() const;
    PowerDraws power_draws() const;
    PathLossModel path_loss() const;
};

/// Node numbering: coordinator 0, relays 1..R, sources R+1..R+N.
inline NodeId coordinator_id() { return NodeId{0}; }
inline NodeId relay_id(const SimConfig& c, std::uint32_t i) { (void)c; return NodeId{1 + i}; }
inline NodeId source_id(const SimConfig& c, std::uint32_t i) { return NodeId{1 + c.n_relays + i}; }
Role role_of(const SimConfig& c, NodeId node);

/// Reads `key = value` lines; '#' starts a comment.
SimConfig load_config(const std::filesystem::path& path, SimConfig base = {});
void apply_config_text(SimConfig& config, std::string_view text, std::string_view origin = "<text>");

/// Parses "key=value" as given on the command line.
void apply_override(SimConfig& config, std::string_view assignment);

std::string format_double(double v);

/// Coordinator in the middle, relays on the midpoints of a centred 1 m
/// square, sources uniform in the area (or read from positions_file).
std::vector<NodePosition> place_nodes(const SimConfig& config, Rng& rng);

/// Per-source streams for the arrival process.
std::vector<Rng> traffic_streams(const SimConfig& config);

/// Sources with new data this frame; each source independently with
/// probability p_traffic, one draw from its own stream.
std::vector<NodeId> traffic_arrivals(const SimConfig& config, std::span<Rng> streams);

/// Stream ids for the non-node random processes.
namespace stream_ids {
inline constexpr std::uint64_t kPlacement = 1ULL << 40;
inline constexpr std::uint64_t kShadowing = 2ULL << 40;
inline constexpr std::uint64_t kTrafficBase = 3ULL << 40;
}  // namespace stream_ids

}  // namespace wban
