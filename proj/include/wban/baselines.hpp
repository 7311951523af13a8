#pragma once

#include "wban/rng.hpp"
#include "wban/types.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace wban {

struct RelayCandidate {
    NodeId relay;
    double sinr_db = 0.0;
};

/// Opportunistic relay choice: best SINR, lowest id on ties. Empty input
/// means there is nobody to send to this time.
std::optional<NodeId> or_relay_select(std::span<const RelayCandidate> candidates);

struct PowerBounds {
    double min_dbm = -20.0;
    double max_dbm = 0.0;
};

struct PcParams {
    double target_offset_db = 5.0;
    double step_db = 1.0;
    double hysteresis_db = 2.0;
    PowerBounds bounds;
    /// Radio circuitry draw that does not scale with output power.
    double circuit_mw = 30.0;

    void validate() const;
};

/// Fixed step power control with a hysteresis band above the target.
double pc_power_update(double current_dbm, double measured_sinr_db, double target_sinr_db, double step_db,
                       double hysteresis_db, PowerBounds bounds);

/// Transmit draw at output power `power_dbm`: the circuitry floor plus the
/// amplifier share of the full power draw, scaled linearly with output power
/// relative to 0 dBm.
double pc_tx_draw_mw(double power_dbm, double full_tx_mw, double circuit_mw);

/// Plain binary exponential backoff used by the single channel baselines.
struct BebParams {
    std::uint32_t cw_min = 8;
    std::uint32_t cw_max = 128;
    std::uint32_t max_csma_backoffs = 4;
    std::uint32_t max_frame_retries = 3;

    void validate() const;
};

struct BebState {
    std::uint32_t cw = 8;
    std::uint32_t nb = 0;
    std::uint32_t retries = 0;
};

enum class BebVerdict : std::uint8_t { Backoff, Transmit, GiveUp };

/// Fresh attempt for a new packet.
BebState beb_reset(const BebParams& p);

/// After a clear channel assessment.
BebVerdict beb_on_cca(BebState& s, bool clear, const BebParams& p);

/// After a transmission that was not acknowledged.
BebVerdict beb_on_no_ack(BebState& s, const BebParams& p);

}  // namespace wban
