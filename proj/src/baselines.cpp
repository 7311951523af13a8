#include "wban/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace wban {

std::optional<NodeId> or_relay_select(std::span<const RelayCandidate> candidates)
{
    std::optional<NodeId> best;
    double best_sinr = 0.0;
    for (const auto& c : candidates) {
        if (!best || c.sinr_db > best_sinr || (c.sinr_db == best_sinr && c.relay < *best)) {
            best = c.relay;
            best_sinr = c.sinr_db;
        }
    }
    return best;
}

void PcParams::validate() const
{
    if (!(step_db > 0.0)) throw ConfigError("pc_step_db: must be positive");
    if (!(hysteresis_db >= 0.0)) throw ConfigError("pc_hysteresis_db: must be non-negative");
    if (!(bounds.min_dbm <= bounds.max_dbm)) throw ConfigError("pc_min_dbm: must not exceed pc_max_dbm");
    if (!(circuit_mw >= 0.0)) throw ConfigError("pc_circuit_mw: must be non-negative");
}

double pc_power_update(double current_dbm, double measured_sinr_db, double target_sinr_db, double step_db,
                       double hysteresis_db, PowerBounds bounds)
{
    double next = current_dbm;
    if (measured_sinr_db < target_sinr_db) {
        next = current_dbm + step_db;
    } else if (measured_sinr_db > target_sinr_db + hysteresis_db) {
        next = current_dbm - step_db;
    }
    return std::clamp(next, bounds.min_dbm, bounds.max_dbm);
}

double pc_tx_draw_mw(double power_dbm, double full_tx_mw, double circuit_mw)
{
    return circuit_mw + (full_tx_mw - circuit_mw) * dbm_to_mw(power_dbm);
}

void BebParams::validate() const
{
    if (cw_min < 1) throw ConfigError("cw_min: must be >= 1");
    if (cw_max < cw_min) throw ConfigError("cw_max: must be >= cw_min");
}

BebState beb_reset(const BebParams& p) { return BebState{p.cw_min, 0, 0}; }

BebVerdict beb_on_cca(BebState& s, bool clear, const BebParams& p)
{
    if (clear) {
        return BebVerdict::Transmit;
    }
    ++s.nb;
    s.cw = std::min(s.cw * 2, p.cw_max);
    if (s.nb > p.max_csma_backoffs) {
        // Channel access failure counts against the frame retry budget.
        return beb_on_no_ack(s, p);
    }
    return BebVerdict::Backoff;
}

BebVerdict beb_on_no_ack(BebState& s, const BebParams& p)
{
    ++s.retries;
    s.nb = 0;
    s.cw = p.cw_min;
    return s.retries > p.max_frame_retries ? BebVerdict::GiveUp : BebVerdict::Backoff;
}

}  // namespace wban
