#pragma once

#include "wban/rng.hpp"
#include "wban/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wban {

struct NodePosition {
    NodeId node_id;
    double x = 0.0;  // meters
    double y = 0.0;  // meters
};

double distance_m(const NodePosition& a, const NodePosition& b);

/// Log-distance path loss: PL(d) = PL(d0) + 10 alpha log10(d / d0), with
/// distances shorter than d0 clamped to d0.
struct PathLossModel {
    double exponent_alpha = 4.22;
    double reference_loss_db = 40.0;
    double reference_distance_m = 1.0;

    void validate() const;
};

double path_loss_db(const PathLossModel& model, double distance_m);

double received_power_dbm(double tx_power_dbm, const PathLossModel& model, double distance_m);

/// SINR in dB of a desired signal against a set of interferers and the noise
/// floor. Summation happens in linear milliwatts.
double compute_sinr_db(double desired_rx_dbm, std::span<const double> interferer_rx_dbm, double noise_dbm);

struct SinrSample {
    double value_db = 0.0;
    Time measured_at{0};
    ChannelId channel;
    NodeId measuring_node;
};

/// Reported when a sensing node has no receiver to address on the sensed
/// channel. Finite so that it can still flow through dB arithmetic.
inline constexpr double kNoReceiverSinrDb = -200.0;

enum class TxKind : std::uint8_t { Data, Ack, Jam };

const char* to_string(TxKind kind);

/// One transmission on the medium, plus the reception bookkeeping of its
/// intended receiver.
struct Transmission {
    std::uint64_t id = 0;
    NodeId source;
    NodeId destination;
    ChannelId channel;
    Time start{0};
    Time end{0};
    double power_dbm = 0.0;
    double power_mw = 1.0;
    TxKind kind = TxKind::Data;
    std::uint32_t packets = 0;

    bool receiver_ready = false;
    double min_sinr_linear = 0.0;
    bool aborted = false;
    /// Another transmission overlapped it at a receiver that tolerates none.
    bool collided = false;

    bool active_at(Time t) const { return start <= t && t < end; }
};

/// Active transmissions on every channel. Owned by the engine.
class TransmitterRegistry {
public:
    Transmission& add(Transmission tx);
    void remove(std::uint64_t id);
    Transmission* find(std::uint64_t id);
    const Transmission* find(std::uint64_t id) const;

    std::span<Transmission> all() { return active_; }
    std::span<const Transmission> all() const { return active_; }

    /// Nodes with a registered transmission on `channel` whose interval
    /// contains `at`.
    std::vector<NodeId> active_transmitters(ChannelId channel, Time at) const;

    std::size_t count_on(ChannelId channel) const;
    bool empty() const { return active_.empty(); }

private:
    std::vector<Transmission> active_;
};

/// Node geometry, link gains, noise floor and the transmitter registry.
class ChannelEnvironment {
public:
    ChannelEnvironment(std::vector<NodePosition> positions, PathLossModel model, double noise_dbm,
                       double shadowing_sigma_db = 0.0, std::optional<Rng> shadowing_rng = std::nullopt);

    std::size_t node_count() const { return positions_.size(); }
    const NodePosition& position(NodeId node) const { return positions_.at(node.value); }
    std::span<const NodePosition> positions() const { return positions_; }
    const PathLossModel& path_loss_model() const { return model_; }

    double noise_dbm() const { return noise_dbm_; }
    double noise_mw() const { return noise_mw_; }

    /// Linear channel gain from `from` to `to` (received mW per transmitted mW).
    double gain(NodeId from, NodeId to) const { return gain_[from.value * positions_.size() + to.value]; }

    double link_loss_db(NodeId from, NodeId to) const;

    double rx_power_mw(NodeId from, NodeId to, double tx_power_mw) const { return tx_power_mw * gain(from, to); }

    /// Interference power at `receiver` on `channel`, counting every active
    /// transmission except `exclude_tx` and anything `receiver` itself sends.
    double interference_mw(NodeId receiver, ChannelId channel, std::uint64_t exclude_tx = 0) const;

    TransmitterRegistry& registry() { return registry_; }
    const TransmitterRegistry& registry() const { return registry_; }

private:
    std::vector<NodePosition> positions_;
    PathLossModel model_;
    double noise_dbm_;
    double noise_mw_;
    std::vector<double> gain_;
    TransmitterRegistry registry_;
};

std::vector<NodeId> active_transmitters(const ChannelEnvironment& env, ChannelId channel, Time at);

}  // namespace wban
