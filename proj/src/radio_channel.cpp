#include "wban/radio_channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wban {

const char* to_string(Role role)
{
    switch (role) {
    case Role::Coordinator: return "coordinator";
    case Role::Relay: return "relay";
    case Role::Source: return "source";
    }
    return "?";
}

std::string to_string(ChannelId channel)
{
    if (channel.is_base()) {
        return "base";
    }
    return "reserved" + std::to_string(channel.index);
}

const char* to_string(TxKind kind)
{
    switch (kind) {
    case TxKind::Data: return "data";
    case TxKind::Ack: return "ack";
    case TxKind::Jam: return "jam";
    }
    return "?";
}

double distance_m(const NodePosition& a, const NodePosition& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void PathLossModel::validate() const
{
    if (!(std::isfinite(exponent_alpha) && exponent_alpha > 0.0)) {
        throw ConfigError("alpha: path loss exponent must be positive");
    }
    if (!(std::isfinite(reference_distance_m) && reference_distance_m > 0.0)) {
        throw ConfigError("ref_distance_m: reference distance must be positive");
    }
    if (!std::isfinite(reference_loss_db)) {
        throw ConfigError("ref_loss_db: reference loss must be finite");
    }
}

double path_loss_db(const PathLossModel& model, double distance)
{
    if (!std::isfinite(distance) || distance < 0.0) {
        throw std::invalid_argument("path_loss_db: distance must be finite and non-negative");
    }
    const double d = std::max(distance, model.reference_distance_m);
    return model.reference_loss_db + 10.0 * model.exponent_alpha * std::log10(d / model.reference_distance_m);
}

double received_power_dbm(double tx_power_dbm, const PathLossModel& model, double distance)
{
    return tx_power_dbm - path_loss_db(model, distance);
}

double compute_sinr_db(double desired_rx_dbm, std::span<const double> interferer_rx_dbm, double noise_dbm)
{
    if (!std::isfinite(noise_dbm)) {
        throw std::invalid_argument("compute_sinr_db: noise floor must be finite");
    }
    double denominator = dbm_to_mw(noise_dbm);
    for (double i : interferer_rx_dbm) {
        denominator += dbm_to_mw(i);
    }
    return linear_to_db(dbm_to_mw(desired_rx_dbm) / denominator);
}

Transmission& TransmitterRegistry::add(Transmission tx)
{
    active_.push_back(tx);
    return active_.back();
}

void TransmitterRegistry::remove(std::uint64_t id)
{
    auto it = std::find_if(active_.begin(), active_.end(), [id](const Transmission& t) { return t.id == id; });
    if (it != active_.end()) {
        active_.erase(it);
    }
}

Transmission* TransmitterRegistry::find(std::uint64_t id)
{
    auto it = std::find_if(active_.begin(), active_.end(), [id](const Transmission& t) { return t.id == id; });
    return it == active_.end() ? nullptr : &*it;
}

const Transmission* TransmitterRegistry::find(std::uint64_t id) const
{
    auto it = std::find_if(active_.begin(), active_.end(), [id](const Transmission& t) { return t.id == id; });
    return it == active_.end() ? nullptr : &*it;
}

std::vector<NodeId> TransmitterRegistry::active_transmitters(ChannelId channel, Time at) const
{
    std::vector<NodeId> nodes;
    for (const auto& tx : active_) {
        if (tx.channel == channel && tx.active_at(at)) {
            nodes.push_back(tx.source);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

std::size_t TransmitterRegistry::count_on(ChannelId channel) const
{
    return static_cast<std::size_t>(
        std::count_if(active_.begin(), active_.end(), [channel](const Transmission& t) { return t.channel == channel; }));
}

ChannelEnvironment::ChannelEnvironment(std::vector<NodePosition> positions, PathLossModel model, double noise_dbm,
                                       double shadowing_sigma_db, std::optional<Rng> shadowing_rng)
    : positions_(std::move(positions)), model_(model), noise_dbm_(noise_dbm), noise_mw_(dbm_to_mw(noise_dbm))
{
    model_.validate();
    if (!std::isfinite(noise_dbm)) {
        throw ConfigError("noise_dbm: noise floor must be finite");
    }
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (positions_[i].node_id.value != i) {
            throw std::invalid_argument("ChannelEnvironment: positions must be indexed by node id");
        }
    }
    const std::size_t n = positions_.size();
    gain_.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double loss = path_loss_db(model_, distance_m(positions_[a], positions_[b]));
            if (shadowing_sigma_db > 0.0 && shadowing_rng) {
                // Box-Muller; links are reciprocal so one draw per unordered pair.
                const double u1 = 1.0 - shadowing_rng->uniform01();
                const double u2 = shadowing_rng->uniform01();
                loss += shadowing_sigma_db * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            }
            const double g = db_to_linear(-loss);
            gain_[a * n + b] = g;
            gain_[b * n + a] = g;
        }
        gain_[a * n + a] = 1.0;
    }
}

double ChannelEnvironment::link_loss_db(NodeId from, NodeId to) const { return -linear_to_db(gain(from, to)); }

double ChannelEnvironment::interference_mw(NodeId receiver, ChannelId channel, std::uint64_t exclude_tx) const
{
    double sum = 0.0;
    for (const auto& tx : registry_.all()) {
        if (tx.channel != channel || tx.id == exclude_tx || tx.source == receiver) {
            continue;
        }
        sum += tx.power_mw * gain(tx.source, receiver);
    }
    return sum;
}

std::vector<NodeId> active_transmitters(const ChannelEnvironment& env, ChannelId channel, Time at)
{
    return env.registry().active_transmitters(channel, at);
}

}  // namespace wban
