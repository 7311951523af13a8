#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace wban {

/// Simulation clock resolution. All timestamps are integral nanoseconds so
/// that event ordering never depends on floating point rounding.
using Time = std::chrono::nanoseconds;

inline double to_seconds(Time t) { return std::chrono::duration<double>(t).count(); }

inline Time from_seconds(double seconds)
{
    if (!std::isfinite(seconds)) {
        throw std::invalid_argument("non-finite time value");
    }
    return Time{std::llround(seconds * 1e9)};
}

inline Time from_millis(double ms) { return from_seconds(ms * 1e-3); }

struct NodeId {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const NodeId&) const = default;
};

enum class Role : std::uint8_t { Coordinator, Relay, Source };

const char* to_string(Role role);

/// A radio channel: the shared base channel or one member of the reserved
/// orthogonal set. Reserved indices are unique network-wide, so the sets
/// handed to distinct relays never intersect.
struct ChannelId {
    enum class Kind : std::uint8_t { Base, Reserved };

    Kind kind = Kind::Base;
    std::uint16_t index = 0;

    static constexpr ChannelId base() { return {}; }
    static constexpr ChannelId reserved(std::uint16_t i) { return {Kind::Reserved, i}; }

    constexpr bool is_base() const { return kind == Kind::Base; }
    constexpr bool is_reserved() const { return kind == Kind::Reserved; }

    /// Dense index usable for per-channel arrays: base is 0, reserved i is i + 1.
    constexpr std::size_t dense() const { return is_base() ? 0 : std::size_t{index} + 1; }

    constexpr auto operator<=>(const ChannelId&) const = default;
};

std::string to_string(ChannelId channel);

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Raised when a protocol state machine receives an event that is illegal in
/// its current phase. This is always a simulator bug.
class ProtocolFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for configuration problems; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wban

template <>
struct std::hash<wban::NodeId> {
    std::size_t operator()(wban::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
