#include "wban/superframe.hpp"

#include <algorithm>
#include <set>

namespace wban {

void FrameTiming::validate() const
{
    if (beacon <= Time::zero()) throw ConfigError("beacon_bytes: beacon duration must be positive");
    if (cap1a <= Time::zero()) throw ConfigError("cap1a_ms: must be positive");
    if (cap1b < Time::zero()) throw ConfigError("cap1b_ms: must be non-negative");
    if (cap2 < Time::zero()) throw ConfigError("cap2_ms: must be non-negative");
    if (slot <= Time::zero()) throw ConfigError("tdma_slot_ms: must be positive");
}

Interval Superframe::slot(std::uint32_t index) const
{
    const Time s = tdma_start() + slot_duration * index;
    return {s, s + slot_duration};
}

std::optional<std::uint32_t> Superframe::fixed_slot_of(NodeId node) const
{
    for (const auto& a : fixed_slots) {
        if (a.node_id == node) {
            return a.slot_index;
        }
    }
    return std::nullopt;
}

Superframe build_superframe(std::uint64_t frame_index, Time beacon_time, std::span<const NodeId> fixed_nodes,
                            std::uint32_t n_flexible, const FrameTiming& timing)
{
    timing.validate();
    if (!fixed_nodes.empty() && n_flexible == 0) {
        throw ConfigError("flexible slot count must be >= 1 when fixed slots are present (p > m)");
    }
    std::set<NodeId> seen;
    for (NodeId n : fixed_nodes) {
        if (!seen.insert(n).second) {
            throw std::invalid_argument("build_superframe: node " + std::to_string(n.value) +
                                        " assigned two fixed slots");
        }
    }

    Superframe f;
    f.frame_index = frame_index;
    f.beacon_time = beacon_time;
    f.beacon = {beacon_time, beacon_time + timing.beacon};
    f.cap1a = {f.beacon.end, f.beacon.end + timing.cap1a};
    f.cap1b = {f.cap1a.end, f.cap1a.end + timing.cap1b};
    f.cap2 = {f.cap1b.end, f.cap1b.end + timing.cap2};
    f.slot_duration = timing.slot;
    f.flexible_slot_count = n_flexible;
    f.fixed_slots.reserve(fixed_nodes.size());
    for (std::size_t i = 0; i < fixed_nodes.size(); ++i) {
        f.fixed_slots.push_back({static_cast<std::uint32_t>(i), fixed_nodes[i]});
    }
    if (f.end() <= f.beacon_time) {
        throw ConfigError("superframe length must be positive");
    }
    return f;
}

Superframe build_superframe(const Superframe& prev, std::span<const NodeId> fixed_nodes, std::uint32_t n_flexible,
                            const FrameTiming& timing)
{
    return build_superframe(prev.frame_index + 1, prev.end(), fixed_nodes, n_flexible, timing);
}

Superframe build_contention_frame(std::uint64_t frame_index, Time beacon_time, const FrameTiming& timing)
{
    timing.validate();
    Superframe f;
    f.frame_index = frame_index;
    f.beacon_time = beacon_time;
    f.beacon = {beacon_time, beacon_time + timing.beacon};
    const Time cap_len = timing.cap1a + timing.cap1b + timing.cap2;
    f.cap1a = {f.beacon.end, f.beacon.end + cap_len};
    f.cap1b = {f.cap1a.end, f.cap1a.end};
    f.cap2 = {f.cap1a.end, f.cap1a.end};
    f.slot_duration = timing.slot;
    return f;
}

std::optional<std::uint32_t> flexible_slot_contend(NodeId node, const Superframe& frame, Rng& rng,
                                                   std::span<const bool> occupied)
{
    if (frame.fixed_slot_of(node)) {
        throw std::logic_error("flexible_slot_contend: node " + std::to_string(node.value) + " already holds a fixed slot");
    }
    std::vector<std::uint32_t> empty;
    empty.reserve(frame.flexible_slot_count);
    for (std::uint32_t s = frame.fixed_count(); s < frame.total_slots(); ++s) {
        if (s < occupied.size() && occupied[s]) {
            continue;
        }
        empty.push_back(s);
    }
    if (empty.empty()) {
        return std::nullopt;
    }
    return empty[rng.uniform_below(empty.size())];
}

void ActivityTracker::push_frame(std::span<const NodeId> delivered)
{
    head_ = (head_ + 1) % kWindow;
    for (auto& h : history_) {
        h[head_] = false;
    }
    for (NodeId n : delivered) {
        history_.at(n.value)[head_] = true;
    }
}

bool ActivityTracker::active(NodeId node) const
{
    const auto& h = history_.at(node.value);
    return std::any_of(h.begin(), h.end(), [](bool b) { return b; });
}

std::vector<NodeId> ActivityTracker::active_nodes() const
{
    std::vector<NodeId> out;
    for (std::uint32_t i = 0; i < history_.size(); ++i) {
        if (active(NodeId{i})) {
            out.push_back(NodeId{i});
        }
    }
    return out;
}

ActivityTracker update_activity(ActivityTracker tracker, std::span<const NodeId> frame_deliveries)
{
    tracker.push_frame(frame_deliveries);
    return tracker;
}

}  // namespace wban
