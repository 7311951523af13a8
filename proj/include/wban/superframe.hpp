#pragma once

#include "wban/rng.hpp"
#include "wban/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wban {

/// Half-open time interval [start, end).
struct Interval {
    Time start{0};
    Time end{0};

    Time length() const { return end - start; }
    bool contains(Time t) const { return start <= t && t < end; }
    bool covers(Time from, Time to) const { return start <= from && to <= end; }
};

struct SlotAssignment {
    std::uint32_t slot_index = 0;
    NodeId node_id;
};

/// Period lengths of one superframe.
struct FrameTiming {
    Time beacon{from_millis(0.64)};
    Time cap1a{from_millis(20.0)};
    Time cap1b{from_millis(10.0)};
    Time cap2{from_millis(15.0)};
    Time slot{from_millis(2.0)};

    void validate() const;
};

/// Beacon contents: period boundaries and the TDMA slot map.
///
/// Layout is beacon -> CAP-1A -> CAP-1B -> CAP-2 -> fixed slots -> flexible
/// slots, all contiguous. Schemes without a TDMA part simply carry zero slots.
struct Superframe {
    std::uint64_t frame_index = 0;
    Time beacon_time{0};
    Interval beacon;
    Interval cap1a;
    Interval cap1b;
    Interval cap2;
    std::vector<SlotAssignment> fixed_slots;
    std::uint32_t flexible_slot_count = 0;
    Time slot_duration{0};

    std::uint32_t fixed_count() const { return static_cast<std::uint32_t>(fixed_slots.size()); }
    std::uint32_t total_slots() const { return fixed_count() + flexible_slot_count; }
    Time tdma_start() const { return cap2.end; }
    Time end() const { return tdma_start() + slot_duration * total_slots(); }
    /// Time from the end of the beacon to the end of the last slot.
    Time body_length() const { return end() - beacon.end; }
    Interval slot(std::uint32_t index) const;
    Interval cap() const { return {cap1a.start, cap2.end}; }
    std::optional<std::uint32_t> fixed_slot_of(NodeId node) const;
    bool is_flexible(std::uint32_t slot_index) const
    {
        return slot_index >= fixed_count() && slot_index < total_slots();
    }
};

/// Lays out a superframe starting at `beacon_time`. Fixed slots go to
/// `fixed_nodes` in the given order; `n_flexible` contention slots follow.
/// Throws ConfigError when the result would violate p > m.
Superframe build_superframe(std::uint64_t frame_index, Time beacon_time, std::span<const NodeId> fixed_nodes,
                            std::uint32_t n_flexible, const FrameTiming& timing);

/// The frame that follows `prev`.
Superframe build_superframe(const Superframe& prev, std::span<const NodeId> fixed_nodes, std::uint32_t n_flexible,
                            const FrameTiming& timing);

/// Superframe for the single-CAP baselines: the whole contention period sits
/// in cap1a and there is no TDMA part.
Superframe build_contention_frame(std::uint64_t frame_index, Time beacon_time, const FrameTiming& timing);

/// A node competing for the flexible part picks uniformly among the empty
/// flexible slots. `occupied` (indexed by global slot index, may be empty)
/// marks slots already known to be taken. Returns the global slot index.
std::optional<std::uint32_t> flexible_slot_contend(NodeId node, const Superframe& frame, Rng& rng,
                                                   std::span<const bool> occupied = {});

/// Remembers, per node, whether the coordinator heard from it in each of the
/// last three frames. A node is active iff any of those flags is set.
class ActivityTracker {
public:
    static constexpr std::size_t kWindow = 3;

    explicit ActivityTracker(std::size_t node_count = 0) : history_(node_count) {}

    void push_frame(std::span<const NodeId> delivered);
    bool active(NodeId node) const;
    std::vector<NodeId> active_nodes() const;
    std::size_t node_count() const { return history_.size(); }

private:
    std::vector<std::array<bool, kWindow>> history_;
    std::size_t head_ = 0;
};

ActivityTracker update_activity(ActivityTracker tracker, std::span<const NodeId> frame_deliveries);

}  // namespace wban
