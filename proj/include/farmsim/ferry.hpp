#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "farmsim/core.hpp"

namespace farmsim::ferry {

constexpr SimTime kMinIntervalS = 3'600;
constexpr SimTime kMaxIntervalS = 86'400;

/// Recurring drone collection schedule. The drone departs base every
/// interval_s, visits route nodes in order at travel time over the leg
/// distances, and flies each node's cargo straight back to the backend.
struct FerryPlan {
    DroneId drone = 0;
    SimTime interval_s = kMaxIntervalS;
    std::vector<NodeId> route;
    double speed_mps = 10.0;
    double range_m = 100.0; // offload works within this distance of the node
    SimTime dispatch_latency_s = 300;
    Position base;

    friend bool operator==(const FerryPlan&, const FerryPlan&) = default;
};

struct SummonRequest {
    NodeId requester = 0;
    SimTime issued_at = 0;
    SimTime dispatch_latency_s = 300; // seconds until drone arrival

    friend bool operator==(const SummonRequest&, const SummonRequest&) = default;
};

struct PlannedVisit {
    SimTime at = 0;
    DroneId drone = 0;
    NodeId node = 0;
    std::int64_t cycle = 0;    // -1 for summoned visits
    SimTime return_leg_s = 0;  // node back to base, delivery lands at at + this
};

/// All flyover visits within [0, duration_s): one departure per interval
/// starting at t = 0, visit times from cumulative leg distance over speed,
/// rounded to whole seconds. Throws std::invalid_argument when interval_s
/// is outside [3600, 86400], speed_mps <= 0, or the route references a
/// node with no known position.
std::vector<PlannedVisit> plan_flyover(const FerryPlan& plan,
                                       const std::map<NodeId, Position>& positions,
                                       SimTime duration_s);

/// Visit for a single summon, landing exactly at issued_at plus the
/// request's dispatch latency. Returns nullopt when the requester is
/// unknown.
std::optional<PlannedVisit> summon_visit(const FerryPlan& plan,
                                         const std::map<NodeId, Position>& positions,
                                         const SummonRequest& req);

/// Exactly-once guard: records (node, seq) pairs a drone has already
/// delivered so a reading can never reach the backend twice by air.
class CarriedSet {
public:
    /// True when the pair was not yet carried (and marks it carried).
    bool mark(NodeId node, std::uint32_t seq) {
        return carried_.insert({node, seq}).second;
    }

    std::size_t size() const { return carried_.size(); }

private:
    std::set<std::pair<NodeId, std::uint32_t>> carried_;
};

} // namespace farmsim::ferry
