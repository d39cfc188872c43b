#include "farmsim/ferry.hpp"

#include <cmath>
#include <stdexcept>

namespace farmsim::ferry {

namespace {

SimTime travel_s(const Position& from, const Position& to, double speed_mps) {
    double d = distance_m(from, to);
    return static_cast<SimTime>(std::llround(d / speed_mps));
}

const Position& position_of(const std::map<NodeId, Position>& positions, NodeId n) {
    auto it = positions.find(n);
    if (it == positions.end())
        throw std::invalid_argument("ferry route references unknown node " +
                                    std::to_string(n));
    return it->second;
}

} // namespace

std::vector<PlannedVisit> plan_flyover(const FerryPlan& plan,
                                       const std::map<NodeId, Position>& positions,
                                       SimTime duration_s) {
    if (plan.interval_s < kMinIntervalS || plan.interval_s > kMaxIntervalS)
        throw std::invalid_argument("ferry interval outside [3600, 86400] s");
    if (plan.speed_mps <= 0.0)
        throw std::invalid_argument("ferry speed must be positive");
    if (plan.route.empty())
        throw std::invalid_argument("ferry route is empty");

    // leg times are fixed per cycle, compute once
    std::vector<SimTime> offset_s;
    std::vector<SimTime> return_s;
    offset_s.reserve(plan.route.size());
    return_s.reserve(plan.route.size());
    SimTime cum = 0;
    const Position* prev = &plan.base;
    for (NodeId n : plan.route) {
        const Position& here = position_of(positions, n);
        cum += travel_s(*prev, here, plan.speed_mps);
        offset_s.push_back(cum);
        return_s.push_back(travel_s(here, plan.base, plan.speed_mps));
        prev = &here;
    }

    std::vector<PlannedVisit> visits;
    for (std::int64_t cycle = 0; cycle * plan.interval_s < duration_s; ++cycle) {
        SimTime depart = cycle * plan.interval_s;
        for (std::size_t i = 0; i < plan.route.size(); ++i) {
            visits.push_back({depart + offset_s[i], plan.drone, plan.route[i], cycle,
                              return_s[i]});
        }
    }
    return visits;
}

std::optional<PlannedVisit> summon_visit(const FerryPlan& plan,
                                         const std::map<NodeId, Position>& positions,
                                         const SummonRequest& req) {
    auto it = positions.find(req.requester);
    if (it == positions.end()) return std::nullopt;
    PlannedVisit v;
    v.at = req.issued_at + req.dispatch_latency_s;
    v.drone = plan.drone;
    v.node = req.requester;
    v.cycle = -1;
    v.return_leg_s = travel_s(it->second, plan.base, plan.speed_mps);
    return v;
}

} // namespace farmsim::ferry
