#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace farmsim {

/// Simulated time in whole seconds from run start. Resolution is one second;
/// sub-second quantities (airtime, upload latency) are carried as separate
/// millisecond values and never advance the clock.
using SimTime = std::int64_t;

constexpr SimTime kSecondsPerDay = 86'400;

using NodeId = std::uint16_t;
using GatewayId = std::uint16_t;
using DroneId = std::uint16_t;

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance_m(const Position& a, const Position& b);

/// Ground-plane obstruction segment (building edge, tree line). The z
/// coordinates of endpoints are ignored; blocking is a 2-D test.
struct Obstruction {
    Position a;
    Position b;

    friend bool operator==(const Obstruction&, const Obstruction&) = default;
};

/// True when segments pq and rs intersect in the ground plane, including
/// touching endpoints and collinear overlap.
bool segments_intersect_2d(const Position& p, const Position& q,
                           const Position& r, const Position& s);

/// True when the straight line a-b crosses no obstruction. Throws
/// std::invalid_argument when a == b in the ground plane.
bool line_of_sight(const std::vector<Obstruction>& obstructions,
                   const Position& a, const Position& b);

enum class Connectivity { GatewayReachable, Disconnected };
enum class GatewayKind { Lora, Lorawan };

/// One sensed sample. Values are already clamped to sensor range at
/// sampling time; out-of-range values can only enter via fault injection
/// or corruption and are caught by the backend filter.
struct Reading {
    NodeId node = 0;
    std::uint32_t seq = 0;
    SimTime sampled_at = 0;
    double temperature_c = 0.0;
    double humidity_pct = 0.0;
    double vwc_6in = 0.0;
    double vwc_12in = 0.0;
    double nitrate_mg_l = 0.0;
    double battery_pct = 0.0;
    std::uint8_t firmware = 1;

    friend bool operator==(const Reading&, const Reading&) = default;
};

} // namespace farmsim
