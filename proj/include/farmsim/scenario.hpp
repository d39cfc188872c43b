#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farmsim/backend.hpp"
#include "farmsim/core.hpp"
#include "farmsim/ferry.hpp"
#include "farmsim/node.hpp"
#include "farmsim/radio.hpp"
#include "farmsim/telemetry.hpp"

namespace farmsim {

struct NodeConfig {
    NodeId id = 0;
    std::string label;
    Position pos;
    Connectivity connectivity = Connectivity::GatewayReachable;
    std::size_t buffer_capacity = nodesim::kDefaultBufferCapacity;
    nodesim::EnergyModel energy;
    telemetry::SensorSpec sensor;
    std::uint8_t firmware = 1;

    friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

struct GatewayConfig {
    GatewayId id = 0;
    Position pos;
    GatewayKind kind = GatewayKind::Lora;
    bool internet_available = true;
    std::size_t log_capacity = 0; // 0 = unlimited

    friend bool operator==(const GatewayConfig&, const GatewayConfig&) = default;
};

/// Uplink from a node to a LoRa gateway (hop 1) when `node` is set, or a
/// relay hop between gateways (hop 2) when `from_gateway` is set. When
/// `los` is not given it is derived from positions and obstructions.
struct LinkConfig {
    std::optional<NodeId> node;
    std::optional<GatewayId> from_gateway;
    GatewayId to_gateway = 0;
    double distance_m = 1.0;
    std::optional<bool> los;
    radio::RadioParams params;
    std::optional<radio::OutcomeProbs> explicit_probs; // unset = derived mode

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

struct Intervals {
    SimTime sample_s = 1'800;
    SimTime flush_s = 60;
    SimTime report_s = 86'400;
    SimTime uplink_latency_s = 0;

    friend bool operator==(const Intervals&, const Intervals&) = default;
};

struct FilterConfig {
    backend::FilterRanges ranges;
    bool at_gateway = false;

    friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

struct FerryConfig {
    ferry::FerryPlan plan;
    std::vector<ferry::SummonRequest> summons;

    friend bool operator==(const FerryConfig&, const FerryConfig&) = default;
};

struct WeatherConfig {
    telemetry::WeatherParams weather;
    telemetry::SoilParams soil;

    friend bool operator==(const WeatherConfig&, const WeatherConfig&) = default;
};

struct NmadConfig {
    bool truncate_expected_at_death = false;

    friend bool operator==(const NmadConfig&, const NmadConfig&) = default;
};

/// Complete immutable run description; a run is a pure function of this.
struct Scenario {
    std::vector<NodeConfig> nodes;
    std::vector<GatewayConfig> gateways;
    std::vector<LinkConfig> links;
    std::vector<Obstruction> obstructions;
    SimTime duration_s = 7 * kSecondsPerDay;
    Intervals intervals;
    FilterConfig filters;
    std::optional<FerryConfig> ferry;
    WeatherConfig environment;
    NmadConfig nmad;
    bool enforce_duty_cycle = false;
    std::uint64_t seed = 1;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// One validation failure: which entity and which rule.
struct Violation {
    std::string entity;
    std::string rule;
};

/// Parse scenario JSON. Unknown keys are rejected at top level; missing
/// optional blocks take documented defaults. Throws std::runtime_error
/// with a line/field message on malformed input.
Scenario parse_scenario(const std::string& json_text);

/// Canonical JSON rendering; serialize(parse(text)) parses back to an
/// identical Scenario and re-serializes byte-identically.
std::string serialize_scenario(const Scenario& s);

/// Structural and range checks. Empty result means runnable. Never
/// throws; violations are data.
std::vector<Violation> validate_scenario(const Scenario& s);

} // namespace farmsim
