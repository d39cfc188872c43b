#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farmsim/backend.hpp"
#include "farmsim/core.hpp"
#include "farmsim/gateway.hpp"
#include "farmsim/node.hpp"
#include "farmsim/radio.hpp"
#include "farmsim/scenario.hpp"

namespace farmsim::engine {

enum class EventKind {
    SampleTimer,
    Transmission,
    GatewayFlush,
    BackendDeliver,
    FerryVisit,
    Summon,
    ReportTick,
    RunEnd,
};

const char* event_kind_name(EventKind k);

/// One executed event with its outcome, appended in execution order.
/// The (at, seq) pair is strictly increasing in seq and non-decreasing
/// in at; seq is the global scheduling tie-breaker.
struct LogRecord {
    SimTime at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::RunEnd;

    std::optional<NodeId> node;
    std::optional<GatewayId> gateway;
    std::optional<GatewayId> to_gateway;
    std::optional<DroneId> drone;
    std::optional<int> hop; // 1 = node uplink, 2 = gateway relay
    std::optional<std::uint32_t> frame_seq;
    std::optional<radio::DeliveryOutcome> outcome;
    std::optional<gateway::Disposition> disposition;
    std::optional<backend::IngestStatus> ingest;
    std::optional<double> airtime_ms;
    bool duty_refused = false;
    std::optional<std::int64_t> count;
};

using EventLog = std::vector<LogRecord>;

/// Render one log record as a single JSON line (keys sorted, fields
/// omitted when absent).
std::string log_record_json(const LogRecord& rec);

/// Terminal state of one run. Deterministic: a fixed scenario always
/// produces the same RunResult, including the log.
struct RunResult {
    Scenario scenario;
    backend::Store store;
    std::vector<nodesim::NodeState> nodes;
    std::vector<gateway::GatewayState> gateways;
    radio::DutyCycleLedger duty{false};
    EventLog log;
};

/// Execute the scenario over [0, duration). Events at the same second run
/// in scheduling order. Throws std::invalid_argument when
/// validate_scenario(s) is non-empty.
RunResult run(const Scenario& s);

/// FNV-1a digest over terminal stores, node and gateway state, and the
/// duty ledger; equal digests mean equal terminal states.
std::uint64_t state_digest(const RunResult& r);

/// Re-execute the scenario taking radio outcomes from the log instead of
/// the RNG and compare terminal states against a fresh normal run. True
/// only for an untampered log of this exact scenario.
bool replay_check(const EventLog& log, const Scenario& s);

} // namespace farmsim::engine
