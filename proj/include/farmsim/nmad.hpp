#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "farmsim/backend.hpp"
#include "farmsim/core.hpp"

namespace farmsim::nmad {

/// Message accounting for one node over one hop (or end to end).
/// Invariants: all fields non-negative, normal + error <= expected;
/// missing is always derived, never stored.
struct StabilityCounters {
    std::int64_t expected = 0;
    std::int64_t normal = 0;
    std::int64_t error = 0;

    std::int64_t missing() const { return expected - normal - error; }
    friend bool operator==(const StabilityCounters&, const StabilityCounters&) = default;
};

struct StabilityRatios {
    double pdr = 0.0;
    double per = 0.0;
    double pmr = 0.0;
};

/// floor(duration / interval): how many messages a healthy node would
/// have produced. Throws std::invalid_argument when interval_s <= 0 or
/// duration_s < 0.
std::int64_t expected_messages(SimTime duration_s, SimTime interval_s);

/// (pdr, per, pmr) = (normal, error, missing) / expected. Sums to 1
/// within 1e-9. Throws std::invalid_argument on expected <= 0, negative
/// counters, or normal + error > expected.
StabilityRatios stability(const StabilityCounters& c);

/// Serial two-hop composition: pdr = pdr1*pdr2, per = pdr1*per2,
/// pmr = 1 - pdr - per. A message errors end to end only when it survived
/// hop one and was corrupted on hop two.
StabilityRatios compose_hops(const StabilityRatios& hop1, const StabilityRatios& hop2);

struct MetricStats {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

/// Daily health summary for one node. Metrics are nullopt (rendered as
/// null, never zero) when the window holds no accepted readings.
struct NodeReport {
    NodeId node = 0;
    std::string location;
    std::optional<SimTime> last_seen;
    std::int64_t messages_in_window = 0;
    bool silent = false; // no recorded reading in the last window_s
    std::map<std::string, std::optional<MetricStats>> metrics;
    std::int64_t range_violations = 0;
};

struct RosterEntry {
    NodeId node = 0;
    std::string location;
};

/// Build one report per roster node from the backend store, windowed to
/// (t - window_s, t]. last_seen uses any decoded record (rejected ones
/// included: the node did communicate); metrics use accepted readings
/// only. silent means last_seen is absent or older than window_s.
/// Throws std::invalid_argument when window_s <= 0.
std::vector<NodeReport> build_report(const backend::Store& store,
                                     const std::vector<RosterEntry>& roster,
                                     SimTime t, SimTime window_s);

/// Per-node stability rows as rendered into reports and stability.csv.
struct NodeStabilityRow {
    NodeId node = 0;
    std::string scope; // "hop1", "hop2", or "end_to_end"
    StabilityCounters counters;
};

/// Deterministic JSON rendering of a report plus stability rows.
/// Identical inputs yield byte-identical output.
std::string render_report_json(const std::vector<NodeReport>& reports,
                               const std::vector<NodeStabilityRow>& stability_rows,
                               SimTime generated_at, SimTime window_s);

/// Fixed-width human table of the same content.
std::string render_report_table(const std::vector<NodeReport>& reports,
                                const std::vector<NodeStabilityRow>& stability_rows,
                                SimTime generated_at, SimTime window_s);

} // namespace farmsim::nmad
