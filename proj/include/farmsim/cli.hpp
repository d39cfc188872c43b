#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farmsim/engine.hpp"
#include "farmsim/nmad.hpp"
#include "farmsim/scenario.hpp"

namespace farmsim::cli {

// Exit codes shared by all subcommands.
constexpr int kExitOk = 0;
constexpr int kExitIoError = 1;
constexpr int kExitUsage = 2;

struct SimulateConfig {
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool persist = false;           // write records.ndjson
    bool trace = false;             // write trace.ndjson (full event log)
    bool enforce_duty_cycle = false;
};

struct SweepConfig {
    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t first_seed = 1;
    int n_seeds = 1;
    bool enforce_duty_cycle = false;
};

struct ReportConfig {
    std::string store_path; // records.ndjson from a --persist run
    std::string out_dir = ".";
    std::optional<SimTime> at;
    SimTime window_s = 86'400;
};

/// Run one scenario and write readings.csv, stability.csv, and
/// nmad_report.json into out_dir (plus records.ndjson / trace.ndjson when
/// asked). Prints a run summary to out. Identical (scenario, seed, flags)
/// produce byte-identical files.
int cmd_simulate(const SimulateConfig& cfg, std::ostream& out, std::ostream& err);

/// Run seeds first_seed .. first_seed + n_seeds - 1 and write sweep.csv
/// (per-seed stability rows plus mean/std summary rows). Sub-runs execute
/// in parallel; output order is by seed regardless.
int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err);

/// Render the monitoring report from a persisted record log without
/// re-simulating: human table to out, nmad_report.json into out_dir.
int cmd_report(const ReportConfig& cfg, std::ostream& out, std::ostream& err);

/// Per-node stability rows (hop1 / hop2 / end_to_end) recomputed from the
/// event log. Shared by stability.csv, sweep.csv, and the report JSON.
std::vector<nmad::NodeStabilityRow> stability_rows(const engine::RunResult& r);

/// Full CLI entry point (argument parsing plus dispatch).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace farmsim::cli
