#include "farmsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "farmsim/gateway.hpp"

namespace farmsim::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_ratio(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool write_text(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    f << content;
    f.flush();
    return f.good();
}

std::vector<nmad::RosterEntry> roster_of(const Scenario& s) {
    std::vector<nmad::RosterEntry> roster;
    for (const NodeConfig& n : s.nodes) {
        nmad::RosterEntry e;
        e.node = n.id;
        e.location = n.label.empty() ? "node-" + std::to_string(n.id) : n.label;
        roster.push_back(std::move(e));
    }
    return roster;
}

std::string stability_csv(const std::vector<nmad::NodeStabilityRow>& rows) {
    std::ostringstream out;
    out << "scope,node,expected,normal,error,missing,pdr,per,pmr\n";
    for (const nmad::NodeStabilityRow& row : rows) {
        nmad::StabilityRatios r{};
        if (row.counters.expected > 0) r = nmad::stability(row.counters);
        out << row.scope << ',' << row.node << ',' << row.counters.expected << ','
            << row.counters.normal << ',' << row.counters.error << ','
            << row.counters.missing() << ',' << fmt_ratio(r.pdr, 4) << ','
            << fmt_ratio(r.per, 4) << ',' << fmt_ratio(r.pmr, 4) << '\n';
    }
    return out.str();
}

nlohmann::json range_json(const backend::Range& r) {
    return nlohmann::json::array({r.lo, r.hi});
}

backend::Range range_from(const nlohmann::json& j) {
    return backend::Range{j.at(0).get<double>(), j.at(1).get<double>()};
}

std::string meta_line(const Scenario& s,
                      const std::vector<nmad::NodeStabilityRow>& rows) {
    nlohmann::json meta;
    meta["kind"] = "meta";
    meta["duration_s"] = s.duration_s;
    meta["seed"] = s.seed;
    meta["report_window_s"] = s.intervals.report_s;

    const backend::FilterRanges& r = s.filters.ranges;
    meta["ranges"] = {{"temperature_c", range_json(r.temperature_c)},
                      {"humidity_pct", range_json(r.humidity_pct)},
                      {"vwc", range_json(r.vwc)},
                      {"nitrate_mg_l", range_json(r.nitrate_mg_l)},
                      {"battery_pct", range_json(r.battery_pct)}};

    nlohmann::json nodes = nlohmann::json::array();
    for (const nmad::RosterEntry& e : roster_of(s))
        nodes.push_back({{"id", e.node}, {"location", e.location}});
    meta["nodes"] = nodes;

    nlohmann::json stab = nlohmann::json::array();
    for (const nmad::NodeStabilityRow& row : rows)
        stab.push_back({{"node", row.node},
                        {"scope", row.scope},
                        {"expected", row.counters.expected},
                        {"normal", row.counters.normal},
                        {"error", row.counters.error}});
    meta["stability"] = stab;
    return meta.dump();
}

std::string record_line(const backend::StoreRecord& rec) {
    const Reading& r = rec.reading;
    nlohmann::json j;
    j["kind"] = "record";
    j["node"] = r.node;
    j["seq"] = r.seq;
    j["sampled_at"] = r.sampled_at;
    j["firmware"] = r.firmware;
    j["temperature_c"] = r.temperature_c;
    j["humidity_pct"] = r.humidity_pct;
    j["vwc_6in"] = r.vwc_6in;
    j["vwc_12in"] = r.vwc_12in;
    j["nitrate_mg_l"] = r.nitrate_mg_l;
    j["battery_pct"] = r.battery_pct;
    j["received_at"] = rec.received_at;
    j["path"] = rec.path == backend::Path::Ferry ? "ferry" : "radio";
    j["accepted"] = rec.accepted;
    j["rejected_field"] = rec.rejected_field;
    return j.dump();
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

} // namespace

std::vector<nmad::NodeStabilityRow> stability_rows(const engine::RunResult& r) {
    const Scenario& s = r.scenario;

    std::map<GatewayId, bool> gw_online;
    for (const GatewayConfig& g : s.gateways) gw_online[g.id] = g.internet_available;

    std::map<NodeId, std::optional<SimTime>> died;
    for (const nodesim::NodeState& ns : r.nodes) died[ns.id()] = ns.died_at();

    struct FrameInfo {
        bool h1_error = false;
        bool h1_online = false;  // delivered intact to an internet gateway
        bool h1_offline = false; // delivered intact to a store-and-forward gateway
        bool h2_delivered = false;
        bool h2_error = false;
    };
    std::map<NodeId, std::map<std::uint32_t, FrameInfo>> frames;

    for (const engine::LogRecord& rec : r.log) {
        if (rec.kind != engine::EventKind::Transmission || !rec.node || !rec.frame_seq)
            continue;
        FrameInfo& fi = frames[*rec.node][*rec.frame_seq];
        if (rec.hop && *rec.hop == 2) {
            if (!rec.outcome) continue;
            if (*rec.outcome == radio::DeliveryOutcome::Delivered) fi.h2_delivered = true;
            if (*rec.outcome == radio::DeliveryOutcome::Error) fi.h2_error = true;
            continue;
        }
        if (!rec.outcome) continue; // duty refusal or battery death: missed
        if (*rec.outcome == radio::DeliveryOutcome::Delivered) {
            bool online = rec.gateway && gw_online[*rec.gateway];
            (online ? fi.h1_online : fi.h1_offline) = true;
        } else if (*rec.outcome == radio::DeliveryOutcome::Error) {
            fi.h1_error = true;
        }
    }

    std::vector<nmad::NodeStabilityRow> rows;
    for (const NodeConfig& n : s.nodes) {
        SimTime horizon = s.duration_s;
        auto d = died[n.id];
        if (s.nmad.truncate_expected_at_death && d && *d < horizon) horizon = *d;
        std::int64_t expected = nmad::expected_messages(horizon, s.intervals.sample_s);

        nmad::StabilityCounters h1{expected, 0, 0};
        nmad::StabilityCounters h2{0, 0, 0};
        nmad::StabilityCounters e2e{expected, 0, 0};

        auto it = frames.find(n.id);
        if (it != frames.end()) {
            for (const auto& [seq, fi] : it->second) {
                if (static_cast<std::int64_t>(seq) >= expected) continue;

                if (fi.h1_online || fi.h1_offline) ++h1.normal;
                else if (fi.h1_error) ++h1.error;

                if (fi.h1_offline) {
                    ++h2.expected;
                    if (fi.h2_delivered) ++h2.normal;
                    else if (fi.h2_error) ++h2.error;
                }

                // a frame corrupted on hop one never errors end to end:
                // it simply goes missing there
                if (fi.h1_online) ++e2e.normal;
                else if (fi.h1_offline) {
                    if (fi.h2_delivered) ++e2e.normal;
                    else if (fi.h2_error) ++e2e.error;
                }
            }
        }

        rows.push_back({n.id, "hop1", h1});
        rows.push_back({n.id, "hop2", h2});
        rows.push_back({n.id, "end_to_end", e2e});
    }
    return rows;
}

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ifstream in(cfg.scenario_path, std::ios::binary);
    if (!in) {
        err << "cannot open scenario: " << cfg.scenario_path << "\n";
        return kExitIoError;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    Scenario s;
    try {
        s = parse_scenario(buf.str());
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }
    if (cfg.seed_override) s.seed = *cfg.seed_override;
    if (cfg.enforce_duty_cycle) s.enforce_duty_cycle = true;

    auto violations = validate_scenario(s);
    if (!violations.empty()) {
        for (const Violation& v : violations) err << v.entity << ": " << v.rule << "\n";
        return kExitUsage;
    }

    engine::RunResult result = engine::run(s);
    std::vector<nmad::NodeStabilityRow> rows = stability_rows(result);

    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "cannot create output directory: " << cfg.out_dir << "\n";
        return kExitIoError;
    }

    std::size_t csv_rows = 0;
    {
        std::ofstream rf(dir / "readings.csv", std::ios::binary);
        csv_rows = result.store.export_csv(rf);
        rf.flush();
        if (!rf.good()) {
            err << "cannot write readings.csv\n";
            return kExitIoError;
        }
    }

    if (!write_text(dir / "stability.csv", stability_csv(rows))) {
        err << "cannot write stability.csv\n";
        return kExitIoError;
    }

    auto reports = nmad::build_report(result.store, roster_of(s), s.duration_s,
                                      s.intervals.report_s);
    if (!write_text(dir / "nmad_report.json",
                    nmad::render_report_json(reports, rows, s.duration_s,
                                             s.intervals.report_s))) {
        err << "cannot write nmad_report.json\n";
        return kExitIoError;
    }

    if (cfg.persist) {
        std::ostringstream nd;
        nd << meta_line(s, rows) << '\n';
        for (const backend::StoreRecord& rec : result.store.records())
            nd << record_line(rec) << '\n';
        if (!write_text(dir / "records.ndjson", nd.str())) {
            err << "cannot write records.ndjson\n";
            return kExitIoError;
        }
    }

    if (cfg.trace) {
        std::ostringstream nd;
        for (const engine::LogRecord& rec : result.log)
            nd << engine::log_record_json(rec) << '\n';
        if (!write_text(dir / "trace.ndjson", nd.str())) {
            err << "cannot write trace.ndjson\n";
            return kExitIoError;
        }
    }

    const backend::IngestCounters& c = result.store.counters();
    out << "run: " << s.duration_s << " s, " << s.nodes.size() << " nodes, seed "
        << s.seed << "\n";
    out << "backend: presented=" << c.presented << " accepted=" << c.accepted
        << " rejected=" << c.rejected << " duplicates=" << c.duplicates
        << " decode_errors=" << c.decode_errors << "\n";
    out << "wrote: readings.csv (" << csv_rows
        << " rows), stability.csv, nmad_report.json";
    if (cfg.persist) out << ", records.ndjson";
    if (cfg.trace) out << ", trace.ndjson";
    out << " in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ifstream in(cfg.scenario_path, std::ios::binary);
    if (!in) {
        err << "cannot open scenario: " << cfg.scenario_path << "\n";
        return kExitIoError;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    Scenario s;
    try {
        s = parse_scenario(buf.str());
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }
    if (cfg.enforce_duty_cycle) s.enforce_duty_cycle = true;
    if (cfg.n_seeds < 1) {
        err << "seed count must be positive\n";
        return kExitUsage;
    }

    auto violations = validate_scenario(s);
    if (!violations.empty()) {
        for (const Violation& v : violations) err << v.entity << ": " << v.rule << "\n";
        return kExitUsage;
    }

    std::vector<std::vector<nmad::NodeStabilityRow>> per_seed(
        static_cast<std::size_t>(cfg.n_seeds));
    unsigned lanes = std::max(1u, std::thread::hardware_concurrency());
    try {
        for (int base = 0; base < cfg.n_seeds;
             base += static_cast<int>(lanes)) {
            int end = std::min<int>(cfg.n_seeds, base + static_cast<int>(lanes));
            std::vector<std::future<std::vector<nmad::NodeStabilityRow>>> futs;
            for (int k = base; k < end; ++k) {
                Scenario variant = s;
                variant.seed = cfg.first_seed + static_cast<std::uint64_t>(k);
                futs.push_back(std::async(std::launch::async, [variant] {
                    return stability_rows(engine::run(variant));
                }));
            }
            for (int k = base; k < end; ++k)
                per_seed[static_cast<std::size_t>(k)] = futs[static_cast<std::size_t>(k - base)].get();
        }
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "cannot create output directory: " << cfg.out_dir << "\n";
        return kExitIoError;
    }

    std::ostringstream csv;
    csv << "seed,scope,node,expected,normal,error,missing,pdr,per,pmr\n";
    for (int k = 0; k < cfg.n_seeds; ++k) {
        for (const nmad::NodeStabilityRow& row : per_seed[static_cast<std::size_t>(k)]) {
            nmad::StabilityRatios r{};
            if (row.counters.expected > 0) r = nmad::stability(row.counters);
            csv << (cfg.first_seed + static_cast<std::uint64_t>(k)) << ',' << row.scope
                << ',' << row.node << ',' << row.counters.expected << ','
                << row.counters.normal << ',' << row.counters.error << ','
                << row.counters.missing() << ',' << fmt_ratio(r.pdr, 6) << ','
                << fmt_ratio(r.per, 6) << ',' << fmt_ratio(r.pmr, 6) << '\n';
        }
    }

    // summary rows aggregate each (node, scope) across seeds
    for (std::size_t i = 0; i < per_seed[0].size(); ++i) {
        std::vector<double> expected, normal, error, missing, pdr, per, pmr;
        for (const auto& rows : per_seed) {
            const nmad::NodeStabilityRow& row = rows[i];
            expected.push_back(static_cast<double>(row.counters.expected));
            normal.push_back(static_cast<double>(row.counters.normal));
            error.push_back(static_cast<double>(row.counters.error));
            missing.push_back(static_cast<double>(row.counters.missing()));
            nmad::StabilityRatios r{};
            if (row.counters.expected > 0) r = nmad::stability(row.counters);
            pdr.push_back(r.pdr);
            per.push_back(r.per);
            pmr.push_back(r.pmr);
        }
        const nmad::NodeStabilityRow& row = per_seed[0][i];
        auto emit = [&](const char* tag, auto pick) {
            csv << tag << ',' << row.scope << ',' << row.node << ','
                << fmt_ratio(pick(mean_std(expected)), 4) << ','
                << fmt_ratio(pick(mean_std(normal)), 4) << ','
                << fmt_ratio(pick(mean_std(error)), 4) << ','
                << fmt_ratio(pick(mean_std(missing)), 4) << ','
                << fmt_ratio(pick(mean_std(pdr)), 6) << ','
                << fmt_ratio(pick(mean_std(per)), 6) << ','
                << fmt_ratio(pick(mean_std(pmr)), 6) << '\n';
        };
        emit("mean", [](const MeanStd& m) { return m.mean; });
        emit("std", [](const MeanStd& m) { return m.std; });
    }

    if (!write_text(dir / "sweep.csv", csv.str())) {
        err << "cannot write sweep.csv\n";
        return kExitIoError;
    }

    out << "swept " << cfg.n_seeds << " seeds starting at " << cfg.first_seed
        << ", wrote sweep.csv in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_report(const ReportConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ifstream in(cfg.store_path, std::ios::binary);
    if (!in) {
        err << "cannot open record log: " << cfg.store_path << "\n";
        return kExitIoError;
    }

    std::string line;
    if (!std::getline(in, line)) {
        err << "record log is empty\n";
        return kExitUsage;
    }

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(line);
        if (meta.at("kind").get<std::string>() != "meta")
            throw std::runtime_error("first line is not a meta record");
    } catch (const std::exception& e) {
        err << "not a record log: " << e.what() << "\n";
        return kExitUsage;
    }

    backend::FilterRanges ranges;
    std::vector<nmad::RosterEntry> roster;
    std::vector<nmad::NodeStabilityRow> rows;
    SimTime duration = 0;
    SimTime window = cfg.window_s;
    try {
        duration = meta.at("duration_s").get<SimTime>();
        const nlohmann::json& jr = meta.at("ranges");
        ranges.temperature_c = range_from(jr.at("temperature_c"));
        ranges.humidity_pct = range_from(jr.at("humidity_pct"));
        ranges.vwc = range_from(jr.at("vwc"));
        ranges.nitrate_mg_l = range_from(jr.at("nitrate_mg_l"));
        ranges.battery_pct = range_from(jr.at("battery_pct"));
        for (const nlohmann::json& jn : meta.at("nodes")) {
            nmad::RosterEntry e;
            e.node = jn.at("id").get<NodeId>();
            e.location = jn.at("location").get<std::string>();
            roster.push_back(std::move(e));
        }
        for (const nlohmann::json& js : meta.at("stability")) {
            nmad::NodeStabilityRow row;
            row.node = js.at("node").get<NodeId>();
            row.scope = js.at("scope").get<std::string>();
            row.counters.expected = js.at("expected").get<std::int64_t>();
            row.counters.normal = js.at("normal").get<std::int64_t>();
            row.counters.error = js.at("error").get<std::int64_t>();
            rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        err << "malformed meta record: " << e.what() << "\n";
        return kExitUsage;
    }

    backend::Store store(ranges);
    std::size_t line_no = 1;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            if (j.at("kind").get<std::string>() != "record") continue;
            Reading r;
            r.node = j.at("node").get<NodeId>();
            r.seq = j.at("seq").get<std::uint32_t>();
            r.sampled_at = j.at("sampled_at").get<SimTime>();
            r.firmware = j.at("firmware").get<std::uint8_t>();
            r.temperature_c = j.at("temperature_c").get<double>();
            r.humidity_pct = j.at("humidity_pct").get<double>();
            r.vwc_6in = j.at("vwc_6in").get<double>();
            r.vwc_12in = j.at("vwc_12in").get<double>();
            r.nitrate_mg_l = j.at("nitrate_mg_l").get<double>();
            r.battery_pct = j.at("battery_pct").get<double>();
            auto received_at = j.at("received_at").get<SimTime>();
            auto path = j.at("path").get<std::string>() == "ferry"
                            ? backend::Path::Ferry
                            : backend::Path::Radio;
            store.ingest(gateway::encode_reading(r), received_at, path);
        }
    } catch (const std::exception& e) {
        err << "malformed record at line " << line_no << ": " << e.what() << "\n";
        return kExitUsage;
    }

    SimTime t = cfg.at.value_or(duration);
    std::vector<nmad::NodeReport> reports;
    try {
        reports = nmad::build_report(store, roster, t, window);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "cannot create output directory: " << cfg.out_dir << "\n";
        return kExitIoError;
    }
    if (!write_text(dir / "nmad_report.json",
                    nmad::render_report_json(reports, rows, t, window))) {
        err << "cannot write nmad_report.json\n";
        return kExitIoError;
    }

    out << nmad::render_report_table(reports, rows, t, window);
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"layered farm telemetry network simulator"};
    app.require_subcommand(1);

    SimulateConfig sim_cfg;
    CLI::App* sim = app.add_subcommand("simulate", "run one scenario and write outputs");
    sim->add_option("scenario", sim_cfg.scenario_path, "scenario JSON file")->required();
    sim->add_option("-o,--out-dir", sim_cfg.out_dir, "output directory");
    sim->add_option("--seed", sim_cfg.seed_override, "override the scenario seed");
    sim->add_flag("--persist", sim_cfg.persist, "also write records.ndjson");
    sim->add_flag("--trace", sim_cfg.trace, "also write trace.ndjson (full event log)");
    sim->add_flag("--enforce-duty-cycle", sim_cfg.enforce_duty_cycle,
                  "apply the daily airtime budget");

    SweepConfig sweep_cfg;
    CLI::App* sweep = app.add_subcommand("sweep", "run a seed sweep, write sweep.csv");
    sweep->add_option("scenario", sweep_cfg.scenario_path, "scenario JSON file")
        ->required();
    sweep->add_option("-o,--out-dir", sweep_cfg.out_dir, "output directory");
    sweep->add_option("--first-seed", sweep_cfg.first_seed, "first seed of the sweep");
    sweep->add_option("-n,--seeds", sweep_cfg.n_seeds, "number of seeds")
        ->check(CLI::PositiveNumber);
    sweep->add_flag("--enforce-duty-cycle", sweep_cfg.enforce_duty_cycle,
                    "apply the daily airtime budget");

    ReportConfig rep_cfg;
    CLI::App* rep = app.add_subcommand(
        "report", "render the monitoring report from a persisted record log");
    rep->add_option("records", rep_cfg.store_path, "records.ndjson from --persist")
        ->required();
    rep->add_option("-o,--out-dir", rep_cfg.out_dir, "output directory");
    rep->add_option("--at", rep_cfg.at, "report timestamp (default: end of run)");
    rep->add_option("--window", rep_cfg.window_s, "report window in seconds")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (sim->parsed()) return cmd_simulate(sim_cfg, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_cfg, out, err);
    return cmd_report(rep_cfg, out, err);
}

} // namespace farmsim::cli
