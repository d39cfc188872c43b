#include "farmsim/nmad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace farmsim::nmad {

using nlohmann::json;

std::int64_t expected_messages(SimTime duration_s, SimTime interval_s) {
    if (interval_s <= 0) throw std::invalid_argument("interval must be positive");
    if (duration_s < 0) throw std::invalid_argument("duration must be non-negative");
    return duration_s / interval_s;
}

StabilityRatios stability(const StabilityCounters& c) {
    if (c.expected <= 0) throw std::invalid_argument("expected count must be positive");
    if (c.normal < 0 || c.error < 0)
        throw std::invalid_argument("counters must be non-negative");
    if (c.normal + c.error > c.expected)
        throw std::invalid_argument("normal + error exceeds expected");
    auto e = static_cast<double>(c.expected);
    return {static_cast<double>(c.normal) / e, static_cast<double>(c.error) / e,
            static_cast<double>(c.missing()) / e};
}

StabilityRatios compose_hops(const StabilityRatios& hop1, const StabilityRatios& hop2) {
    StabilityRatios r;
    r.pdr = hop1.pdr * hop2.pdr;
    r.per = hop1.pdr * hop2.per;
    r.pmr = 1.0 - r.pdr - r.per;
    return r;
}

namespace {

const char* const kMetricNames[] = {"temperature_c", "humidity_pct", "vwc_6in",
                                    "vwc_12in",      "nitrate_mg_l", "battery_pct"};

double metric_value(const Reading& r, int i) {
    switch (i) {
        case 0: return r.temperature_c;
        case 1: return r.humidity_pct;
        case 2: return r.vwc_6in;
        case 3: return r.vwc_12in;
        case 4: return r.nitrate_mg_l;
        default: return r.battery_pct;
    }
}

MetricStats stats_of(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

} // namespace

std::vector<NodeReport> build_report(const backend::Store& store,
                                     const std::vector<RosterEntry>& roster,
                                     SimTime t, SimTime window_s) {
    if (window_s <= 0) throw std::invalid_argument("report window must be positive");

    std::vector<NodeReport> out;
    out.reserve(roster.size());
    for (const RosterEntry& entry : roster) {
        NodeReport rep;
        rep.node = entry.node;
        rep.location = entry.location;

        std::vector<double> window_values[6];
        for (const backend::StoreRecord& rec : store.records()) {
            if (rec.reading.node != entry.node) continue;
            // any decoded record counts as contact, rejected included
            if (!rep.last_seen || rec.received_at > *rep.last_seen)
                rep.last_seen = rec.received_at;
            bool in_window = rec.received_at > t - window_s && rec.received_at <= t;
            if (!in_window) continue;
            if (!rec.accepted) {
                ++rep.range_violations;
                continue;
            }
            ++rep.messages_in_window;
            for (int i = 0; i < 6; ++i)
                window_values[i].push_back(metric_value(rec.reading, i));
        }

        rep.silent = !rep.last_seen || (t - *rep.last_seen) > window_s;
        for (int i = 0; i < 6; ++i) {
            rep.metrics[kMetricNames[i]] =
                window_values[i].empty()
                    ? std::nullopt
                    : std::make_optional(stats_of(window_values[i]));
        }
        out.push_back(std::move(rep));
    }
    return out;
}

std::string render_report_json(const std::vector<NodeReport>& reports,
                               const std::vector<NodeStabilityRow>& stability_rows,
                               SimTime generated_at, SimTime window_s) {
    json doc;
    doc["generated_at"] = generated_at;
    doc["window_s"] = window_s;

    json nodes = json::array();
    for (const NodeReport& rep : reports) {
        json n;
        n["id"] = rep.node;
        n["location"] = rep.location;
        if (rep.last_seen)
            n["last_seen"] = *rep.last_seen;
        else
            n["last_seen"] = nullptr;
        n["messages_in_day"] = rep.messages_in_window;
        n["silent"] = rep.silent;
        json metrics;
        for (const auto& [name, stats] : rep.metrics) {
            if (stats) {
                metrics[name] = {{"mean", stats->mean}, {"std", stats->std}};
            } else {
                metrics[name] = nullptr;
            }
        }
        n["metrics"] = metrics;
        n["range_violations"] = rep.range_violations;
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = nodes;

    json stab = json::array();
    for (const NodeStabilityRow& row : stability_rows) {
        if (row.scope != "end_to_end") continue;
        json s;
        s["node"] = row.node;
        s["expected"] = row.counters.expected;
        s["normal"] = row.counters.normal;
        s["error"] = row.counters.error;
        if (row.counters.expected > 0) {
            StabilityRatios ratios = stability(row.counters);
            s["pdr"] = ratios.pdr;
            s["per"] = ratios.per;
            s["pmr"] = ratios.pmr;
        } else {
            s["pdr"] = nullptr;
            s["per"] = nullptr;
            s["pmr"] = nullptr;
        }
        stab.push_back(std::move(s));
    }
    doc["stability"] = stab;

    return doc.dump(2) + "\n";
}

namespace {

std::string fmt_stats(const std::optional<MetricStats>& s) {
    if (!s) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", s->mean, s->std);
    return buf;
}

} // namespace

std::string render_report_table(const std::vector<NodeReport>& reports,
                                const std::vector<NodeStabilityRow>& stability_rows,
                                SimTime generated_at, SimTime window_s) {
    std::ostringstream out;
    out << "monitoring report  t=" << generated_at << "  window=" << window_s << "s\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-16s %-10s %-8s %-7s %-16s %-16s %-14s %-6s\n",
                  "node", "location", "last_seen", "msgs", "silent", "temp_c",
                  "humidity_pct", "vwc_6in", "viol");
    out << line;
    for (const NodeReport& rep : reports) {
        std::string last = rep.last_seen ? std::to_string(*rep.last_seen) : "never";
        std::snprintf(line, sizeof line,
                      "%-6u %-16s %-10s %-8lld %-7s %-16s %-16s %-14s %-6lld\n",
                      static_cast<unsigned>(rep.node), rep.location.c_str(), last.c_str(),
                      static_cast<long long>(rep.messages_in_window),
                      rep.silent ? "yes" : "no",
                      fmt_stats(rep.metrics.at("temperature_c")).c_str(),
                      fmt_stats(rep.metrics.at("humidity_pct")).c_str(),
                      fmt_stats(rep.metrics.at("vwc_6in")).c_str(),
                      static_cast<long long>(rep.range_violations));
        out << line;
    }

    bool any = false;
    for (const NodeStabilityRow& row : stability_rows) {
        if (row.scope != "end_to_end" || row.counters.expected <= 0) continue;
        if (!any) {
            out << "\nstability (end to end)\n";
            std::snprintf(line, sizeof line, "%-6s %-9s %-8s %-7s %-8s %-8s %-8s\n",
                          "node", "expected", "normal", "error", "pdr", "per", "pmr");
            out << line;
            any = true;
        }
        StabilityRatios r = stability(row.counters);
        std::snprintf(line, sizeof line,
                      "%-6u %-9lld %-8lld %-7lld %-8.4f %-8.4f %-8.4f\n",
                      static_cast<unsigned>(row.node),
                      static_cast<long long>(row.counters.expected),
                      static_cast<long long>(row.counters.normal),
                      static_cast<long long>(row.counters.error), r.pdr, r.per, r.pmr);
        out << line;
    }
    return out.str();
}

} // namespace farmsim::nmad
