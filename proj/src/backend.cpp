#include "farmsim/backend.hpp"

#include <algorithm>
#include <cstdio>

#include "farmsim/gateway.hpp"

namespace farmsim::backend {

const char* const kCsvHeader =
    "node_id,seq,timestamp_s,temperature_c,humidity_pct,vwc_6in,vwc_12in,"
    "nitrate_mg_l,battery_pct";

FilterVerdict apply_filter(const Reading& r, const FilterRanges& ranges) {
    struct Check {
        const char* name;
        double value;
        const Range& range;
    };
    const Check checks[] = {
        {"temperature_c", r.temperature_c, ranges.temperature_c},
        {"humidity_pct", r.humidity_pct, ranges.humidity_pct},
        {"vwc_6in", r.vwc_6in, ranges.vwc},
        {"vwc_12in", r.vwc_12in, ranges.vwc},
        {"nitrate_mg_l", r.nitrate_mg_l, ranges.nitrate_mg_l},
        {"battery_pct", r.battery_pct, ranges.battery_pct},
    };
    for (const Check& c : checks) {
        if (!c.range.contains(c.value)) return {false, c.name, c.value};
    }
    return {true, "", 0.0};
}

IngestStatus Store::ingest(const std::vector<std::uint8_t>& payload, SimTime received_at,
                           Path path) {
    ++counters_.presented;

    auto decoded = gateway::decode_reading(payload);
    if (!decoded) {
        ++counters_.decode_errors;
        return IngestStatus::DecodeError;
    }

    auto key = std::make_pair(decoded->node, decoded->seq);
    if (index_.contains(key)) {
        ++counters_.duplicates;
        ++dup_by_node_[decoded->node];
        return IngestStatus::Duplicate;
    }

    FilterVerdict verdict = apply_filter(*decoded, ranges_);
    StoreRecord rec;
    rec.reading = *decoded;
    rec.received_at = received_at;
    rec.path = path;
    rec.accepted = verdict.accepted;
    rec.rejected_field = verdict.field;

    index_.emplace(key, records_.size());
    records_.push_back(std::move(rec));

    if (verdict.accepted) {
        ++counters_.accepted;
        return IngestStatus::Accepted;
    }
    ++counters_.rejected;
    return IngestStatus::Rejected;
}

std::vector<Reading> Store::query(NodeId node, SimTime start, SimTime end) const {
    if (start > end) throw std::invalid_argument("query window start exceeds end");
    std::vector<Reading> out;
    for (const StoreRecord& rec : records_) {
        if (!rec.accepted || rec.reading.node != node) continue;
        if (rec.reading.sampled_at < start || rec.reading.sampled_at > end) continue;
        out.push_back(rec.reading);
    }
    std::stable_sort(out.begin(), out.end(), [](const Reading& a, const Reading& b) {
        if (a.sampled_at != b.sampled_at) return a.sampled_at < b.sampled_at;
        return a.seq < b.seq;
    });
    return out;
}

std::vector<Reading> Store::all_accepted() const {
    std::vector<Reading> out;
    for (const StoreRecord& rec : records_)
        if (rec.accepted) out.push_back(rec.reading);
    std::stable_sort(out.begin(), out.end(), [](const Reading& a, const Reading& b) {
        if (a.node != b.node) return a.node < b.node;
        if (a.sampled_at != b.sampled_at) return a.sampled_at < b.sampled_at;
        return a.seq < b.seq;
    });
    return out;
}

namespace {

void append_g6(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    s += buf;
}

} // namespace

std::string csv_row(const Reading& r) {
    std::string s;
    s += std::to_string(r.node);
    s += ',';
    s += std::to_string(r.seq);
    s += ',';
    s += std::to_string(r.sampled_at);
    s += ',';
    append_g6(s, r.temperature_c);
    s += ',';
    append_g6(s, r.humidity_pct);
    s += ',';
    append_g6(s, r.vwc_6in);
    s += ',';
    append_g6(s, r.vwc_12in);
    s += ',';
    append_g6(s, r.nitrate_mg_l);
    s += ',';
    append_g6(s, r.battery_pct);
    return s;
}

std::size_t Store::export_csv(std::ostream& out) const {
    out << kCsvHeader << '\n';
    std::size_t n = 0;
    for (const Reading& r : all_accepted()) {
        out << csv_row(r) << '\n';
        ++n;
    }
    return n;
}

} // namespace farmsim::backend
