#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "farmsim/core.hpp"

namespace farmsim::backend {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Plausibility bounds applied at ingest. Defaults match the sensors'
/// physical ranges.
struct FilterRanges {
    Range temperature_c{-40.0, 125.0};
    Range humidity_pct{0.0, 100.0};
    Range vwc{0.0, 0.7};
    Range nitrate_mg_l{0.0, 100.0};
    Range battery_pct{0.0, 100.0};

    friend bool operator==(const FilterRanges&, const FilterRanges&) = default;
};

struct FilterVerdict {
    bool accepted = true;
    std::string field;   // first violating field in record order, empty when accepted
    double value = 0.0;  // offending value
};

/// Check a reading against ranges. Field check order follows the record
/// layout: temperature_c, humidity_pct, vwc_6in, vwc_12in, nitrate_mg_l,
/// battery_pct; the verdict names the first violation.
FilterVerdict apply_filter(const Reading& r, const FilterRanges& ranges);

enum class Path { Radio, Ferry };
enum class IngestStatus { Accepted, Rejected, Duplicate, DecodeError };

struct StoreRecord {
    Reading reading;
    SimTime received_at = 0;
    Path path = Path::Radio;
    bool accepted = true;
    std::string rejected_field; // empty when accepted
};

struct IngestCounters {
    std::int64_t presented = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t duplicates = 0;
    std::int64_t decode_errors = 0;
};

/// Append-only reading store with keep-first dedup on (node, seq).
/// Rejected readings are retained for audit; duplicates and undecodable
/// payloads are counted but not stored. presented == accepted + rejected
/// + duplicates + decode_errors always holds.
class Store {
public:
    Store() = default;
    explicit Store(FilterRanges ranges) : ranges_(ranges) {}

    IngestStatus ingest(const std::vector<std::uint8_t>& payload, SimTime received_at,
                        Path path);

    /// Accepted readings for node with sampled_at in [start, end], ordered
    /// by (sampled_at, seq). Throws std::invalid_argument when start > end.
    std::vector<Reading> query(NodeId node, SimTime start, SimTime end) const;

    /// All accepted readings ordered by (node, sampled_at, seq).
    std::vector<Reading> all_accepted() const;

    /// Write accepted readings as CSV ordered by (node, sampled_at, seq).
    /// Floats carry six significant digits, '.' decimal separator, '\n'
    /// line endings. Returns the number of data rows.
    std::size_t export_csv(std::ostream& out) const;

    const std::vector<StoreRecord>& records() const { return records_; }
    const IngestCounters& counters() const { return counters_; }
    const FilterRanges& ranges() const { return ranges_; }

    /// Duplicate arrivals per node (for reporting).
    const std::map<NodeId, std::int64_t>& duplicates_by_node() const {
        return dup_by_node_;
    }

private:
    FilterRanges ranges_;
    std::vector<StoreRecord> records_;
    std::map<std::pair<NodeId, std::uint32_t>, std::size_t> index_;
    std::map<NodeId, std::int64_t> dup_by_node_;
    IngestCounters counters_;
};

/// One CSV row for a reading, shared by export and the CLI writers.
std::string csv_row(const Reading& r);

extern const char* const kCsvHeader;

} // namespace farmsim::backend
