#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "farmsim/core.hpp"

namespace farmsim::gateway {

/// Fixed on-air frame length: u16 node, u32 seq, u64 sampled_at, u8
/// firmware, then seven little-endian f32 fields (temperature, humidity,
/// vwc 6 in, vwc 12 in, nitrate, battery pct, reserved).
constexpr std::size_t kFrameBytes = 43;

std::vector<std::uint8_t> encode_reading(const Reading& r);

/// Decode a frame payload. Returns nullopt on wrong length or non-finite
/// field values.
std::optional<Reading> decode_reading(const std::vector<std::uint8_t>& payload);

/// A frame as received: payload plus the CRC verdict the radio attached.
struct Frame {
    NodeId sender = 0;
    std::uint32_t seq = 0;
    std::vector<std::uint8_t> payload;
    bool crc_ok = true;
};

enum class Disposition { Accepted, Corrupted, Duplicate, Filtered };

struct LogEntry {
    SimTime at = 0;
    NodeId sender = 0;
    std::uint32_t seq = 0;
    Disposition disposition = Disposition::Accepted;
};

/// Per-source-node reception tallies at this gateway.
struct RxCounters {
    std::int64_t normal = 0; // intact receptions, duplicates included
    std::int64_t error = 0;  // corrupted receptions

    friend bool operator==(const RxCounters&, const RxCounters&) = default;
};

/// Receive-side state for both gateway kinds. A LoRa gateway queues intact
/// frames for the periodic uplink flush; a LoRaWAN gateway hands them to
/// the backend immediately (the engine drains ready_for_upload right
/// after on_receive). Corrupted frames are logged and dropped, never
/// forwarded. The local log is append-only; a capacity of 0 means
/// unlimited.
class GatewayState {
public:
    GatewayState() = default;
    GatewayState(GatewayId id, GatewayKind kind, bool internet_available,
                 std::size_t log_capacity = 0);

    GatewayId id() const { return id_; }
    GatewayKind kind() const { return kind_; }
    bool internet_available() const { return internet_available_; }

    Disposition on_receive(const Frame& f, SimTime t);

    /// Drain the uplink queue (flush for LoRa, immediate upload for
    /// LoRaWAN). Frames leave in arrival order.
    std::vector<Frame> take_uplink();

    std::size_t uplink_depth() const { return uplink_.size(); }
    const std::vector<LogEntry>& local_log() const { return log_; }
    const std::map<NodeId, RxCounters>& rx_counters() const { return rx_; }

    /// Optional receive-side range filtering; off by default. When set,
    /// decodable frames whose reading violates the given ranges are logged
    /// as Filtered and dropped before queueing.
    void enable_filter(double hum_lo, double hum_hi, double vwc_lo, double vwc_hi,
                       double temp_lo, double temp_hi, double nitrate_lo,
                       double nitrate_hi, double battery_lo, double battery_hi);

private:
    bool filter_rejects(const Frame& f) const;

    GatewayId id_ = 0;
    GatewayKind kind_ = GatewayKind::Lora;
    bool internet_available_ = true;
    std::size_t log_capacity_ = 0;
    std::vector<LogEntry> log_;
    std::deque<Frame> uplink_;
    std::set<std::pair<NodeId, std::uint32_t>> seen_;
    std::map<NodeId, RxCounters> rx_;
    bool filter_enabled_ = false;
    double filter_bounds_[10] = {};
};

} // namespace farmsim::gateway
