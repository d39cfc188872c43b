#include "farmsim/gateway.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace farmsim::gateway {

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xFF));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& b, double v) {
    put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

float get_f32(const std::uint8_t* p) {
    return std::bit_cast<float>(get_u32(p));
}

} // namespace

std::vector<std::uint8_t> encode_reading(const Reading& r) {
    std::vector<std::uint8_t> b;
    b.reserve(kFrameBytes);
    put_u16(b, r.node);
    put_u32(b, r.seq);
    put_u64(b, static_cast<std::uint64_t>(r.sampled_at));
    b.push_back(r.firmware);
    put_f32(b, r.temperature_c);
    put_f32(b, r.humidity_pct);
    put_f32(b, r.vwc_6in);
    put_f32(b, r.vwc_12in);
    put_f32(b, r.nitrate_mg_l);
    put_f32(b, r.battery_pct);
    put_f32(b, 0.0); // reserved
    return b;
}

std::optional<Reading> decode_reading(const std::vector<std::uint8_t>& payload) {
    if (payload.size() != kFrameBytes) return std::nullopt;
    const std::uint8_t* p = payload.data();

    Reading r;
    r.node = get_u16(p);
    r.seq = get_u32(p + 2);
    r.sampled_at = static_cast<SimTime>(get_u64(p + 6));
    r.firmware = p[14];

    float f[7];
    for (int i = 0; i < 7; ++i) {
        f[i] = get_f32(p + 15 + 4 * i);
        if (!std::isfinite(f[i])) return std::nullopt;
    }
    r.temperature_c = f[0];
    r.humidity_pct = f[1];
    r.vwc_6in = f[2];
    r.vwc_12in = f[3];
    r.nitrate_mg_l = f[4];
    r.battery_pct = f[5];
    return r;
}

GatewayState::GatewayState(GatewayId id, GatewayKind kind, bool internet_available,
                           std::size_t log_capacity)
    : id_(id), kind_(kind), internet_available_(internet_available),
      log_capacity_(log_capacity) {}

bool GatewayState::filter_rejects(const Frame& f) const {
    if (!filter_enabled_) return false;
    auto r = decode_reading(f.payload);
    if (!r) return false; // undecodable frames fall through to normal handling
    const double* b = filter_bounds_;
    return !(r->humidity_pct >= b[0] && r->humidity_pct <= b[1] &&
             r->vwc_6in >= b[2] && r->vwc_6in <= b[3] &&
             r->vwc_12in >= b[2] && r->vwc_12in <= b[3] &&
             r->temperature_c >= b[4] && r->temperature_c <= b[5] &&
             r->nitrate_mg_l >= b[6] && r->nitrate_mg_l <= b[7] &&
             r->battery_pct >= b[8] && r->battery_pct <= b[9]);
}

Disposition GatewayState::on_receive(const Frame& f, SimTime t) {
    Disposition d;
    if (!f.crc_ok) {
        d = Disposition::Corrupted;
        ++rx_[f.sender].error;
    } else if (!seen_.insert({f.sender, f.seq}).second) {
        d = Disposition::Duplicate;
        ++rx_[f.sender].normal;
    } else if (filter_rejects(f)) {
        d = Disposition::Filtered;
        ++rx_[f.sender].normal; // received intact, dropped by local policy
    } else {
        d = Disposition::Accepted;
        ++rx_[f.sender].normal;
        uplink_.push_back(f);
    }

    if (log_capacity_ > 0 && log_.size() == log_capacity_)
        log_.erase(log_.begin());
    log_.push_back({t, f.sender, f.seq, d});
    return d;
}

std::vector<Frame> GatewayState::take_uplink() {
    std::vector<Frame> out(uplink_.begin(), uplink_.end());
    uplink_.clear();
    return out;
}

void GatewayState::enable_filter(double hum_lo, double hum_hi, double vwc_lo,
                                 double vwc_hi, double temp_lo, double temp_hi,
                                 double nitrate_lo, double nitrate_hi,
                                 double battery_lo, double battery_hi) {
    filter_enabled_ = true;
    double vals[10] = {hum_lo, hum_hi, vwc_lo, vwc_hi, temp_lo,
                       temp_hi, nitrate_lo, nitrate_hi, battery_lo, battery_hi};
    std::memcpy(filter_bounds_, vals, sizeof vals);
}

} // namespace farmsim::gateway
