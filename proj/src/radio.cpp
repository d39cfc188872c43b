#include "farmsim/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace farmsim::radio {

namespace {

void check_params(const RadioParams& p) {
    if (p.sf < kMinSf || p.sf > kMaxSf)
        throw std::invalid_argument("spreading factor outside [7, 12]");
    if (p.bw_hz != 125'000 && p.bw_hz != 250'000)
        throw std::invalid_argument("bandwidth must be 125000 or 250000 Hz");
    if (p.cr < 1 || p.cr > 4)
        throw std::invalid_argument("coding rate index outside [1, 4]");
    if (p.preamble_symbols < 1)
        throw std::invalid_argument("preamble length must be positive");
}

// Calibration anchors for derived delivery probability (SF7, 125 kHz, LoS).
constexpr double kNearDistM = 500.0;
constexpr double kNearPdr = 0.99;
constexpr double kFarDistM = 6'000.0;
constexpr double kFarPdr = 0.05;
constexpr double kObstructionPenalty = 0.5;
constexpr double kErrorShare = 0.10;
constexpr double kErrorCap = 0.10;
constexpr double kFloorPdr = 0.01; // below this the link is all-miss
constexpr double kSfGainDb = 2.5;  // sensitivity gained per SF step above 7

double logit(double p) { return std::log(p / (1.0 - p)); }

struct Logistic {
    double u0;
    double w;
};

// Solve the logistic in log received power from the two anchors.
Logistic link_curve() {
    double u_near = std::log(1.0 / (kNearDistM * kNearDistM));
    double u_far = std::log(1.0 / (kFarDistM * kFarDistM));
    double w = (u_near - u_far) / (logit(kNearPdr) - logit(kFarPdr));
    double u0 = u_near - logit(kNearPdr) * w;
    return {u0, w};
}

} // namespace

double symbol_time_ms(const RadioParams& p) {
    check_params(p);
    return static_cast<double>(1 << p.sf) * 1000.0 / p.bw_hz;
}

double airtime_ms(const RadioParams& p, int payload_len) {
    check_params(p);
    if (payload_len < 1 || payload_len > kMaxPayloadBytes)
        throw std::invalid_argument("payload length outside [1, 242] bytes");

    double t_sym = symbol_time_ms(p);
    int de = (p.sf >= 11 && p.bw_hz == 125'000) ? 1 : 0;
    int crc = p.crc_on ? 1 : 0;
    int ih = p.explicit_header ? 0 : 1;

    long num = 8L * payload_len - 4L * p.sf + 28 + 16L * crc - 20L * ih;
    long den = 4L * (p.sf - 2 * de);
    long blocks = num <= 0 ? 0 : (num + den - 1) / den;
    long payload_symbols = blocks * (p.cr + 4);
    if (payload_symbols < 0) payload_symbols = 0;

    double n_total = p.preamble_symbols + 4.25 + 8.0 + static_cast<double>(payload_symbols);
    return n_total * t_sym;
}

double rx_power_rel(double distance_m) {
    if (distance_m <= 0.0)
        throw std::invalid_argument("distance must be positive");
    return 1.0 / (distance_m * distance_m);
}

OutcomeProbs outcome_probs(const LinkProfile& link) {
    if (link.explicit_probs) {
        const OutcomeProbs& p = *link.explicit_probs;
        if (p.deliver < 0 || p.error < 0 || p.miss < 0 ||
            std::abs(p.sum() - 1.0) > 1e-9)
            throw std::invalid_argument("explicit outcome triple must sum to 1");
        return p;
    }

    check_params(link.params);
    static const Logistic curve = link_curve();

    // effective log power: inverse-square, SF sensitivity gain,
    // noise floor proportional to bandwidth
    double u = std::log(rx_power_rel(link.distance_m));
    u += std::log(10.0) * (kSfGainDb / 10.0) * (link.params.sf - kMinSf);
    u += std::log(125'000.0 / link.params.bw_hz);

    double floor_u = curve.u0 + curve.w * logit(kFloorPdr);
    if (u < floor_u) return {0.0, 0.0, 1.0};

    double p_del = 1.0 / (1.0 + std::exp(-(u - curve.u0) / curve.w));
    if (!link.los) p_del *= kObstructionPenalty;

    double p_err = std::min(kErrorShare * (1.0 - p_del), kErrorCap);
    double p_miss = 1.0 - p_del - p_err;
    if (p_miss < 0.0) p_miss = 0.0;
    return {p_del, p_err, p_miss};
}

DeliveryOutcome sample_outcome(const LinkProfile& link, RngStream& rng) {
    OutcomeProbs p = outcome_probs(link);
    double u = rng.next_unit();
    if (u < p.deliver) return DeliveryOutcome::Delivered;
    if (u < p.deliver + p.error) return DeliveryOutcome::Error;
    return DeliveryOutcome::Missed;
}

ChargeResult DutyCycleLedger::charge(std::uint32_t transmitter, std::int64_t day, double ms) {
    auto key = std::make_pair(transmitter, day);
    double used = 0.0;
    if (auto it = used_.find(key); it != used_.end()) used = it->second;
    if (enforce_ && used + ms > kDailyAirtimeBudgetMs) return ChargeResult::Refused;
    used_[key] = used + ms;
    return ChargeResult::Accepted;
}

double DutyCycleLedger::used_ms(std::uint32_t transmitter, std::int64_t day) const {
    auto it = used_.find(std::make_pair(transmitter, day));
    return it == used_.end() ? 0.0 : it->second;
}

} // namespace farmsim::radio
