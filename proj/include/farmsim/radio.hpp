#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "farmsim/core.hpp"
#include "farmsim/rng.hpp"

namespace farmsim::radio {

constexpr int kMinSf = 7;
constexpr int kMaxSf = 12;
constexpr int kMaxPayloadBytes = 242;
constexpr double kDailyAirtimeBudgetMs = 30'000.0;

struct RadioParams {
    int sf = 7;
    int bw_hz = 125'000;
    int cr = 1; // coding rate 4/(4+cr)
    int preamble_symbols = 8;
    bool explicit_header = true;
    bool crc_on = true;

    friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

/// Symbol duration in milliseconds: 2^sf / bw.
double symbol_time_ms(const RadioParams& p);

/// Time on air in milliseconds for a payload of payload_len bytes.
/// Throws std::invalid_argument for sf outside [7,12], bw not in
/// {125000, 250000}, or payload_len outside [1, 242]. Low data rate
/// optimization engages at SF11+ on 125 kHz.
double airtime_ms(const RadioParams& p, int payload_len);

/// Relative received power under reciprocal-square attenuation, 1/d^2.
/// Throws std::invalid_argument when distance_m <= 0.
double rx_power_rel(double distance_m);

enum class DeliveryOutcome { Delivered, Error, Missed };

struct OutcomeProbs {
    double deliver = 0.0;
    double error = 0.0;
    double miss = 0.0;

    double sum() const { return deliver + error + miss; }
    friend bool operator==(const OutcomeProbs&, const OutcomeProbs&) = default;
};

/// A directed radio hop. When explicit_probs is set the triple is used
/// verbatim; otherwise probabilities are derived from distance, spreading
/// factor, bandwidth, and line of sight.
struct LinkProfile {
    double distance_m = 1.0;
    bool los = true;
    RadioParams params;
    std::optional<OutcomeProbs> explicit_probs;

    friend bool operator==(const LinkProfile&, const LinkProfile&) = default;
};

/// (deliver, error, miss) for one transmission over the link. Always sums
/// to 1 within 1e-9. Derived mode: logistic in log received power,
/// anchored so a 500 m LoS hop at SF7/125 kHz delivers with p ~ 0.99 and a
/// 6 km LoS hop with p ~ 0.05; below the miss threshold the triple is
/// exactly (0,0,1); obstruction halves p_deliver with the remainder
/// reassigned to miss; p_error is 10% of the non-delivered mass, capped
/// at 0.1.
OutcomeProbs outcome_probs(const LinkProfile& link);

/// Draw one delivery outcome; consumes exactly one uniform from rng.
DeliveryOutcome sample_outcome(const LinkProfile& link, RngStream& rng);

enum class ChargeResult { Accepted, Refused };

/// Per-transmitter, per-day airtime accounting against the regulatory
/// 30,000 ms budget. Refusal is a value, never an exception; with
/// enforcement off the ledger still records but never refuses.
class DutyCycleLedger {
public:
    explicit DutyCycleLedger(bool enforce = false) : enforce_(enforce) {}

    /// Charge airtime_ms to (transmitter, day). Refuses when enforcement
    /// is on and the charge would push the day total past the budget;
    /// refused charges are not recorded.
    ChargeResult charge(std::uint32_t transmitter, std::int64_t day, double ms);

    double used_ms(std::uint32_t transmitter, std::int64_t day) const;
    bool enforcing() const { return enforce_; }

    const std::map<std::pair<std::uint32_t, std::int64_t>, double>& entries() const {
        return used_;
    }

private:
    bool enforce_;
    std::map<std::pair<std::uint32_t, std::int64_t>, double> used_;
};

} // namespace farmsim::radio
