#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "farmsim/core.hpp"
#include "farmsim/rng.hpp"

namespace farmsim::telemetry {

// Hard sensor ranges; readings are clamped here at sampling time.
constexpr double kTempMinC = -40.0;
constexpr double kTempMaxC = 125.0;
constexpr double kHumidityMinPct = 0.0;
constexpr double kHumidityMaxPct = 100.0;
constexpr double kVwcMax = 0.7;

struct WeatherParams {
    double mean_temp_c = 18.0;
    double diurnal_amp_c = 6.0;
    double ar1_phi = 0.95;          // per-bucket persistence of the noise term
    double ar1_sd = 0.8;            // stationary sd of the noise term
    double rain_rate_per_day = 0.2; // expected rain events per day
    double rain_depth_mm_mean = 5.0;

    friend bool operator==(const WeatherParams&, const WeatherParams&) = default;
};

/// Synthetic field weather in fixed 900 s buckets: rainfall depth,
/// air temperature, and relative humidity per bucket.
struct WeatherSeries {
    static constexpr SimTime kBucketSeconds = 900;

    std::vector<double> rain_mm;
    std::vector<double> air_temp_c;
    std::vector<double> humidity_pct;

    std::size_t buckets() const { return rain_mm.size(); }
    std::size_t bucket_index(SimTime t) const;
    double rain_at(SimTime t) const;
    double temp_at(SimTime t) const;
    double humidity_at(SimTime t) const;
};

/// Generate duration_s worth of weather. Rain events arrive as a Bernoulli
/// thinning of a Poisson process per bucket with exponential depths;
/// temperature is a diurnal sinusoid plus AR(1) noise. Same (seed, params,
/// duration) always yields the same series. Throws std::invalid_argument
/// when duration_s < 0 or rain_rate_per_day < 0.
WeatherSeries gen_weather(std::uint64_t seed, SimTime duration_s, const WeatherParams& p);

struct SoilParams {
    double theta_6in = 0.18;  // drainage equilibrium VWC, shallow
    double theta_12in = 0.26; // drainage equilibrium VWC, deep
    double k_6in = 0.004;     // VWC gain per mm of rain, shallow
    double k_12in = 0.003;    // VWC gain per mm of rain, deep
    double lambda_6in = 1.0 / 259'200.0;  // 1/(3 days) relaxation
    double lambda_12in = 1.0 / 518'400.0; // 1/(6 days) relaxation
    SimTime infiltration_lag_s = 7'200;   // rain reaches 12 in this much later

    friend bool operator==(const SoilParams&, const SoilParams&) = default;
};

struct SoilState {
    double vwc_6in = 0.18;
    double vwc_12in = 0.26;

    friend bool operator==(const SoilState&, const SoilState&) = default;
};

/// One first-order moisture step with rain applied to both depths.
/// While raining the drying term is suspended, so rain_mm > 0 never
/// decreases VWC at either depth. Results clamp to [0, 0.7].
/// Throws std::invalid_argument when dt_s <= 0 or rain_mm < 0.
SoilState step_soil(SoilState s, double rain_mm, double dt_s, const SoilParams& p);

/// Same step but with separate rain inputs per depth; the driver uses this
/// to feed the deep layer lagged rainfall.
SoilState step_soil_depths(SoilState s, double rain_6in_mm, double rain_12in_mm,
                           double dt_s, const SoilParams& p);

/// Steps soil state per weather bucket and owns the infiltration delay
/// line for the deep layer.
class SoilColumn {
public:
    explicit SoilColumn(SoilParams p = {}, SoilState initial = {});

    /// Advance one 900 s bucket with the given rainfall.
    void step_bucket(double rain_mm);

    const SoilState& state() const { return state_; }
    const SoilParams& params() const { return params_; }

private:
    SoilParams params_;
    SoilState state_;
    std::deque<double> pending_rain_; // delay line feeding the 12 in layer
};

struct SensorSpec {
    double temp_noise_sd = 0.2;
    double humidity_noise_sd = 2.0;
    double nitrate_baseline_mg_l = 20.0;
    double nitrate_noise_sd = 1.5;

    friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

/// Produce one reading: environment values plus Gaussian sensor noise,
/// clamped to sensor range; VWC copied from soil state. Consumes exactly
/// three Gaussians (six uniforms) from rng. Throws std::invalid_argument
/// when battery_pct <= 0 (a dead node cannot sample).
Reading sample_reading(NodeId node, double env_temp_c, double env_humidity_pct,
                       const SoilState& soil, const SensorSpec& spec,
                       std::uint32_t seq, SimTime t, double battery_pct,
                       std::uint8_t firmware, RngStream& rng);

} // namespace farmsim::telemetry
