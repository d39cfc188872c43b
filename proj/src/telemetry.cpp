#include "farmsim/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace farmsim::telemetry {

std::size_t WeatherSeries::bucket_index(SimTime t) const {
    if (rain_mm.empty()) throw std::logic_error("empty weather series");
    if (t < 0) t = 0;
    auto idx = static_cast<std::size_t>(t / kBucketSeconds);
    return std::min(idx, rain_mm.size() - 1);
}

double WeatherSeries::rain_at(SimTime t) const { return rain_mm[bucket_index(t)]; }
double WeatherSeries::temp_at(SimTime t) const { return air_temp_c[bucket_index(t)]; }
double WeatherSeries::humidity_at(SimTime t) const { return humidity_pct[bucket_index(t)]; }

WeatherSeries gen_weather(std::uint64_t seed, SimTime duration_s, const WeatherParams& p) {
    if (duration_s < 0) throw std::invalid_argument("duration must be non-negative");
    if (p.rain_rate_per_day < 0) throw std::invalid_argument("rain rate must be non-negative");

    auto buckets = static_cast<std::size_t>(
        (duration_s + WeatherSeries::kBucketSeconds - 1) / WeatherSeries::kBucketSeconds);
    if (buckets == 0) buckets = 1;

    WeatherSeries w;
    w.rain_mm.resize(buckets, 0.0);
    w.air_temp_c.resize(buckets, 0.0);
    w.humidity_pct.resize(buckets, 0.0);

    RngStream rng(seed, "weather", 0);

    double p_event = p.rain_rate_per_day * WeatherSeries::kBucketSeconds / kSecondsPerDay;
    double phi = std::clamp(p.ar1_phi, 0.0, 0.999);
    double innov_sd = p.ar1_sd * std::sqrt(1.0 - phi * phi);
    double noise = rng.next_gaussian(0.0, p.ar1_sd); // stationary start

    constexpr double kDayRad = 2.0 * std::numbers::pi / kSecondsPerDay;

    for (std::size_t i = 0; i < buckets; ++i) {
        double u = rng.next_unit();
        double depth_draw = rng.next_unit(); // always drawn, keeps indices stable
        if (u < p_event)
            w.rain_mm[i] = -p.rain_depth_mm_mean * std::log1p(-depth_draw);

        if (i > 0) noise = phi * noise + rng.next_gaussian(0.0, innov_sd);
        double t_mid = (static_cast<double>(i) + 0.5) * WeatherSeries::kBucketSeconds;
        // coldest around 03:00, warmest mid-afternoon
        double diurnal = p.diurnal_amp_c * std::sin(kDayRad * t_mid - 2.0);
        w.air_temp_c[i] = p.mean_temp_c + diurnal + noise;

        double hum = 70.0 - 1.8 * (w.air_temp_c[i] - p.mean_temp_c) +
                     (w.rain_mm[i] > 0.0 ? 8.0 : 0.0) + rng.next_gaussian(0.0, 3.0);
        w.humidity_pct[i] = std::clamp(hum, 5.0, 100.0);
    }
    return w;
}

namespace {

double step_depth(double vwc, double rain_mm, double k, double lambda, double theta,
                  double dt_s, double vwc_max) {
    double gain = k * rain_mm;
    // no drying while rain is falling; keeps rain > 0 monotone at both depths
    double decay = rain_mm > 0.0 ? 0.0 : lambda * dt_s * (vwc - theta);
    return std::clamp(vwc + gain - decay, 0.0, vwc_max);
}

} // namespace

SoilState step_soil_depths(SoilState s, double rain_6in_mm, double rain_12in_mm,
                           double dt_s, const SoilParams& p) {
    if (dt_s <= 0.0) throw std::invalid_argument("soil step dt must be positive");
    if (rain_6in_mm < 0.0 || rain_12in_mm < 0.0)
        throw std::invalid_argument("rain depth must be non-negative");
    s.vwc_6in = step_depth(s.vwc_6in, rain_6in_mm, p.k_6in, p.lambda_6in, p.theta_6in,
                           dt_s, kVwcMax);
    s.vwc_12in = step_depth(s.vwc_12in, rain_12in_mm, p.k_12in, p.lambda_12in,
                            p.theta_12in, dt_s, kVwcMax);
    return s;
}

SoilState step_soil(SoilState s, double rain_mm, double dt_s, const SoilParams& p) {
    return step_soil_depths(s, rain_mm, rain_mm, dt_s, p);
}

SoilColumn::SoilColumn(SoilParams p, SoilState initial)
    : params_(p), state_(initial) {
    auto lag_buckets = static_cast<std::size_t>(
        p.infiltration_lag_s / WeatherSeries::kBucketSeconds);
    pending_rain_.assign(lag_buckets, 0.0);
}

void SoilColumn::step_bucket(double rain_mm) {
    double lagged = rain_mm;
    if (!pending_rain_.empty()) {
        pending_rain_.push_back(rain_mm);
        lagged = pending_rain_.front();
        pending_rain_.pop_front();
    }
    state_ = step_soil_depths(state_, rain_mm, lagged,
                              static_cast<double>(WeatherSeries::kBucketSeconds), params_);
}

Reading sample_reading(NodeId node, double env_temp_c, double env_humidity_pct,
                       const SoilState& soil, const SensorSpec& spec,
                       std::uint32_t seq, SimTime t, double battery_pct,
                       std::uint8_t firmware, RngStream& rng) {
    if (battery_pct <= 0.0)
        throw std::invalid_argument("dead node cannot sample");

    Reading r;
    r.node = node;
    r.seq = seq;
    r.sampled_at = t;
    r.temperature_c = std::clamp(env_temp_c + rng.next_gaussian(0.0, spec.temp_noise_sd),
                                 kTempMinC, kTempMaxC);
    r.humidity_pct = std::clamp(
        env_humidity_pct + rng.next_gaussian(0.0, spec.humidity_noise_sd),
        kHumidityMinPct, kHumidityMaxPct);
    r.vwc_6in = soil.vwc_6in;
    r.vwc_12in = soil.vwc_12in;
    r.nitrate_mg_l = std::max(
        0.0, spec.nitrate_baseline_mg_l + rng.next_gaussian(0.0, spec.nitrate_noise_sd));
    r.battery_pct = battery_pct;
    r.firmware = firmware;
    return r;
}

} // namespace farmsim::telemetry
