#include "farmsim/scenario.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace farmsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::runtime_error("scenario: " + where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) fail(where, "unknown key \"" + key + "\"");
    }
}

double num(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(where, std::string(key) + " must be a number");
    return obj[key].get<double>();
}

std::int64_t integer(const json& obj, const std::string& where, const char* key,
                     std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail(where, std::string(key) + " must be an integer");
    return obj[key].get<std::int64_t>();
}

bool boolean(const json& obj, const std::string& where, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(where, std::string(key) + " must be a boolean");
    return obj[key].get<bool>();
}

Position parse_pos(const json& v, const std::string& where) {
    if (!v.is_array() || (v.size() != 2 && v.size() != 3))
        fail(where, "pos must be [x, y] or [x, y, z]");
    for (const auto& c : v)
        if (!c.is_number()) fail(where, "pos coordinates must be numbers");
    Position p{v[0].get<double>(), v[1].get<double>(), 0.0};
    if (v.size() == 3) p.z = v[2].get<double>();
    return p;
}

json pos_json(const Position& p) { return json::array({p.x, p.y, p.z}); }

backend::Range parse_range(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(where, "range must be [lo, hi]");
    return {v[0].get<double>(), v[1].get<double>()};
}

json range_json(const backend::Range& r) { return json::array({r.lo, r.hi}); }

NodeConfig parse_node(const json& v, const std::string& where) {
    require_keys(v, where,
                 {"id", "label", "pos", "connectivity", "buffer_capacity", "energy",
                  "sensor", "firmware"});
    NodeConfig n;
    if (!v.contains("id")) fail(where, "id is required");
    n.id = static_cast<NodeId>(integer(v, where, "id", 0));
    n.label = v.contains("label") ? v["label"].get<std::string>() : std::string{};
    if (!v.contains("pos")) fail(where, "pos is required");
    n.pos = parse_pos(v["pos"], where);

    std::string conn = v.contains("connectivity") ? v["connectivity"].get<std::string>()
                                                  : "gateway-reachable";
    if (conn == "gateway-reachable")
        n.connectivity = Connectivity::GatewayReachable;
    else if (conn == "disconnected")
        n.connectivity = Connectivity::Disconnected;
    else
        fail(where, "connectivity must be \"gateway-reachable\" or \"disconnected\"");

    n.buffer_capacity = static_cast<std::size_t>(integer(
        v, where, "buffer_capacity", static_cast<std::int64_t>(nodesim::kDefaultBufferCapacity)));
    n.firmware = static_cast<std::uint8_t>(integer(v, where, "firmware", 1));

    if (v.contains("energy")) {
        const json& e = v["energy"];
        std::string ew = where + ".energy";
        require_keys(e, ew,
                     {"budget_mj", "idle_mw", "sample_mj", "tx_mj_per_ms",
                      "offload_mj_per_reading"});
        n.energy.budget_mj = num(e, ew, "budget_mj", n.energy.budget_mj);
        n.energy.idle_mw = num(e, ew, "idle_mw", n.energy.idle_mw);
        n.energy.sample_mj = num(e, ew, "sample_mj", n.energy.sample_mj);
        n.energy.tx_mj_per_ms = num(e, ew, "tx_mj_per_ms", n.energy.tx_mj_per_ms);
        n.energy.offload_mj_per_reading =
            num(e, ew, "offload_mj_per_reading", n.energy.offload_mj_per_reading);
    }
    if (v.contains("sensor")) {
        const json& s = v["sensor"];
        std::string sw = where + ".sensor";
        require_keys(s, sw,
                     {"temp_noise_sd", "humidity_noise_sd", "nitrate_baseline_mg_l",
                      "nitrate_noise_sd"});
        n.sensor.temp_noise_sd = num(s, sw, "temp_noise_sd", n.sensor.temp_noise_sd);
        n.sensor.humidity_noise_sd =
            num(s, sw, "humidity_noise_sd", n.sensor.humidity_noise_sd);
        n.sensor.nitrate_baseline_mg_l =
            num(s, sw, "nitrate_baseline_mg_l", n.sensor.nitrate_baseline_mg_l);
        n.sensor.nitrate_noise_sd = num(s, sw, "nitrate_noise_sd", n.sensor.nitrate_noise_sd);
    }
    return n;
}

json node_json(const NodeConfig& n) {
    json v;
    v["id"] = n.id;
    v["label"] = n.label;
    v["pos"] = pos_json(n.pos);
    v["connectivity"] = n.connectivity == Connectivity::GatewayReachable
                            ? "gateway-reachable"
                            : "disconnected";
    v["buffer_capacity"] = n.buffer_capacity;
    v["firmware"] = n.firmware;
    v["energy"] = {{"budget_mj", n.energy.budget_mj},
                   {"idle_mw", n.energy.idle_mw},
                   {"sample_mj", n.energy.sample_mj},
                   {"tx_mj_per_ms", n.energy.tx_mj_per_ms},
                   {"offload_mj_per_reading", n.energy.offload_mj_per_reading}};
    v["sensor"] = {{"temp_noise_sd", n.sensor.temp_noise_sd},
                   {"humidity_noise_sd", n.sensor.humidity_noise_sd},
                   {"nitrate_baseline_mg_l", n.sensor.nitrate_baseline_mg_l},
                   {"nitrate_noise_sd", n.sensor.nitrate_noise_sd}};
    return v;
}

GatewayConfig parse_gateway(const json& v, const std::string& where) {
    require_keys(v, where, {"id", "pos", "kind", "internet", "log_capacity"});
    GatewayConfig g;
    if (!v.contains("id")) fail(where, "id is required");
    g.id = static_cast<GatewayId>(integer(v, where, "id", 0));
    if (!v.contains("pos")) fail(where, "pos is required");
    g.pos = parse_pos(v["pos"], where);
    std::string kind = v.contains("kind") ? v["kind"].get<std::string>() : "lora";
    if (kind == "lora")
        g.kind = GatewayKind::Lora;
    else if (kind == "lorawan")
        g.kind = GatewayKind::Lorawan;
    else
        fail(where, "kind must be \"lora\" or \"lorawan\"");
    g.internet_available = boolean(v, where, "internet", true);
    g.log_capacity = static_cast<std::size_t>(integer(v, where, "log_capacity", 0));
    return g;
}

json gateway_json(const GatewayConfig& g) {
    json v;
    v["id"] = g.id;
    v["pos"] = pos_json(g.pos);
    v["kind"] = g.kind == GatewayKind::Lora ? "lora" : "lorawan";
    v["internet"] = g.internet_available;
    v["log_capacity"] = g.log_capacity;
    return v;
}

LinkConfig parse_link(const json& v, const std::string& where) {
    require_keys(v, where,
                 {"node", "from_gateway", "to_gateway", "distance_m", "los", "sf",
                  "bw_hz", "cr", "preamble_symbols", "explicit_header", "crc_on",
                  "probs"});
    LinkConfig l;
    bool has_node = v.contains("node");
    bool has_from_gw = v.contains("from_gateway");
    if (has_node == has_from_gw)
        fail(where, "exactly one of \"node\" or \"from_gateway\" is required");
    if (has_node) l.node = static_cast<NodeId>(integer(v, where, "node", 0));
    if (has_from_gw)
        l.from_gateway = static_cast<GatewayId>(integer(v, where, "from_gateway", 0));
    if (!v.contains("to_gateway")) fail(where, "to_gateway is required");
    l.to_gateway = static_cast<GatewayId>(integer(v, where, "to_gateway", 0));
    if (!v.contains("distance_m")) fail(where, "distance_m is required");
    l.distance_m = num(v, where, "distance_m", 0.0);
    if (v.contains("los")) l.los = boolean(v, where, "los", true);
    l.params.sf = static_cast<int>(integer(v, where, "sf", 7));
    l.params.bw_hz = static_cast<int>(integer(v, where, "bw_hz", 125'000));
    l.params.cr = static_cast<int>(integer(v, where, "cr", 1));
    l.params.preamble_symbols =
        static_cast<int>(integer(v, where, "preamble_symbols", 8));
    l.params.explicit_header = boolean(v, where, "explicit_header", true);
    l.params.crc_on = boolean(v, where, "crc_on", true);
    if (v.contains("probs")) {
        const json& p = v["probs"];
        if (!p.is_array() || p.size() != 3)
            fail(where, "probs must be [deliver, error, miss]");
        for (const auto& c : p)
            if (!c.is_number()) fail(where, "probs entries must be numbers");
        l.explicit_probs = radio::OutcomeProbs{p[0].get<double>(), p[1].get<double>(),
                                               p[2].get<double>()};
    }
    return l;
}

json link_json(const LinkConfig& l) {
    json v;
    if (l.node) v["node"] = *l.node;
    if (l.from_gateway) v["from_gateway"] = *l.from_gateway;
    v["to_gateway"] = l.to_gateway;
    v["distance_m"] = l.distance_m;
    if (l.los) v["los"] = *l.los;
    v["sf"] = l.params.sf;
    v["bw_hz"] = l.params.bw_hz;
    v["cr"] = l.params.cr;
    v["preamble_symbols"] = l.params.preamble_symbols;
    v["explicit_header"] = l.params.explicit_header;
    v["crc_on"] = l.params.crc_on;
    if (l.explicit_probs)
        v["probs"] = json::array(
            {l.explicit_probs->deliver, l.explicit_probs->error, l.explicit_probs->miss});
    return v;
}

FerryConfig parse_ferry(const json& v, const std::string& where) {
    require_keys(v, where,
                 {"drone", "interval_s", "route", "speed_mps", "range_m",
                  "dispatch_latency_s", "base", "summons"});
    FerryConfig f;
    f.plan.drone = static_cast<DroneId>(integer(v, where, "drone", 0));
    f.plan.interval_s = integer(v, where, "interval_s", ferry::kMaxIntervalS);
    if (!v.contains("route") || !v["route"].is_array())
        fail(where, "route must be an array of node ids");
    for (const auto& r : v["route"]) {
        if (!r.is_number_integer()) fail(where, "route entries must be node ids");
        f.plan.route.push_back(static_cast<NodeId>(r.get<std::int64_t>()));
    }
    f.plan.speed_mps = num(v, where, "speed_mps", 10.0);
    f.plan.range_m = num(v, where, "range_m", 100.0);
    f.plan.dispatch_latency_s = integer(v, where, "dispatch_latency_s", 300);
    if (v.contains("base")) f.plan.base = parse_pos(v["base"], where);
    if (v.contains("summons")) {
        if (!v["summons"].is_array()) fail(where, "summons must be an array");
        int i = 0;
        for (const auto& s : v["summons"]) {
            std::string sw = where + ".summons[" + std::to_string(i++) + "]";
            require_keys(s, sw, {"node", "at_s", "latency_s"});
            ferry::SummonRequest req;
            if (!s.contains("node")) fail(sw, "node is required");
            req.requester = static_cast<NodeId>(integer(s, sw, "node", 0));
            req.issued_at = integer(s, sw, "at_s", 0);
            req.dispatch_latency_s = integer(s, sw, "latency_s", f.plan.dispatch_latency_s);
            f.summons.push_back(req);
        }
    }
    return f;
}

json ferry_json(const FerryConfig& f) {
    json v;
    v["drone"] = f.plan.drone;
    v["interval_s"] = f.plan.interval_s;
    v["route"] = f.plan.route;
    v["speed_mps"] = f.plan.speed_mps;
    v["range_m"] = f.plan.range_m;
    v["dispatch_latency_s"] = f.plan.dispatch_latency_s;
    v["base"] = json::array({f.plan.base.x, f.plan.base.y});
    json summons = json::array();
    for (const ferry::SummonRequest& s : f.summons)
        summons.push_back({{"node", s.requester},
                           {"at_s", s.issued_at},
                           {"latency_s", s.dispatch_latency_s}});
    v["summons"] = summons;
    return v;
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("top level", "document must be a JSON object");
    require_keys(doc, "top level",
                 {"nodes", "gateways", "links", "obstructions", "durations", "intervals",
                  "filters", "ferry", "environment", "nmad", "enforce_duty_cycle",
                  "seed"});

    Scenario s;
    if (doc.contains("nodes")) {
        int i = 0;
        for (const auto& v : doc["nodes"])
            s.nodes.push_back(parse_node(v, "nodes[" + std::to_string(i++) + "]"));
    }
    if (doc.contains("gateways")) {
        int i = 0;
        for (const auto& v : doc["gateways"])
            s.gateways.push_back(parse_gateway(v, "gateways[" + std::to_string(i++) + "]"));
    }
    if (doc.contains("links")) {
        int i = 0;
        for (const auto& v : doc["links"])
            s.links.push_back(parse_link(v, "links[" + std::to_string(i++) + "]"));
    }
    if (doc.contains("obstructions")) {
        int i = 0;
        for (const auto& v : doc["obstructions"]) {
            std::string ow = "obstructions[" + std::to_string(i++) + "]";
            require_keys(v, ow, {"from", "to"});
            if (!v.contains("from") || !v.contains("to"))
                fail(ow, "from and to are required");
            s.obstructions.push_back(
                {parse_pos(v["from"], ow), parse_pos(v["to"], ow)});
        }
    }
    if (doc.contains("durations")) {
        const json& d = doc["durations"];
        require_keys(d, "durations", {"run_s"});
        s.duration_s = integer(d, "durations", "run_s", s.duration_s);
    }
    if (doc.contains("intervals")) {
        const json& iv = doc["intervals"];
        require_keys(iv, "intervals",
                     {"sample_s", "flush_s", "report_s", "uplink_latency_s"});
        s.intervals.sample_s = integer(iv, "intervals", "sample_s", s.intervals.sample_s);
        s.intervals.flush_s = integer(iv, "intervals", "flush_s", s.intervals.flush_s);
        s.intervals.report_s = integer(iv, "intervals", "report_s", s.intervals.report_s);
        s.intervals.uplink_latency_s =
            integer(iv, "intervals", "uplink_latency_s", s.intervals.uplink_latency_s);
    }
    if (doc.contains("filters")) {
        const json& f = doc["filters"];
        require_keys(f, "filters",
                     {"temperature_c", "humidity_pct", "vwc", "nitrate_mg_l",
                      "battery_pct", "at_gateway"});
        backend::FilterRanges& r = s.filters.ranges;
        if (f.contains("temperature_c"))
            r.temperature_c = parse_range(f["temperature_c"], "filters.temperature_c");
        if (f.contains("humidity_pct"))
            r.humidity_pct = parse_range(f["humidity_pct"], "filters.humidity_pct");
        if (f.contains("vwc")) r.vwc = parse_range(f["vwc"], "filters.vwc");
        if (f.contains("nitrate_mg_l"))
            r.nitrate_mg_l = parse_range(f["nitrate_mg_l"], "filters.nitrate_mg_l");
        if (f.contains("battery_pct"))
            r.battery_pct = parse_range(f["battery_pct"], "filters.battery_pct");
        s.filters.at_gateway = boolean(f, "filters", "at_gateway", false);
    }
    if (doc.contains("ferry") && !doc["ferry"].is_null())
        s.ferry = parse_ferry(doc["ferry"], "ferry");
    if (doc.contains("environment")) {
        const json& e = doc["environment"];
        require_keys(e, "environment", {"weather", "soil"});
        if (e.contains("weather")) {
            const json& w = e["weather"];
            std::string ww = "environment.weather";
            require_keys(w, ww,
                         {"mean_temp_c", "diurnal_amp_c", "ar1_phi", "ar1_sd",
                          "rain_rate_per_day", "rain_depth_mm_mean"});
            telemetry::WeatherParams& wp = s.environment.weather;
            wp.mean_temp_c = num(w, ww, "mean_temp_c", wp.mean_temp_c);
            wp.diurnal_amp_c = num(w, ww, "diurnal_amp_c", wp.diurnal_amp_c);
            wp.ar1_phi = num(w, ww, "ar1_phi", wp.ar1_phi);
            wp.ar1_sd = num(w, ww, "ar1_sd", wp.ar1_sd);
            wp.rain_rate_per_day = num(w, ww, "rain_rate_per_day", wp.rain_rate_per_day);
            wp.rain_depth_mm_mean =
                num(w, ww, "rain_depth_mm_mean", wp.rain_depth_mm_mean);
        }
        if (e.contains("soil")) {
            const json& so = e["soil"];
            std::string sw = "environment.soil";
            require_keys(so, sw,
                         {"theta_6in", "theta_12in", "k_6in", "k_12in", "lambda_6in",
                          "lambda_12in", "infiltration_lag_s"});
            telemetry::SoilParams& sp = s.environment.soil;
            sp.theta_6in = num(so, sw, "theta_6in", sp.theta_6in);
            sp.theta_12in = num(so, sw, "theta_12in", sp.theta_12in);
            sp.k_6in = num(so, sw, "k_6in", sp.k_6in);
            sp.k_12in = num(so, sw, "k_12in", sp.k_12in);
            sp.lambda_6in = num(so, sw, "lambda_6in", sp.lambda_6in);
            sp.lambda_12in = num(so, sw, "lambda_12in", sp.lambda_12in);
            sp.infiltration_lag_s =
                integer(so, sw, "infiltration_lag_s", sp.infiltration_lag_s);
        }
    }
    if (doc.contains("nmad")) {
        const json& n = doc["nmad"];
        require_keys(n, "nmad", {"truncate_expected_at_death"});
        s.nmad.truncate_expected_at_death =
            boolean(n, "nmad", "truncate_expected_at_death", false);
    }
    s.enforce_duty_cycle = boolean(doc, "top level", "enforce_duty_cycle", false);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer()) fail("top level", "seed must be an integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    json nodes = json::array();
    for (const NodeConfig& n : s.nodes) nodes.push_back(node_json(n));
    doc["nodes"] = nodes;

    json gateways = json::array();
    for (const GatewayConfig& g : s.gateways) gateways.push_back(gateway_json(g));
    doc["gateways"] = gateways;

    json links = json::array();
    for (const LinkConfig& l : s.links) links.push_back(link_json(l));
    doc["links"] = links;

    json obstructions = json::array();
    for (const Obstruction& o : s.obstructions)
        obstructions.push_back({{"from", json::array({o.a.x, o.a.y, o.a.z})},
                                {"to", json::array({o.b.x, o.b.y, o.b.z})}});
    doc["obstructions"] = obstructions;

    doc["durations"] = {{"run_s", s.duration_s}};
    doc["intervals"] = {{"sample_s", s.intervals.sample_s},
                        {"flush_s", s.intervals.flush_s},
                        {"report_s", s.intervals.report_s},
                        {"uplink_latency_s", s.intervals.uplink_latency_s}};
    doc["filters"] = {{"temperature_c", range_json(s.filters.ranges.temperature_c)},
                      {"humidity_pct", range_json(s.filters.ranges.humidity_pct)},
                      {"vwc", range_json(s.filters.ranges.vwc)},
                      {"nitrate_mg_l", range_json(s.filters.ranges.nitrate_mg_l)},
                      {"battery_pct", range_json(s.filters.ranges.battery_pct)},
                      {"at_gateway", s.filters.at_gateway}};
    if (s.ferry) doc["ferry"] = ferry_json(*s.ferry);
    doc["environment"] = {
        {"weather",
         {{"mean_temp_c", s.environment.weather.mean_temp_c},
          {"diurnal_amp_c", s.environment.weather.diurnal_amp_c},
          {"ar1_phi", s.environment.weather.ar1_phi},
          {"ar1_sd", s.environment.weather.ar1_sd},
          {"rain_rate_per_day", s.environment.weather.rain_rate_per_day},
          {"rain_depth_mm_mean", s.environment.weather.rain_depth_mm_mean}}},
        {"soil",
         {{"theta_6in", s.environment.soil.theta_6in},
          {"theta_12in", s.environment.soil.theta_12in},
          {"k_6in", s.environment.soil.k_6in},
          {"k_12in", s.environment.soil.k_12in},
          {"lambda_6in", s.environment.soil.lambda_6in},
          {"lambda_12in", s.environment.soil.lambda_12in},
          {"infiltration_lag_s", s.environment.soil.infiltration_lag_s}}}};
    doc["nmad"] = {{"truncate_expected_at_death", s.nmad.truncate_expected_at_death}};
    doc["enforce_duty_cycle"] = s.enforce_duty_cycle;
    doc["seed"] = s.seed;
    return doc.dump(2) + "\n";
}

namespace {

void check_positive(std::vector<Violation>& out, const std::string& entity,
                    const char* name, double v) {
    if (!(v > 0.0)) out.push_back({entity, std::string(name) + " must be positive"});
}

} // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
    std::vector<Violation> out;

    std::set<NodeId> node_ids;
    std::set<NodeId> reachable;
    for (const NodeConfig& n : s.nodes) {
        std::string entity = "node " + std::to_string(n.id);
        if (!node_ids.insert(n.id).second) out.push_back({entity, "duplicate node id"});
        if (n.pos.z < 0.0) out.push_back({entity, "z must be >= 0"});
        if (n.buffer_capacity < 1)
            out.push_back({entity, "buffer_capacity must be >= 1"});
        if (n.energy.budget_mj < 0.0 || n.energy.idle_mw < 0.0 ||
            n.energy.sample_mj < 0.0 || n.energy.tx_mj_per_ms < 0.0 ||
            n.energy.offload_mj_per_reading < 0.0)
            out.push_back({entity, "energy values must be >= 0"});
        if (n.connectivity == Connectivity::GatewayReachable) reachable.insert(n.id);
    }

    std::set<GatewayId> gw_ids;
    std::map<GatewayId, const GatewayConfig*> gw_by_id;
    for (const GatewayConfig& g : s.gateways) {
        std::string entity = "gateway " + std::to_string(g.id);
        if (!gw_ids.insert(g.id).second) out.push_back({entity, "duplicate gateway id"});
        if (g.pos.z < 0.0) out.push_back({entity, "z must be >= 0"});
        gw_by_id[g.id] = &g;
    }

    std::set<NodeId> nodes_with_uplink;
    std::set<GatewayId> gateways_with_relay;
    int idx = 0;
    for (const LinkConfig& l : s.links) {
        std::string entity = "link " + std::to_string(idx++);
        if (!(l.distance_m > 0.0))
            out.push_back({entity, "distance_m must be positive"});
        if (l.params.sf < radio::kMinSf || l.params.sf > radio::kMaxSf)
            out.push_back({entity, "spreading factor outside [7, 12]"});
        if (l.params.bw_hz != 125'000 && l.params.bw_hz != 250'000)
            out.push_back({entity, "bandwidth must be 125000 or 250000 Hz"});
        if (l.params.cr < 1 || l.params.cr > 4)
            out.push_back({entity, "coding rate index outside [1, 4]"});
        if (l.params.preamble_symbols < 1)
            out.push_back({entity, "preamble length must be >= 1"});
        if (l.explicit_probs) {
            const radio::OutcomeProbs& p = *l.explicit_probs;
            if (p.deliver < 0.0 || p.deliver > 1.0 || p.error < 0.0 || p.error > 1.0 ||
                p.miss < 0.0 || p.miss > 1.0)
                out.push_back({entity, "probabilities must lie in [0, 1]"});
            else if (std::abs(p.sum() - 1.0) > 1e-9)
                out.push_back({entity, "outcome triple must sum to 1"});
        }

        auto target = gw_by_id.find(l.to_gateway);
        if (target == gw_by_id.end()) {
            out.push_back({entity, "to_gateway references unknown gateway"});
            continue;
        }
        if (l.node) {
            if (!node_ids.contains(*l.node)) {
                out.push_back({entity, "node references unknown node"});
            } else {
                if (target->second->kind != GatewayKind::Lora)
                    out.push_back({entity, "node uplink must target a LoRa gateway"});
                nodes_with_uplink.insert(*l.node);
            }
        } else if (l.from_gateway) {
            if (!gw_ids.contains(*l.from_gateway)) {
                out.push_back({entity, "from_gateway references unknown gateway"});
            } else {
                if (target->second->kind != GatewayKind::Lorawan)
                    out.push_back({entity, "relay link must target a LoRaWAN gateway"});
                gateways_with_relay.insert(*l.from_gateway);
            }
        }
    }

    for (NodeId n : reachable) {
        if (!nodes_with_uplink.contains(n))
            out.push_back({"node " + std::to_string(n),
                           "gateway-reachable node has no LoRa gateway link"});
    }
    for (const GatewayConfig& g : s.gateways) {
        if (g.kind == GatewayKind::Lora && !g.internet_available &&
            !gateways_with_relay.contains(g.id))
            out.push_back({"gateway " + std::to_string(g.id),
                           "offline LoRa gateway has no LoRaWAN relay link"});
    }

    if (s.duration_s < 0)
        out.push_back({"durations", "run_s must be >= 0"});
    check_positive(out, "intervals", "sample_s", static_cast<double>(s.intervals.sample_s));
    check_positive(out, "intervals", "flush_s", static_cast<double>(s.intervals.flush_s));
    check_positive(out, "intervals", "report_s", static_cast<double>(s.intervals.report_s));
    if (s.intervals.uplink_latency_s < 0)
        out.push_back({"intervals", "uplink_latency_s must be >= 0"});

    const backend::FilterRanges& r = s.filters.ranges;
    for (const auto& [name, range] :
         {std::pair<const char*, backend::Range>{"temperature_c", r.temperature_c},
          {"humidity_pct", r.humidity_pct},
          {"vwc", r.vwc},
          {"nitrate_mg_l", r.nitrate_mg_l},
          {"battery_pct", r.battery_pct}}) {
        if (range.lo > range.hi)
            out.push_back({"filters", std::string(name) + " range is inverted"});
    }

    if (s.ferry) {
        const ferry::FerryPlan& p = s.ferry->plan;
        if (p.interval_s < ferry::kMinIntervalS || p.interval_s > ferry::kMaxIntervalS)
            out.push_back({"ferry", "interval_s outside [3600, 86400]"});
        if (p.route.empty()) out.push_back({"ferry", "route is empty"});
        for (NodeId n : p.route)
            if (!node_ids.contains(n))
                out.push_back({"ferry", "route references unknown node " + std::to_string(n)});
        check_positive(out, "ferry", "speed_mps", p.speed_mps);
        check_positive(out, "ferry", "range_m", p.range_m);
        if (p.dispatch_latency_s <= 0)
            out.push_back({"ferry", "dispatch_latency_s must be positive"});
        for (const ferry::SummonRequest& req : s.ferry->summons) {
            if (!node_ids.contains(req.requester))
                out.push_back({"ferry", "summon references unknown node " +
                                            std::to_string(req.requester)});
            if (req.dispatch_latency_s <= 0)
                out.push_back({"ferry", "summon latency must be positive"});
            if (req.issued_at < 0)
                out.push_back({"ferry", "summon time must be >= 0"});
        }
    }

    const telemetry::WeatherParams& w = s.environment.weather;
    if (w.rain_rate_per_day < 0.0)
        out.push_back({"environment", "rain_rate_per_day must be >= 0"});
    if (w.rain_depth_mm_mean < 0.0)
        out.push_back({"environment", "rain_depth_mm_mean must be >= 0"});
    if (w.ar1_phi < 0.0 || w.ar1_phi >= 1.0)
        out.push_back({"environment", "ar1_phi must lie in [0, 1)"});

    const telemetry::SoilParams& sp = s.environment.soil;
    if (sp.theta_6in < 0.0 || sp.theta_6in > telemetry::kVwcMax ||
        sp.theta_12in < 0.0 || sp.theta_12in > telemetry::kVwcMax)
        out.push_back({"environment", "soil equilibria must lie in [0, 0.7]"});
    else if (sp.theta_12in <= sp.theta_6in)
        out.push_back({"environment", "theta_12in must exceed theta_6in"});
    if (sp.infiltration_lag_s < 0)
        out.push_back({"environment", "infiltration_lag_s must be >= 0"});

    return out;
}

} // namespace farmsim
