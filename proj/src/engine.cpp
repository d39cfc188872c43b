#include "farmsim/engine.hpp"

#include <bit>
#include <queue>
#include <variant>

#include <json.hpp>

#include "farmsim/ferry.hpp"
#include "farmsim/telemetry.hpp"

namespace farmsim::engine {

namespace {

// Gateways share the duty ledger key space with nodes above this offset.
constexpr std::uint32_t kGatewayLedgerBase = 0x10000;

struct SamplePayload {
    NodeId node;
};
struct TransmissionPayload {
    NodeId node;
    std::uint32_t frame_seq;
    std::vector<std::uint8_t> bytes;
};
struct FlushPayload {
    GatewayId gw;
};
struct DeliverPayload {
    std::vector<std::vector<std::uint8_t>> payloads;
    backend::Path path;
};
struct FerryVisitPayload {
    DroneId drone;
    NodeId node;
    SimTime return_leg_s;
    bool summoned;
};
struct SummonPayload {
    ferry::SummonRequest req;
};
struct ReportPayload {};

using Payload = std::variant<SamplePayload, TransmissionPayload, FlushPayload,
                             DeliverPayload, FerryVisitPayload, SummonPayload,
                             ReportPayload>;

struct Event {
    SimTime at;
    std::uint64_t sched_seq; // global FIFO tie-break within a second
    EventKind kind;
    Payload payload;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.sched_seq > b.sched_seq;
    }
};

struct Hop1Link {
    GatewayId gw;
    radio::LinkProfile profile;
};

struct Hop2Link {
    GatewayId to;
    radio::LinkProfile profile;
};

class Engine {
public:
    Engine(const Scenario& s, const std::vector<radio::DeliveryOutcome>* scripted)
        : scenario_(s),
          duty_(s.enforce_duty_cycle),
          streams_{s.seed},
          scripted_(scripted) {
        auto violations = validate_scenario(s);
        if (!violations.empty()) {
            std::string msg = "scenario invalid:";
            for (const Violation& v : violations)
                msg += " [" + v.entity + ": " + v.rule + "]";
            throw std::invalid_argument(msg);
        }
        build_topology();
        weather_ = telemetry::gen_weather(s.seed, std::max<SimTime>(s.duration_s, 1),
                                          s.environment.weather);
        soil_ = telemetry::SoilColumn(s.environment.soil);
        schedule_initial();
    }

    RunResult run() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            if (ev.at >= scenario_.duration_s) break; // horizon is [0, duration)
            queue_.pop();
            execute(ev);
        }

        if (scenario_.duration_s > 0) {
            for (auto& [id, ns] : nodes_) ns.settle_idle(scenario_.duration_s);
            LogRecord rec;
            rec.at = scenario_.duration_s;
            rec.seq = log_.size();
            rec.kind = EventKind::RunEnd;
            log_.push_back(rec);
        }

        RunResult out;
        out.scenario = scenario_;
        out.store = std::move(store_);
        for (auto& [id, ns] : nodes_) out.nodes.push_back(std::move(ns));
        for (auto& [id, gs] : gateways_) out.gateways.push_back(std::move(gs));
        out.duty = std::move(duty_);
        out.log = std::move(log_);
        return out;
    }

private:
    void build_topology() {
        for (const NodeConfig& n : scenario_.nodes) {
            nodes_.emplace(n.id, nodesim::NodeState(n.id, n.connectivity, n.energy,
                                                    n.buffer_capacity));
            node_cfg_[n.id] = &n;
            positions_[n.id] = n.pos;
        }
        for (const GatewayConfig& g : scenario_.gateways) {
            gateways_.emplace(g.id, gateway::GatewayState(g.id, g.kind,
                                                          g.internet_available,
                                                          g.log_capacity));
            gw_cfg_[g.id] = &g;
            if (scenario_.filters.at_gateway && g.kind == GatewayKind::Lora) {
                const backend::FilterRanges& r = scenario_.filters.ranges;
                gateways_.at(g.id).enable_filter(
                    r.humidity_pct.lo, r.humidity_pct.hi, r.vwc.lo, r.vwc.hi,
                    r.temperature_c.lo, r.temperature_c.hi, r.nitrate_mg_l.lo,
                    r.nitrate_mg_l.hi, r.battery_pct.lo, r.battery_pct.hi);
            }
        }

        for (const LinkConfig& l : scenario_.links) {
            radio::LinkProfile profile;
            profile.distance_m = l.distance_m;
            profile.params = l.params;
            profile.explicit_probs = l.explicit_probs;
            Position from = l.node ? positions_.at(*l.node)
                                   : gw_cfg_.at(*l.from_gateway)->pos;
            Position to = gw_cfg_.at(l.to_gateway)->pos;
            if (l.los) {
                profile.los = *l.los;
            } else if (from.x == to.x && from.y == to.y) {
                profile.los = true;
            } else {
                profile.los = line_of_sight(scenario_.obstructions, from, to);
            }

            if (l.node) {
                hop1_[*l.node].push_back({l.to_gateway, profile});
            } else {
                hop2_.emplace(*l.from_gateway, Hop2Link{l.to_gateway, profile});
            }
        }

        store_ = backend::Store(scenario_.filters.ranges);
    }

    void schedule_initial() {
        for (const NodeConfig& n : scenario_.nodes)
            push(0, EventKind::SampleTimer, SamplePayload{n.id});
        for (const GatewayConfig& g : scenario_.gateways) {
            if (g.kind == GatewayKind::Lora)
                push(scenario_.intervals.flush_s, EventKind::GatewayFlush,
                     FlushPayload{g.id});
        }
        if (scenario_.ferry) {
            const FerryConfig& fc = *scenario_.ferry;
            for (const ferry::PlannedVisit& v :
                 ferry::plan_flyover(fc.plan, positions_, scenario_.duration_s))
                push(v.at, EventKind::FerryVisit,
                     FerryVisitPayload{v.drone, v.node, v.return_leg_s, false});
            for (const ferry::SummonRequest& req : fc.summons)
                push(req.issued_at, EventKind::Summon, SummonPayload{req});
        }
        for (SimTime t = scenario_.intervals.report_s; t < scenario_.duration_s;
             t += scenario_.intervals.report_s)
            push(t, EventKind::ReportTick, ReportPayload{});
    }

    void push(SimTime at, EventKind kind, Payload payload) {
        queue_.push(Event{at, next_sched_seq_++, kind, std::move(payload)});
    }

    LogRecord& append(SimTime at, EventKind kind) {
        LogRecord rec;
        rec.at = at;
        rec.seq = log_.size();
        rec.kind = kind;
        log_.push_back(rec);
        return log_.back();
    }

    void advance_soil(SimTime t) {
        auto target = static_cast<std::size_t>(t / telemetry::WeatherSeries::kBucketSeconds);
        while (soil_steps_ < target) {
            double rain = soil_steps_ < weather_.buckets() ? weather_.rain_mm[soil_steps_]
                                                           : 0.0;
            soil_.step_bucket(rain);
            ++soil_steps_;
        }
    }

    RngStream& stream_for(std::map<std::uint32_t, RngStream>& pool, const char* component,
                          std::uint32_t entity) {
        auto it = pool.find(entity);
        if (it == pool.end())
            it = pool.emplace(entity, streams_.stream(component, entity)).first;
        return it->second;
    }

    radio::DeliveryOutcome draw_outcome(const radio::LinkProfile& link,
                                        RngStream& rng) {
        if (scripted_) {
            if (replay_cursor_ < scripted_->size()) return (*scripted_)[replay_cursor_++];
            ++replay_cursor_;
            return radio::DeliveryOutcome::Missed; // script exhausted: diverge safely
        }
        return radio::sample_outcome(link, rng);
    }

    void execute(const Event& ev) {
        switch (ev.kind) {
            case EventKind::SampleTimer:
                on_sample(ev.at, std::get<SamplePayload>(ev.payload));
                break;
            case EventKind::Transmission:
                on_transmission(ev.at, std::get<TransmissionPayload>(ev.payload));
                break;
            case EventKind::GatewayFlush:
                on_flush(ev.at, std::get<FlushPayload>(ev.payload));
                break;
            case EventKind::BackendDeliver:
                on_deliver(ev.at, std::get<DeliverPayload>(ev.payload));
                break;
            case EventKind::FerryVisit:
                on_ferry_visit(ev.at, std::get<FerryVisitPayload>(ev.payload));
                break;
            case EventKind::Summon:
                on_summon(ev.at, std::get<SummonPayload>(ev.payload));
                break;
            case EventKind::ReportTick: {
                append(ev.at, EventKind::ReportTick);
                break;
            }
            case EventKind::RunEnd:
                break;
        }
    }

    void on_sample(SimTime t, const SamplePayload& p) {
        nodesim::NodeState& ns = nodes_.at(p.node);
        LogRecord& rec = append(t, EventKind::SampleTimer);
        rec.node = p.node;
        if (!ns.alive()) return;

        auto seq = ns.begin_sample(t);
        if (!seq) return; // battery exhausted at this tick

        advance_soil(t);
        const NodeConfig& cfg = *node_cfg_.at(p.node);
        Reading r = telemetry::sample_reading(
            p.node, weather_.temp_at(t), weather_.humidity_at(t), soil_.state(),
            cfg.sensor, *seq, t, ns.battery_pct(), cfg.firmware,
            stream_for(sensor_rng_, "sensor", p.node));
        rec.frame_seq = *seq;

        if (ns.dispatch(r) == nodesim::DispatchAction::Transmit) {
            push(t, EventKind::Transmission,
                 TransmissionPayload{p.node, *seq, gateway::encode_reading(r)});
        } else {
            ns.buffer_reading(r);
        }

        if (ns.alive() && t + scenario_.intervals.sample_s < scenario_.duration_s)
            push(t + scenario_.intervals.sample_s, EventKind::SampleTimer,
                 SamplePayload{p.node});
    }

    void on_transmission(SimTime t, const TransmissionPayload& p) {
        nodesim::NodeState& ns = nodes_.at(p.node);
        auto links = hop1_.find(p.node);
        if (links == hop1_.end() || links->second.empty() || !ns.alive()) return;

        double airtime = radio::airtime_ms(links->second.front().profile.params,
                                           static_cast<int>(p.bytes.size()));

        if (duty_.charge(p.node, t / kSecondsPerDay, airtime) ==
            radio::ChargeResult::Refused) {
            LogRecord& rec = append(t, EventKind::Transmission);
            rec.node = p.node;
            rec.hop = 1;
            rec.frame_seq = p.frame_seq;
            rec.airtime_ms = airtime;
            rec.duty_refused = true; // counted as missed at the transmitter
            return;
        }
        if (!ns.debit_transmit(t, airtime)) {
            LogRecord& rec = append(t, EventKind::Transmission);
            rec.node = p.node;
            rec.hop = 1;
            rec.frame_seq = p.frame_seq;
            return; // battery died before the frame left
        }

        bool first = true;
        for (const Hop1Link& link : links->second) {
            radio::DeliveryOutcome outcome =
                draw_outcome(link.profile, stream_for(hop1_rng_, "hop1", p.node));

            LogRecord& rec = append(t, EventKind::Transmission);
            rec.node = p.node;
            rec.gateway = link.gw;
            rec.hop = 1;
            rec.frame_seq = p.frame_seq;
            rec.outcome = outcome;
            if (first) rec.airtime_ms = airtime; // one airtime charge per broadcast
            first = false;

            if (outcome == radio::DeliveryOutcome::Missed) continue;
            gateway::Frame f;
            f.sender = p.node;
            f.seq = p.frame_seq;
            f.payload = p.bytes;
            f.crc_ok = outcome == radio::DeliveryOutcome::Delivered;
            rec.disposition = gateways_.at(link.gw).on_receive(f, t);
        }
    }

    void on_flush(SimTime t, const FlushPayload& p) {
        gateway::GatewayState& gw = gateways_.at(p.gw);
        std::vector<gateway::Frame> frames = gw.take_uplink();

        if (!frames.empty()) {
            LogRecord& rec = append(t, EventKind::GatewayFlush);
            rec.gateway = p.gw;
            rec.count = static_cast<std::int64_t>(frames.size());
        }

        if (!frames.empty()) {
            if (gw.internet_available()) {
                DeliverPayload del;
                del.path = backend::Path::Radio;
                for (gateway::Frame& f : frames) del.payloads.push_back(std::move(f.payload));
                push(t + scenario_.intervals.uplink_latency_s, EventKind::BackendDeliver,
                     std::move(del));
            } else {
                relay_frames(t, p.gw, frames);
            }
        }

        if (t + scenario_.intervals.flush_s < scenario_.duration_s)
            push(t + scenario_.intervals.flush_s, EventKind::GatewayFlush,
                 FlushPayload{p.gw});
    }

    // Forward queued frames one by one over the relay hop.
    void relay_frames(SimTime t, GatewayId from, std::vector<gateway::Frame>& frames) {
        const Hop2Link& relay = hop2_.at(from);
        gateway::GatewayState& target = gateways_.at(relay.to);

        for (gateway::Frame& f : frames) {
            double airtime = radio::airtime_ms(relay.profile.params,
                                               static_cast<int>(f.payload.size()));
            LogRecord& rec = append(t, EventKind::Transmission);
            rec.node = f.sender;
            rec.gateway = from;
            rec.to_gateway = relay.to;
            rec.hop = 2;
            rec.frame_seq = f.seq;
            rec.airtime_ms = airtime;

            if (duty_.charge(kGatewayLedgerBase + from, t / kSecondsPerDay, airtime) ==
                radio::ChargeResult::Refused) {
                rec.airtime_ms = airtime;
                rec.duty_refused = true;
                continue;
            }

            radio::DeliveryOutcome outcome =
                draw_outcome(relay.profile, stream_for(hop2_rng_, "hop2", from));
            rec.outcome = outcome;
            if (outcome == radio::DeliveryOutcome::Missed) continue;

            gateway::Frame rx = f;
            rx.crc_ok = outcome == radio::DeliveryOutcome::Delivered;
            rec.disposition = target.on_receive(rx, t);
        }

        // a LoRaWAN gateway uploads whatever it just accepted immediately
        std::vector<gateway::Frame> accepted = target.take_uplink();
        if (!accepted.empty()) {
            DeliverPayload del;
            del.path = backend::Path::Radio;
            for (gateway::Frame& f : accepted) del.payloads.push_back(std::move(f.payload));
            push(t + scenario_.intervals.uplink_latency_s, EventKind::BackendDeliver,
                 std::move(del));
        }
    }

    void on_deliver(SimTime t, const DeliverPayload& p) {
        for (const std::vector<std::uint8_t>& payload : p.payloads) {
            LogRecord& rec = append(t, EventKind::BackendDeliver);
            if (auto decoded = gateway::decode_reading(payload)) {
                rec.node = decoded->node;
                rec.frame_seq = decoded->seq;
            }
            rec.ingest = store_.ingest(payload, t, p.path);
        }
    }

    void on_ferry_visit(SimTime t, const FerryVisitPayload& p) {
        nodesim::NodeState& ns = nodes_.at(p.node);
        std::vector<Reading> cargo = ns.offload_to_drone(t);

        LogRecord& rec = append(t, EventKind::FerryVisit);
        rec.drone = p.drone;
        rec.node = p.node;
        rec.count = static_cast<std::int64_t>(cargo.size());

        DeliverPayload del;
        del.path = backend::Path::Ferry;
        for (const Reading& r : cargo) {
            if (!carried_.mark(r.node, r.seq)) continue; // already flown once
            del.payloads.push_back(gateway::encode_reading(r));
        }
        if (!del.payloads.empty())
            push(t + p.return_leg_s, EventKind::BackendDeliver, std::move(del));
    }

    void on_summon(SimTime t, const SummonPayload& p) {
        LogRecord& rec = append(t, EventKind::Summon);
        rec.node = p.req.requester;

        auto it = nodes_.find(p.req.requester);
        bool ok = it != nodes_.end() && it->second.alive() && scenario_.ferry;
        rec.count = ok ? 1 : 0; // 0 = refused
        if (!ok) return;

        auto visit = ferry::summon_visit(scenario_.ferry->plan, positions_, p.req);
        if (!visit) {
            rec.count = 0;
            return;
        }
        push(visit->at, EventKind::FerryVisit,
             FerryVisitPayload{visit->drone, visit->node, visit->return_leg_s, true});
    }

    Scenario scenario_;
    std::map<NodeId, nodesim::NodeState> nodes_;
    std::map<NodeId, const NodeConfig*> node_cfg_;
    std::map<GatewayId, gateway::GatewayState> gateways_;
    std::map<GatewayId, const GatewayConfig*> gw_cfg_;
    std::map<NodeId, Position> positions_;
    std::map<NodeId, std::vector<Hop1Link>> hop1_;
    std::map<GatewayId, Hop2Link> hop2_;
    backend::Store store_;
    radio::DutyCycleLedger duty_;
    RngStreams streams_;
    std::map<std::uint32_t, RngStream> sensor_rng_;
    std::map<std::uint32_t, RngStream> hop1_rng_;
    std::map<std::uint32_t, RngStream> hop2_rng_;
    telemetry::WeatherSeries weather_;
    telemetry::SoilColumn soil_{telemetry::SoilParams{}};
    std::size_t soil_steps_ = 0;
    ferry::CarriedSet carried_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_sched_seq_ = 0;
    EventLog log_;
    const std::vector<radio::DeliveryOutcome>* scripted_;
    std::size_t replay_cursor_ = 0;
};

} // namespace

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::SampleTimer: return "sample";
        case EventKind::Transmission: return "transmission";
        case EventKind::GatewayFlush: return "flush";
        case EventKind::BackendDeliver: return "deliver";
        case EventKind::FerryVisit: return "ferry_visit";
        case EventKind::Summon: return "summon";
        case EventKind::ReportTick: return "report_tick";
        case EventKind::RunEnd: return "run_end";
    }
    return "unknown";
}

std::string log_record_json(const LogRecord& rec) {
    nlohmann::json j;
    j["at"] = rec.at;
    j["seq"] = rec.seq;
    j["kind"] = event_kind_name(rec.kind);
    if (rec.node) j["node"] = *rec.node;
    if (rec.gateway) j["gateway"] = *rec.gateway;
    if (rec.to_gateway) j["to_gateway"] = *rec.to_gateway;
    if (rec.drone) j["drone"] = *rec.drone;
    if (rec.hop) j["hop"] = *rec.hop;
    if (rec.frame_seq) j["frame_seq"] = *rec.frame_seq;
    if (rec.outcome) {
        switch (*rec.outcome) {
            case radio::DeliveryOutcome::Delivered: j["outcome"] = "delivered"; break;
            case radio::DeliveryOutcome::Error: j["outcome"] = "error"; break;
            case radio::DeliveryOutcome::Missed: j["outcome"] = "missed"; break;
        }
    }
    if (rec.disposition) {
        switch (*rec.disposition) {
            case gateway::Disposition::Accepted: j["disposition"] = "accepted"; break;
            case gateway::Disposition::Corrupted: j["disposition"] = "corrupted"; break;
            case gateway::Disposition::Duplicate: j["disposition"] = "duplicate"; break;
            case gateway::Disposition::Filtered: j["disposition"] = "filtered"; break;
        }
    }
    if (rec.ingest) {
        switch (*rec.ingest) {
            case backend::IngestStatus::Accepted: j["ingest"] = "accepted"; break;
            case backend::IngestStatus::Rejected: j["ingest"] = "rejected"; break;
            case backend::IngestStatus::Duplicate: j["ingest"] = "duplicate"; break;
            case backend::IngestStatus::DecodeError: j["ingest"] = "decode_error"; break;
        }
    }
    if (rec.airtime_ms) j["airtime_ms"] = *rec.airtime_ms;
    if (rec.duty_refused) j["duty_refused"] = true;
    if (rec.count) j["count"] = *rec.count;
    return j.dump();
}

RunResult run(const Scenario& s) {
    Engine engine(s, nullptr);
    return engine.run();
}

namespace {

void digest_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
}

template <typename T>
void digest_value(std::uint64_t& h, const T& v) {
    digest_bytes(h, &v, sizeof v);
}

void digest_double(std::uint64_t& h, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    digest_value(h, bits);
}

void digest_reading(std::uint64_t& h, const Reading& r) {
    digest_value(h, r.node);
    digest_value(h, r.seq);
    digest_value(h, r.sampled_at);
    digest_double(h, r.temperature_c);
    digest_double(h, r.humidity_pct);
    digest_double(h, r.vwc_6in);
    digest_double(h, r.vwc_12in);
    digest_double(h, r.nitrate_mg_l);
    digest_double(h, r.battery_pct);
    digest_value(h, r.firmware);
}

} // namespace

std::uint64_t state_digest(const RunResult& r) {
    std::uint64_t h = 0xCBF29CE484222325ULL;

    const backend::IngestCounters& c = r.store.counters();
    digest_value(h, c.presented);
    digest_value(h, c.accepted);
    digest_value(h, c.rejected);
    digest_value(h, c.duplicates);
    digest_value(h, c.decode_errors);
    for (const backend::StoreRecord& rec : r.store.records()) {
        digest_reading(h, rec.reading);
        digest_value(h, rec.received_at);
        digest_value(h, rec.path);
        digest_value(h, rec.accepted);
        digest_bytes(h, rec.rejected_field.data(), rec.rejected_field.size());
    }

    for (const nodesim::NodeState& ns : r.nodes) {
        digest_value(h, ns.id());
        digest_double(h, ns.battery_mj());
        digest_value(h, ns.next_seq());
        bool alive = ns.alive();
        digest_value(h, alive);
        SimTime died = ns.died_at().value_or(-1);
        digest_value(h, died);
        digest_value(h, ns.buffer_overflow_drops());
        for (const Reading& rd : ns.buffer()) digest_reading(h, rd);
    }

    for (const gateway::GatewayState& gs : r.gateways) {
        digest_value(h, gs.id());
        for (const gateway::LogEntry& e : gs.local_log()) {
            digest_value(h, e.at);
            digest_value(h, e.sender);
            digest_value(h, e.seq);
            digest_value(h, e.disposition);
        }
        for (const auto& [node, rx] : gs.rx_counters()) {
            digest_value(h, node);
            digest_value(h, rx.normal);
            digest_value(h, rx.error);
        }
        digest_value(h, gs.uplink_depth());
    }

    for (const auto& [key, ms] : r.duty.entries()) {
        digest_value(h, key.first);
        digest_value(h, key.second);
        digest_double(h, ms);
    }

    return h;
}

bool replay_check(const EventLog& log, const Scenario& s) {
    std::vector<radio::DeliveryOutcome> outcomes;
    for (const LogRecord& rec : log) {
        if (rec.kind == EventKind::Transmission && rec.outcome)
            outcomes.push_back(*rec.outcome);
    }

    RunResult fresh = run(s);
    Engine replayed(s, &outcomes);
    RunResult replay = replayed.run();
    return state_digest(fresh) == state_digest(replay);
}

} // namespace farmsim::engine
