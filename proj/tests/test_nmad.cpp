#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "farmsim/gateway.hpp"
#include "farmsim/nmad.hpp"
#include "farmsim/rng.hpp"

using namespace farmsim;
using namespace farmsim::nmad;

namespace {

Reading sample(NodeId node, std::uint32_t seq, SimTime at, double temp = 20.0) {
    Reading r;
    r.node = node;
    r.seq = seq;
    r.sampled_at = at;
    r.temperature_c = temp;
    r.humidity_pct = 55.0;
    r.vwc_6in = 0.2;
    r.vwc_12in = 0.3;
    r.nitrate_mg_l = 15.0;
    r.battery_pct = 90.0;
    return r;
}

void put(backend::Store& store, const Reading& r, SimTime received_at) {
    (void)store.ingest(gateway::encode_reading(r), received_at, backend::Path::Radio);
}

} // namespace

TEST_CASE("expected message count is floor(duration / interval)") {
    CHECK(expected_messages(604'800, 1'800) == 336);
    CHECK(expected_messages(604'799, 1'800) == 335);
    CHECK(expected_messages(86'400, 1'800) == 48);
    CHECK(expected_messages(0, 1'800) == 0);
    CHECK(expected_messages(1'799, 1'800) == 0);
    CHECK_THROWS_AS((void)expected_messages(100, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)expected_messages(-1, 1'800), std::invalid_argument);
}

TEST_CASE("stability reproduces the single-hop reference row") {
    StabilityRatios r = stability({288, 179, 22});
    CHECK(std::round(r.pdr * 1e4) / 1e4 == doctest::Approx(0.6215));
    CHECK(std::round(r.per * 1e4) / 1e4 == doctest::Approx(0.0764));
    CHECK(std::round(r.pmr * 1e4) / 1e4 == doctest::Approx(0.3021));
}

TEST_CASE("stability reproduces the second-hop reference row") {
    // 179 forwarded, 158 arrived intact, 16 corrupted
    StabilityRatios r = stability({179, 158, 16});
    CHECK(std::round(r.pdr * 1e4) / 1e4 == doctest::Approx(0.8827));
    CHECK(std::round(r.per * 1e4) / 1e4 == doctest::Approx(0.0894));
    CHECK(std::round(r.pmr * 1e4) / 1e4 == doctest::Approx(0.0279));
}

TEST_CASE("composing the two reference hops yields the end-to-end row") {
    StabilityRatios e2e = compose_hops({0.6215, 0.0764, 0.3021},
                                       {0.8827, 0.0894, 0.0279});
    CHECK(std::abs(e2e.pdr - 0.5486) < 5e-4);
    CHECK(std::abs(e2e.per - 0.0556) < 5e-4);
    CHECK(std::abs(e2e.pmr - 0.3958) < 5e-4);
    CHECK(e2e.pdr + e2e.per + e2e.pmr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ratios always partition the expected count") {
    RngStream rng(77, "test", 0);
    for (int i = 0; i < 10'000; ++i) {
        auto expected = static_cast<std::int64_t>(rng.next_u64() % 1'000'000 + 1);
        auto normal = static_cast<std::int64_t>(
            rng.next_u64() % static_cast<std::uint64_t>(expected + 1));
        auto error = static_cast<std::int64_t>(
            rng.next_u64() % static_cast<std::uint64_t>(expected - normal + 1));
        StabilityRatios r = stability({expected, normal, error});
        CHECK(std::abs(r.pdr + r.per + r.pmr - 1.0) < 1e-9);
        CHECK(r.pdr >= 0.0);
        CHECK(r.per >= 0.0);
        CHECK(r.pmr >= 0.0);
    }
}

TEST_CASE("stability rejects impossible counters") {
    CHECK_THROWS_AS((void)stability({0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS((void)stability({-5, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS((void)stability({10, 8, 3}), std::invalid_argument);
    CHECK_THROWS_AS((void)stability({10, -1, 0}), std::invalid_argument);
}

TEST_CASE("silence follows the last-seen window strictly") {
    const SimTime t = 30 * kSecondsPerDay;
    const SimTime day = kSecondsPerDay;

    backend::Store store;
    put(store, sample(1, 0, t - 25 * 3'600), t - 25 * 3'600); // 25 h ago
    put(store, sample(2, 0, t - 23 * 3'600), t - 23 * 3'600); // 23 h ago
    put(store, sample(3, 0, t - day), t - day);               // exactly 24 h ago

    std::vector<RosterEntry> roster = {{1, "a"}, {2, "b"}, {3, "c"}, {4, "d"}};
    auto reports = build_report(store, roster, t, day);
    REQUIRE(reports.size() == 4);

    CHECK(reports[0].silent);
    CHECK_FALSE(reports[1].silent);
    CHECK_FALSE(reports[2].silent); // the boundary itself is still fresh
    CHECK(reports[3].silent);       // never heard from
    CHECK_FALSE(reports[3].last_seen.has_value());
}

TEST_CASE("window metrics use accepted readings only") {
    const SimTime t = 10 * kSecondsPerDay;
    backend::Store store;
    put(store, sample(1, 0, t - 2'000, 10.0), t - 2'000);
    put(store, sample(1, 1, t - 1'000, 20.0), t - 1'000);

    Reading bad = sample(1, 2, t - 500, 130.0); // rejected by the range filter
    put(store, bad, t - 500);

    auto reports = build_report(store, {{1, "a"}}, t, kSecondsPerDay);
    REQUIRE(reports.size() == 1);
    const NodeReport& rep = reports[0];

    CHECK(rep.messages_in_window == 2);
    CHECK(rep.range_violations == 1);
    REQUIRE(rep.last_seen.has_value());
    CHECK(*rep.last_seen == t - 500); // rejected traffic still proves liveness

    const auto& temp = rep.metrics.at("temperature_c");
    REQUIRE(temp.has_value());
    CHECK(temp->mean == doctest::Approx(15.0));
    CHECK(temp->std == doctest::Approx(5.0)); // population sd of {10, 20}
}

TEST_CASE("an empty window renders null metrics, never zeros") {
    backend::Store store;
    put(store, sample(1, 0, 100), 100);
    auto reports = build_report(store, {{1, "a"}}, 30 * kSecondsPerDay, kSecondsPerDay);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].messages_in_window == 0);
    for (const auto& [name, stats] : reports[0].metrics)
        CHECK_FALSE(stats.has_value());

    std::string json = render_report_json(reports, {}, 30 * kSecondsPerDay,
                                          kSecondsPerDay);
    CHECK(json.find("\"temperature_c\": null") != std::string::npos);
}

TEST_CASE("readings outside the window do not leak in") {
    const SimTime t = 10 * kSecondsPerDay;
    backend::Store store;
    put(store, sample(1, 0, t - kSecondsPerDay, 99.0), t - kSecondsPerDay - 1);
    put(store, sample(1, 1, t - 100, 20.0), t - 100);

    auto reports = build_report(store, {{1, "a"}}, t, kSecondsPerDay);
    CHECK(reports[0].messages_in_window == 1);
    CHECK(reports[0].metrics.at("temperature_c")->mean == doctest::Approx(20.0));
}

TEST_CASE("build_report rejects a non-positive window") {
    backend::Store store;
    CHECK_THROWS_AS((void)build_report(store, {}, 100, 0), std::invalid_argument);
}

TEST_CASE("report JSON is deterministic and carries stability rows") {
    const SimTime t = 2 * kSecondsPerDay;
    backend::Store store;
    put(store, sample(1, 0, t - 600), t - 600);
    auto reports = build_report(store, {{1, "field a"}}, t, kSecondsPerDay);

    std::vector<NodeStabilityRow> rows = {
        {1, "hop1", {288, 179, 22}},
        {1, "end_to_end", {288, 158, 16}},
    };
    std::string a = render_report_json(reports, rows, t, kSecondsPerDay);
    std::string b = render_report_json(reports, rows, t, kSecondsPerDay);
    CHECK(a == b);
    CHECK(a.find("\"stability\"") != std::string::npos);
    CHECK(a.find("\"pdr\": 0.5486") != std::string::npos); // 158/288, end-to-end row
    CHECK(a.find("\"pdr\": 0.6215") == std::string::npos); // hop rows stay out of the JSON
    CHECK(a.find("\"normal\": 158") != std::string::npos);
    CHECK(a.back() == '\n');

    std::string table = render_report_table(reports, rows, t, kSecondsPerDay);
    CHECK(table.find("field a") != std::string::npos);
    CHECK(table.find("0.6215") == std::string::npos); // table shows end-to-end only
    CHECK(table.find("0.5486") != std::string::npos);
}
