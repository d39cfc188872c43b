#include <doctest.h>

#include "farmsim/node.hpp"

using namespace farmsim;
using namespace farmsim::nodesim;

namespace {

Reading reading_for(NodeId node, std::uint32_t seq) {
    Reading r;
    r.node = node;
    r.seq = seq;
    r.sampled_at = seq * 1'800;
    r.temperature_c = 20.0;
    r.humidity_pct = 50.0;
    r.vwc_6in = 0.2;
    r.vwc_12in = 0.3;
    r.nitrate_mg_l = 15.0;
    r.battery_pct = 90.0;
    return r;
}

} // namespace

TEST_CASE("sampling debits idle time plus the sampling cost") {
    EnergyModel e{10'000.0, 5.0, 2'000.0, 0.5, 5.0};
    NodeState n(1, Connectivity::GatewayReachable, e);
    CHECK(n.alive());
    CHECK(n.battery_mj() == doctest::Approx(10'000.0));

    auto s0 = n.begin_sample(0);
    REQUIRE(s0.has_value());
    CHECK(*s0 == 0);
    CHECK(n.battery_mj() == doctest::Approx(8'000.0));

    auto s1 = n.begin_sample(100); // 100 s idle at 5 mW = 500 mJ
    REQUIRE(s1.has_value());
    CHECK(*s1 == 1);
    CHECK(n.battery_mj() == doctest::Approx(5'500.0));
}

TEST_CASE("battery exhaustion kills the node permanently") {
    EnergyModel e{2'100.0, 5.0, 2'000.0, 0.5, 5.0};
    NodeState n(1, Connectivity::GatewayReachable, e);
    CHECK(n.begin_sample(0).has_value()); // 100 mJ left

    auto s = n.begin_sample(100); // needs 500 idle + 2000 sample
    CHECK_FALSE(s.has_value());
    CHECK_FALSE(n.alive());
    CHECK(n.battery_mj() == 0.0);
    CHECK(n.battery_pct() == 0.0);
    REQUIRE(n.died_at().has_value());
    CHECK(*n.died_at() == 100);

    CHECK_FALSE(n.begin_sample(200).has_value());
    CHECK(*n.died_at() == 100); // death time does not move
}

TEST_CASE("dispatch follows connectivity") {
    NodeState reachable(1, Connectivity::GatewayReachable, {});
    NodeState isolated(2, Connectivity::Disconnected, {});
    CHECK(reachable.dispatch(reading_for(1, 0)) == DispatchAction::Transmit);
    CHECK(isolated.dispatch(reading_for(2, 0)) == DispatchAction::Buffer);
}

TEST_CASE("the buffer evicts oldest first when full") {
    NodeState n(1, Connectivity::Disconnected, {}, 3);
    for (std::uint32_t i = 0; i < 5; ++i) n.buffer_reading(reading_for(1, i));
    CHECK(n.buffer().size() == 3);
    CHECK(n.buffer_overflow_drops() == 2);
    CHECK(n.buffer().front().seq == 2);
    CHECK(n.buffer().back().seq == 4);
}

TEST_CASE("transmit energy is half a millijoule per millisecond") {
    EnergyModel e{1'000.0, 0.0, 0.0, 0.5, 5.0};
    NodeState n(1, Connectivity::GatewayReachable, e);
    CHECK(n.debit_transmit(0, 87.296));
    CHECK(n.battery_mj() == doctest::Approx(1'000.0 - 43.648));
}

TEST_CASE("a transmit the battery cannot cover kills the node and sends nothing") {
    EnergyModel e{40.0, 0.0, 0.0, 0.5, 5.0};
    NodeState n(1, Connectivity::GatewayReachable, e);
    CHECK_FALSE(n.debit_transmit(0, 87.296)); // needs 43.648
    CHECK_FALSE(n.alive());
    CHECK(n.battery_mj() == 0.0);
}

TEST_CASE("drone offload drains the buffer in order and always completes") {
    EnergyModel e{100'000.0, 0.0, 0.0, 0.5, 5.0};
    NodeState n(1, Connectivity::Disconnected, e);
    for (std::uint32_t i = 0; i < 4; ++i) n.buffer_reading(reading_for(1, i));

    auto cargo = n.offload_to_drone(1'000);
    REQUIRE(cargo.size() == 4);
    for (std::uint32_t i = 0; i < 4; ++i) CHECK(cargo[i].seq == i);
    CHECK(n.buffer().empty());
    CHECK(n.battery_mj() == doctest::Approx(100'000.0 - 4 * 5.0));
}

TEST_CASE("offload finishes even when it exhausts the battery") {
    EnergyModel e{12.0, 0.0, 0.0, 0.5, 5.0};
    NodeState n(1, Connectivity::Disconnected, e);
    for (std::uint32_t i = 0; i < 4; ++i) n.buffer_reading(reading_for(1, i));

    auto cargo = n.offload_to_drone(10);
    CHECK(cargo.size() == 4); // transfer completes
    CHECK_FALSE(n.alive());
    CHECK(n.battery_mj() == 0.0);

    CHECK(n.offload_to_drone(20).empty()); // dead nodes yield nothing
}

TEST_CASE("settling idle time can be terminal") {
    EnergyModel e{1'000.0, 5.0, 0.0, 0.5, 5.0};
    NodeState n(1, Connectivity::GatewayReachable, e);
    n.settle_idle(100); // 500 mJ
    CHECK(n.battery_mj() == doctest::Approx(500.0));
    CHECK(n.alive());
    n.settle_idle(300); // another 1000 mJ wanted
    CHECK_FALSE(n.alive());
    REQUIRE(n.died_at().has_value());
    CHECK(*n.died_at() == 300);
}
