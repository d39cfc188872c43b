#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "farmsim/radio.hpp"
#include "farmsim/rng.hpp"

using namespace farmsim;
using namespace farmsim::radio;

TEST_CASE("symbol time for SF7 at 125 kHz is 1.024 ms") {
    CHECK(symbol_time_ms({}) == doctest::Approx(1.024).epsilon(1e-12));
    RadioParams sf12{12, 125'000, 1, 8, true, true};
    CHECK(symbol_time_ms(sf12) == doctest::Approx(32.768).epsilon(1e-12));
}

TEST_CASE("frozen airtime values") {
    RadioParams sf7{7, 125'000, 1, 8, true, true};
    CHECK(airtime_ms(sf7, 20) == doctest::Approx(56.576).epsilon(1e-9));
    CHECK(airtime_ms(sf7, 43) == doctest::Approx(87.296).epsilon(1e-9));

    RadioParams sf9{9, 125'000, 1, 8, true, true};
    CHECK(airtime_ms(sf9, 43) == doctest::Approx(287.744).epsilon(1e-9));

    RadioParams sf12{12, 125'000, 1, 8, true, true};
    CHECK(airtime_ms(sf12, 43) == doctest::Approx(2138.112).epsilon(1e-9));
}

TEST_CASE("airtime matches an independent recomputation over a grid") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (int bw : {125'000, 250'000}) {
            for (int len : {1, 12, 43, 128, 242}) {
                RadioParams p{sf, bw, 1, 8, true, true};
                double t_sym = std::pow(2.0, sf) * 1000.0 / bw;
                bool de = sf >= 11 && bw == 125'000;
                double num = 8.0 * len - 4.0 * sf + 28.0 + 16.0 - 20.0 * 0.0;
                double den = 4.0 * (sf - (de ? 2.0 : 0.0));
                double blocks = std::max(std::ceil(num / den), 0.0);
                double expect = (8.0 + blocks * (p.cr + 4.0) + p.preamble_symbols + 4.25) * t_sym;
                CAPTURE(sf);
                CAPTURE(bw);
                CAPTURE(len);
                CHECK(airtime_ms(p, len) == doctest::Approx(expect).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("airtime grows with spreading factor and payload") {
    for (int sf = 7; sf < 12; ++sf) {
        RadioParams lo{sf, 125'000, 1, 8, true, true};
        RadioParams hi{sf + 1, 125'000, 1, 8, true, true};
        CHECK(airtime_ms(hi, 43) > airtime_ms(lo, 43));
    }
    RadioParams p{9, 125'000, 1, 8, true, true};
    for (int len = 1; len < 242; len += 20)
        CHECK(airtime_ms(p, len + 20 > 242 ? 242 : len + 20) >= airtime_ms(p, len));
}

TEST_CASE("airtime rejects out-of-range parameters") {
    CHECK_THROWS_AS((void)airtime_ms({6, 125'000, 1, 8, true, true}, 20),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)airtime_ms({13, 125'000, 1, 8, true, true}, 20),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)airtime_ms({7, 500'000, 1, 8, true, true}, 20),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)airtime_ms({}, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)airtime_ms({}, 243), std::invalid_argument);
}

TEST_CASE("received power follows inverse square attenuation") {
    CHECK(rx_power_rel(1.0) == doctest::Approx(1.0));
    CHECK(rx_power_rel(2.0) == doctest::Approx(0.25));
    for (double d : {3.5, 70.0, 1200.0})
        CHECK(rx_power_rel(2.0 * d) == doctest::Approx(rx_power_rel(d) / 4.0));
    CHECK_THROWS_AS((void)rx_power_rel(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)rx_power_rel(-5.0), std::invalid_argument);
}

TEST_CASE("explicit probability triples pass through untouched") {
    LinkProfile link;
    link.explicit_probs = OutcomeProbs{0.6215, 0.0764, 0.3021};
    OutcomeProbs p = outcome_probs(link);
    CHECK(p.deliver == doctest::Approx(0.6215));
    CHECK(p.error == doctest::Approx(0.0764));
    CHECK(p.miss == doctest::Approx(0.3021));
}

TEST_CASE("derived probabilities hit the calibration anchors") {
    LinkProfile near;
    near.distance_m = 500.0;
    CHECK(outcome_probs(near).deliver == doctest::Approx(0.99).epsilon(1e-6));

    LinkProfile far;
    far.distance_m = 6000.0;
    CHECK(outcome_probs(far).deliver == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("derived probabilities always partition the unit mass") {
    for (double d = 10.0; d < 50'000.0; d *= 1.7) {
        for (int sf = 7; sf <= 12; ++sf) {
            for (int bw : {125'000, 250'000}) {
                for (bool los : {true, false}) {
                    LinkProfile link;
                    link.distance_m = d;
                    link.los = los;
                    link.params = {sf, bw, 1, 8, true, true};
                    OutcomeProbs p = outcome_probs(link);
                    CAPTURE(d);
                    CAPTURE(sf);
                    CHECK(p.deliver >= 0.0);
                    CHECK(p.error >= 0.0);
                    CHECK(p.miss >= 0.0);
                    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
                    CHECK(p.error <= 0.1 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("delivery decays with distance and improves with spreading factor") {
    double prev = 1.1;
    for (double d : {100.0, 400.0, 1000.0, 2500.0, 6000.0}) {
        LinkProfile link;
        link.distance_m = d;
        double p = outcome_probs(link).deliver;
        CHECK(p < prev);
        prev = p;
    }
    for (int sf = 7; sf < 12; ++sf) {
        LinkProfile lo, hi;
        lo.distance_m = hi.distance_m = 3000.0;
        lo.params.sf = sf;
        hi.params.sf = sf + 1;
        CHECK(outcome_probs(hi).deliver > outcome_probs(lo).deliver);
    }
}

TEST_CASE("obstruction halves delivery with the remainder going to miss") {
    LinkProfile los_link;
    los_link.distance_m = 1500.0;
    LinkProfile nlos_link = los_link;
    nlos_link.los = false;

    OutcomeProbs a = outcome_probs(los_link);
    OutcomeProbs b = outcome_probs(nlos_link);
    CHECK(b.deliver == doctest::Approx(a.deliver * 0.5).epsilon(1e-9));
    CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hopeless links are exactly all-miss") {
    LinkProfile link;
    link.distance_m = 100'000.0;
    OutcomeProbs p = outcome_probs(link);
    CHECK(p.deliver == 0.0);
    CHECK(p.error == 0.0);
    CHECK(p.miss == 1.0);
}

TEST_CASE("sample_outcome consumes one uniform and tracks the triple") {
    LinkProfile link;
    link.explicit_probs = OutcomeProbs{0.6215, 0.0764, 0.3021};
    RngStream rng(123, "hop1", 1);

    (void)sample_outcome(link, rng);
    CHECK(rng.draws() == 1);

    int delivered = 0, errored = 0, missed = 0;
    const int n = 50'000;
    for (int i = 0; i < n; ++i) {
        switch (sample_outcome(link, rng)) {
            case DeliveryOutcome::Delivered: ++delivered; break;
            case DeliveryOutcome::Error: ++errored; break;
            case DeliveryOutcome::Missed: ++missed; break;
        }
    }
    auto within = [n](int count, double p) {
        double sd = std::sqrt(p * (1.0 - p) * n);
        return std::abs(count - p * n) < 4.0 * sd;
    };
    CHECK(within(delivered, 0.6215));
    CHECK(within(errored, 0.0764));
    CHECK(within(missed, 0.3021));
}

TEST_CASE("duty ledger accumulates per transmitter per day") {
    DutyCycleLedger ledger(false);
    for (int i = 0; i < 48; ++i)
        CHECK(ledger.charge(5, 0, 400.0) == ChargeResult::Accepted);
    CHECK(ledger.used_ms(5, 0) == doctest::Approx(19'200.0));
    CHECK(ledger.used_ms(5, 1) == 0.0);
    CHECK(ledger.used_ms(6, 0) == 0.0);
}

TEST_CASE("enforcement refuses charges past the daily budget") {
    DutyCycleLedger ledger(true);
    const double frame_ms = 2138.112; // SF12, 43 bytes
    int accepted = 0;
    for (int i = 0; i < 20; ++i)
        if (ledger.charge(1, 0, frame_ms) == ChargeResult::Accepted) ++accepted;
    CHECK(accepted == 14); // 14 * 2138.112 = 29933.568 ms
    CHECK(ledger.used_ms(1, 0) == doctest::Approx(14 * frame_ms));
    CHECK(ledger.used_ms(1, 0) <= kDailyAirtimeBudgetMs);

    // the next day starts fresh
    CHECK(ledger.charge(1, 1, frame_ms) == ChargeResult::Accepted);
}

TEST_CASE("without enforcement the ledger records but never refuses") {
    DutyCycleLedger ledger(false);
    for (int i = 0; i < 20; ++i)
        CHECK(ledger.charge(1, 0, 2138.112) == ChargeResult::Accepted);
    CHECK(ledger.used_ms(1, 0) > kDailyAirtimeBudgetMs);
}
