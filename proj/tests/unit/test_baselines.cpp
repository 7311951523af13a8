#include "wban/baselines.hpp"

#include <doctest.h>

#include <vector>

using namespace wban;

TEST_CASE("or_relay_select")
{
    const std::vector<RelayCandidate> a{{NodeId{1}, 10.0}, {NodeId{2}, 15.0}};
    CHECK(or_relay_select(a) == NodeId{2});
    const std::vector<RelayCandidate> tie{{NodeId{2}, 10.0}, {NodeId{1}, 10.0}};
    CHECK(or_relay_select(tie) == NodeId{1});
    const std::vector<RelayCandidate> one{{NodeId{3}, -4.0}};
    CHECK(or_relay_select(one) == NodeId{3});
    CHECK_FALSE(or_relay_select({}));
}

TEST_CASE("pc_power_update")
{
    const PowerBounds b{-20.0, 0.0};
    CHECK(pc_power_update(0.0, 5.0, 10.0, 1.0, 2.0, b) == 0.0);
    CHECK(pc_power_update(-5.0, 20.0, 10.0, 1.0, 2.0, b) == -6.0);
    CHECK(pc_power_update(-5.0, 11.0, 10.0, 1.0, 2.0, b) == -5.0);
    CHECK(pc_power_update(-5.0, 12.0, 10.0, 1.0, 2.0, b) == -5.0);
    CHECK(pc_power_update(-5.0, 9.9, 10.0, 1.0, 2.0, b) == -4.0);
    CHECK(pc_power_update(-20.0, 40.0, 10.0, 1.0, 2.0, b) == -20.0);
}

TEST_CASE("pc converges without interference")
{
    // SINR tracks power one for one: sinr = p + 30. Target 10 is met from -20 dBm.
    const PowerBounds b{-20.0, 0.0};
    const double target = 10.0, step = 1.0;
    for (double offset : {30.0, 25.0, 15.0, 10.0}) {
        double p = 0.0;
        int updates = 0;
        for (; updates < 100; ++updates) {
            const double next = pc_power_update(p, p + offset, target, step, 2.0, b);
            if (next == p) break;
            p = next;
        }
        CHECK(updates <= static_cast<int>((b.max_dbm - b.min_dbm) / step));
        CHECK(p >= b.min_dbm);
        CHECK(p <= b.max_dbm);
        const bool at_floor = p == b.min_dbm;
        CHECK((at_floor || p + offset >= target));
        if (!at_floor) CHECK(p + offset <= target + 2.0);
    }
}

TEST_CASE("pc tx draw")
{
    CHECK(pc_tx_draw_mw(0.0, 52.2, 30.0) == doctest::Approx(52.2));
    CHECK(pc_tx_draw_mw(-10.0, 52.2, 30.0) == doctest::Approx(30.0 + 22.2 * 0.1));
    CHECK(pc_tx_draw_mw(-20.0, 52.2, 30.0) < pc_tx_draw_mw(-19.0, 52.2, 30.0));
}

TEST_CASE("binary exponential backoff")
{
    BebParams p;
    auto s = beb_reset(p);
    CHECK(s.cw == 8);
    CHECK(beb_on_cca(s, true, p) == BebVerdict::Transmit);
    CHECK(beb_on_cca(s, false, p) == BebVerdict::Backoff);
    CHECK(s.cw == 16);
    for (int i = 0; i < 3; ++i) CHECK(beb_on_cca(s, false, p) == BebVerdict::Backoff);
    CHECK(s.cw == 128);
    CHECK(s.nb == 4);
    // Fifth busy assessment is an access failure: counts as a retry.
    CHECK(beb_on_cca(s, false, p) == BebVerdict::Backoff);
    CHECK(s.retries == 1);
    CHECK(s.nb == 0);
    CHECK(s.cw == p.cw_min);
    CHECK(beb_on_no_ack(s, p) == BebVerdict::Backoff);
    CHECK(beb_on_no_ack(s, p) == BebVerdict::Backoff);
    CHECK(beb_on_no_ack(s, p) == BebVerdict::GiveUp);
}

TEST_CASE("parameter validation")
{
    PcParams pc;
    pc.bounds = {1.0, 0.0};
    CHECK_THROWS_AS(pc.validate(), ConfigError);
    BebParams beb;
    beb.cw_min = 0;
    CHECK_THROWS_AS(beb.validate(), ConfigError);
}
