#include "wban/radio_channel.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace wban;

namespace {

// Straight sum in long double, no shared helpers.
double reference_sinr_db(double desired_dbm, const std::vector<double>& interferers_dbm, double noise_dbm)
{
    long double denom = std::pow(10.0L, noise_dbm / 10.0L);
    for (double i : interferers_dbm) denom += std::pow(10.0L, i / 10.0L);
    return static_cast<double>(10.0L * std::log10(std::pow(10.0L, desired_dbm / 10.0L) / denom));
}

}  // namespace

TEST_CASE("path loss")
{
    const PathLossModel m;
    CHECK(path_loss_db(m, 1.0) == doctest::Approx(40.0));
    CHECK(path_loss_db(m, 2.0) == doctest::Approx(40.0 + 42.2 * std::log10(2.0)).epsilon(1e-12));
    CHECK(path_loss_db(m, 2.0) == doctest::Approx(52.70).epsilon(1e-4));
    CHECK(path_loss_db(m, 0.5) == doctest::Approx(40.0));
    CHECK_THROWS(path_loss_db(m, std::nan("")));
    double last = path_loss_db(m, 1.0);
    for (double d = 1.0; d < 10.0; d += 0.37) {
        CHECK(path_loss_db(m, d) >= last);
        last = path_loss_db(m, d);
    }
}

TEST_CASE("received power")
{
    const PathLossModel m;
    CHECK(received_power_dbm(0.0, m, 1.0) == doctest::Approx(-40.0));
    CHECK(received_power_dbm(0.0, m, 2.0) == doctest::Approx(-52.70).epsilon(1e-4));
    CHECK(received_power_dbm(-10.0, m, 1.0) == doctest::Approx(-50.0));
}

TEST_CASE("sinr")
{
    CHECK(compute_sinr_db(-60.0, {}, -100.0) == doctest::Approx(40.0));
    const std::vector<double> one{-60.0};
    CHECK(compute_sinr_db(-60.0, one, -100.0) == doctest::Approx(-0.000004).epsilon(1e-3));
    const std::vector<double> two{-70.0, -70.0};
    CHECK(compute_sinr_db(-50.0, two, -100.0) == doctest::Approx(10 * std::log10(1e-5 / (2e-7 + 1e-10))));
    CHECK(compute_sinr_db(-50.0, two, -100.0) == doctest::Approx(16.99).epsilon(1e-3));

    SUBCASE("agrees with an extended precision sum")
    {
        Rng rng(99);
        for (int i = 0; i < 1000; ++i) {
            const double d = rng.uniform(-90, -30);
            std::vector<double> in(rng.uniform_below(5));
            for (auto& x : in) x = rng.uniform(-100, -30);
            CHECK(std::abs(compute_sinr_db(d, in, -100.0) - reference_sinr_db(d, in, -100.0)) < 1e-9);
        }
    }
    SUBCASE("monotone")
    {
        const std::vector<double> in{-70.0};
        const std::vector<double> louder{-69.0};
        CHECK(compute_sinr_db(-50.0, in, -100.0) < compute_sinr_db(-49.0, in, -100.0));
        CHECK(compute_sinr_db(-50.0, louder, -100.0) < compute_sinr_db(-50.0, in, -100.0));
    }
}

TEST_CASE("active transmitters and orthogonality")
{
    std::vector<NodePosition> pos{{NodeId{0}, 0, 0}, {NodeId{1}, 1, 0}, {NodeId{2}, 0, 1}, {NodeId{3}, 1, 1}};
    ChannelEnvironment env(pos, PathLossModel{}, -100.0);
    CHECK(active_transmitters(env, ChannelId::base(), Time{0}).empty());

    auto tx = [](std::uint64_t id, std::uint32_t node, ChannelId c, Time s, Time e) {
        Transmission t;
        t.id = id;
        t.source = NodeId{node};
        t.destination = NodeId{0};
        t.channel = c;
        t.start = s;
        t.end = e;
        return t;
    };
    const Time start = from_millis(10.0);
    const Time end = start + from_seconds(96.0 / 250000.0);
    CHECK(end == from_millis(10.384));
    env.registry().add(tx(1, 1, ChannelId::base(), start, end));
    env.registry().add(tx(2, 2, ChannelId::base(), start, end));
    env.registry().add(tx(3, 3, ChannelId::reserved(0), start, end));

    const auto base = active_transmitters(env, ChannelId::base(), from_millis(10.2));
    CHECK(base == std::vector<NodeId>{NodeId{1}, NodeId{2}});
    const auto res = active_transmitters(env, ChannelId::reserved(0), from_millis(10.2));
    CHECK(res == std::vector<NodeId>{NodeId{3}});
    CHECK(active_transmitters(env, ChannelId::base(), end).empty());

    // A reserved-channel transmission never counts as base interference.
    const double only_base = env.interference_mw(NodeId{0}, ChannelId::base());
    const double expect = 2 * env.gain(NodeId{1}, NodeId{0});
    CHECK(only_base == doctest::Approx(expect));
}

TEST_CASE("distances below the reference clamp")
{
    std::vector<NodePosition> pos{{NodeId{0}, 0, 0}, {NodeId{1}, 0.3, 0}, {NodeId{2}, 2, 0}};
    ChannelEnvironment env(pos, PathLossModel{}, -100.0);
    CHECK(env.link_loss_db(NodeId{0}, NodeId{1}) == doctest::Approx(40.0));
    CHECK(env.link_loss_db(NodeId{0}, NodeId{2}) == doctest::Approx(40 + 42.2 * std::log10(2.0)));
    CHECK(env.gain(NodeId{0}, NodeId{2}) == doctest::Approx(env.gain(NodeId{2}, NodeId{0})));
}
