#include "wban/outage.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace wban;
using namespace wban::outage;

namespace {

// P(S > x) for S the sum of n standard uniforms, by the alternating series.
double irwin_hall_sf(int n, double x)
{
    long double cdf = 0.0L, fact = 1.0L;
    for (int i = 2; i <= n; ++i) fact *= i;
    long double binom = 1.0L;
    for (int k = 0; k <= static_cast<int>(std::floor(x)) && k <= n; ++k) {
        cdf += ((k % 2) ? -1.0L : 1.0L) * binom * std::pow(static_cast<long double>(x - k), n);
        binom = binom * (n - k) / (k + 1);
    }
    return static_cast<double>(1.0L - cdf / fact);
}

}  // namespace

TEST_CASE("outage_empirical trivial cases")
{
    const std::vector<std::vector<double>> zeros(10, std::vector<double>(5, 0.0));
    CHECK(outage_empirical(zeros, 1.0) == 0.0);
    const std::vector<std::vector<double>> twice(10, std::vector<double>{1.0, 1.0});
    CHECK(outage_empirical(twice, 1.0) == 1.0);
    CHECK(outage_empirical(twice, 1.0, Direction::Below) == 0.0);
    CHECK_THROWS(outage_empirical(std::span<const std::vector<double>>{}, 1.0));
}

TEST_CASE("outage_empirical against the Irwin-Hall law")
{
    const int n = 12;
    const double thr = 1.0;
    const double width = thr / (n - 1);
    Rng rng(2024);
    const auto dist = Distribution::uniform(0.0, width);
    std::vector<std::vector<double>> samples(100000);
    for (auto& v : samples) {
        v.resize(n - 1);
        for (auto& d : v) d = dist.sample(rng);
    }
    // Independent brute force with a different generator.
    std::mt19937 other(7);
    std::uniform_real_distribution<double> u(0.0, width);
    for (double level : {0.45, 0.5, 0.6}) {
        const double p_hat = outage_empirical(samples, level * thr);
        const double exact = irwin_hall_sf(n - 1, level * (n - 1));
        const double sigma = std::sqrt(exact * (1 - exact) / samples.size());
        CHECK(std::abs(p_hat - exact) < 3 * sigma);
        int hits = 0;
        for (int t = 0; t < 100000; ++t) {
            double s = 0;
            for (int j = 0; j < n - 1; ++j) s += u(other);
            hits += s > level * thr;
        }
        CHECK(std::abs(hits / 1e5 - exact) < 3 * sigma);
    }
    CHECK(irwin_hall_sf(n - 1, 5.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("outage_empirical is nonincreasing in the threshold")
{
    Rng rng(3);
    std::vector<std::vector<double>> s(2000, std::vector<double>(6));
    for (auto& v : s)
        for (auto& d : v) d = rng.uniform01();
    double prev = 1.0;
    for (double thr = 0.05; thr <= 6.0; thr += 0.05) {
        const double p = outage_empirical(s, thr);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("mean interference examples")
{
    const std::vector<double> at_thr(5, 10.0);
    CHECK(mean_interference_probabilistic(at_thr, 10.0) == 0.0);
    const std::vector<double> half{5.0, 5.0};
    CHECK(mean_interference_probabilistic(half, 10.0) == 5.0);
    const std::vector<double> zero(3, 0.0);
    CHECK(mean_interference_probabilistic(zero, 10.0) == 0.0);
    const std::vector<double> neg{1.0, -0.5};
    CHECK_THROWS_AS(mean_interference_probabilistic(neg, 10.0), std::invalid_argument);
    const std::vector<double> big{20.0, 5.0};
    std::size_t clamped = 0;
    CHECK(mean_interference_probabilistic(big, 10.0, &clamped) == 2.5);
    CHECK(clamped == 1);
}

TEST_CASE("mean interference bound on random vectors")
{
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double thr = 0.5 + 10.0 * u(g);
        std::vector<double> v(1 + i % 15);
        for (auto& d : v) d = thr * u(g);
        long double want = 0.0L, total = 0.0L;
        for (double d : v) {
            want += static_cast<long double>(d) * (1.0L - static_cast<long double>(d) / thr);
            total += d;
        }
        const double got = mean_interference_probabilistic(v, thr);
        CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * std::max(1.0, static_cast<double>(total)));
        CHECK(got >= 0.0);
        CHECK(got <= static_cast<double>(total));
        CHECK(got < static_cast<double>(total));
    }
}

TEST_CASE("policy sampling frequencies")
{
    Rng rng(17);
    const std::vector<double> zero{0.0};
    for (int i = 0; i < 1000; ++i) CHECK(policy_sample(zero, 1.0, rng)[0].action == PolicyAction::NoChange);
    const std::vector<double> full{1.0};
    for (int i = 0; i < 1000; ++i) CHECK(policy_sample(full, 1.0, rng)[0].action == PolicyAction::SwitchedChannel);

    const std::vector<double> half{0.5};
    int doubled = 0, switched = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto o = policy_sample(half, 1.0, rng)[0];
        if (o.action != PolicyAction::NoChange) {
            ++doubled;
            CHECK(o.contribution == 0.0);
        } else {
            CHECK(o.contribution == 0.5);
        }
        if (o.action == PolicyAction::SwitchedChannel) ++switched;
    }
    CHECK(std::abs(doubled / double(n) - 0.5) < 0.01);
    CHECK(std::abs(switched / double(doubled) - 0.25) < 0.01);
    CHECK(std::abs(switched / double(n) - 0.125) < 3 * std::sqrt(0.125 * 0.875 / n));
}

TEST_CASE("policy outage inequality examples")
{
    const int n = 12;
    const double thr = 1.0;
    Rng rng(99);
    SUBCASE("deterministic at the boundary")
    {
        const auto r = verify_policy_inequality(Distribution::deterministic(thr / (n - 1)), n, thr, 10000, rng);
        CHECK(r.p_out.hits == 0);
        CHECK(r.p_pr.hits == 0);
        CHECK(r.holds);
        CHECK(r.degenerate);
    }
    SUBCASE("uniform on twice the share")
    {
        const auto r = verify_policy_inequality(Distribution::uniform(0.0, 2 * thr / (n - 1)), n, thr, 100000, rng);
        CHECK(r.p_pr.estimate < r.p_out.estimate);
        CHECK(r.non_overlapping);
        CHECK(r.holds);
        CHECK_FALSE(r.degenerate);
        // P_out oracle: sum of 11 U(0, 2/11) exceeds 1 iff Irwin-Hall(11) exceeds 5.5.
        CHECK(std::abs(r.p_out.estimate - 0.5) < 3 * std::sqrt(0.25 / 1e5));
    }
    SUBCASE("single interferer")
    {
        const auto r = verify_policy_inequality(Distribution::uniform(0.0, thr), 2, thr, 10000, rng);
        CHECK(r.p_out.hits == 0);
        CHECK(r.p_pr.hits == 0);
    }
    SUBCASE("other families")
    {
        for (const auto& d : {Distribution::truncated_exponential(11.0, 0.8), Distribution::two_point(0.0, 0.2, 0.5)}) {
            const auto r = verify_policy_inequality(d, n, thr, 20000, rng);
            CHECK(r.holds);
            if (r.p_out.hits > 0) CHECK(r.p_pr.estimate < r.p_out.estimate);
        }
    }
    CHECK_THROWS(verify_policy_inequality(Distribution::uniform(0, 1), n, thr, 9999, rng));
}

TEST_CASE("doubling probability")
{
    CHECK(doubling_probability(0.5, 1.0) == 0.5);
    CHECK(doubling_probability(2.0, 1.0) == 1.0);
    CHECK(doubling_probability(1.0, 1.0) == 1.0);
    CHECK(doubling_probability(Distribution::uniform(0.0, 1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // Half the mass above the threshold, half spread uniformly below.
    CHECK(doubling_probability(Distribution::uniform(0.0, 2.0), 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(doubling_probability(Distribution::two_point(0.25, 3.0, 0.4), 1.0) == doctest::Approx(0.6 * 0.25 + 0.4));
    CHECK(doubling_probability(Distribution::deterministic(0.3), 1.0) == doctest::Approx(0.3));
    // Truncated exponential entirely below the threshold: E[X] / thr.
    const double rate = 3.0, upper = 0.9;
    const double mean = 1.0 / rate - upper * std::exp(-rate * upper) / (1.0 - std::exp(-rate * upper));
    CHECK(doubling_probability(Distribution::truncated_exponential(rate, upper), 1.0) ==
          doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("wilson interval")
{
    const auto w = wilson(50, 100, 1.96);
    CHECK(w.estimate == 0.5);
    CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
    const auto z = wilson(0, 1000, kZ99);
    CHECK(z.lo == 0.0);
    CHECK(z.hi > 0.0);
}

TEST_CASE("distribution parsing and sampling")
{
    const auto u = parse_distribution("uniform:0,2");
    CHECK(u.kind == Distribution::Kind::Uniform);
    CHECK(u.b == 2.0);
    CHECK(parse_distribution("texp:3,1").kind == Distribution::Kind::TruncExp);
    CHECK(parse_distribution("twopoint:0,1,0.3").p == 0.3);
    CHECK(parse_distribution("det:4").a == 4.0);
    CHECK_THROWS(parse_distribution("gauss:0,1"));
    CHECK_THROWS(parse_distribution("uniform:2,1"));
    CHECK_THROWS(parse_distribution("uniform:-1,1"));
    CHECK(u.scaled(0.5).b == 1.0);

    Rng rng(4);
    const auto t = Distribution::truncated_exponential(2.0, 1.0);
    double s = 0;
    for (int i = 0; i < 100000; ++i) {
        const double x = t.sample(rng);
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 1.0);
        s += x;
    }
    const double mean = 0.5 - std::exp(-2.0) / (1.0 - std::exp(-2.0));
    CHECK(std::abs(s / 1e5 - mean) < 0.005);
    CHECK(parse_direction("below") == Direction::Below);
    CHECK_THROWS(parse_direction("sideways"));
}

TEST_CASE("analyze csv layout")
{
    std::ostringstream os;
    Rng rng(1);
    const AnalyzeRow row{1.0, verify_policy_inequality(Distribution::uniform(0, 0.2), 12, 1.0, 10000, rng)};
    write_analyze_csv(os, std::span<const AnalyzeRow>(&row, 1));
    const auto text = os.str();
    CHECK(text.rfind("threshold,p_out,p_out_lo,p_out_hi,p_pr,p_pr_lo,p_pr_hi,holds,non_overlapping,degenerate\n", 0) ==
          0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
