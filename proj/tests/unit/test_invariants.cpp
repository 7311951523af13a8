#include "wban/engine.hpp"
#include "wban/invariants.hpp"

#include <doctest.h>

#include <functional>

using namespace wban;

namespace {

struct Collect : TraceSink {
    std::vector<TraceEvent> events;
    void on_event(const TraceEvent& e) override { events.push_back(e); }
};

SimConfig cfg(Scheme s, std::uint64_t frames)
{
    SimConfig c;
    c.scheme = s;
    c.max_frames = frames;
    c.seed = 5;
    return c;
}

std::vector<TraceEvent> clean_trace(const SimConfig& c)
{
    Collect sink;
    SimConfig traced = c;
    traced.check_invariants = false;
    run(traced, &sink);
    return sink.events;
}

std::vector<std::string> replay(const SimConfig& c, std::vector<TraceEvent> events)
{
    InvariantChecker checker(c, false);
    for (const auto& e : events) checker.on_event(e);
    return checker.violations();
}

bool mentions(const std::vector<std::string>& v, const std::string& what)
{
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

// Applies `f` to the first event of type T that it accepts.
template <class T>
bool mutate_first(std::vector<TraceEvent>& events, const std::function<bool(T&)>& f)
{
    for (auto& e : events)
        if (auto* p = std::get_if<T>(&e); p && f(*p)) return true;
    return false;
}

}  // namespace

TEST_CASE("clean runs pass every check")
{
    for (auto s : {Scheme::Iaa, Scheme::Or, Scheme::Pc}) {
        const auto c = cfg(s, 400);
        const auto events = clean_trace(c);
        InvariantChecker checker(c, false);
        for (const auto& e : events) checker.on_event(e);
        CHECK(checker.ok());
        CHECK(checker.frames_checked() == 400);
        if (!checker.ok()) MESSAGE(checker.violations().front());
    }
}

TEST_CASE("strict mode throws from run")
{
    auto c = cfg(Scheme::Iaa, 50);
    c.check_invariants = true;
    CHECK_NOTHROW(run(c));
}

TEST_CASE("injected faults are caught")
{
    const auto c = cfg(Scheme::Iaa, 60);
    const auto base = clean_trace(c);
    REQUIRE(replay(c, base).empty());

    SUBCASE("clock running backwards")
    {
        auto ev = base;
        bool done = false;
        for (std::size_t i = 1; i < ev.size() && !done; ++i) {
            if (auto* t = std::get_if<SenseEvent>(&ev[i]); t && t->at > Time{1000}) {
                t->at = Time{0};
                done = true;
            }
        }
        REQUIRE(done);
        CHECK(mentions(replay(c, ev), "clock went backwards"));
    }
    SUBCASE("duplicate fixed slot")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameStartEvent>(ev, [](FrameStartEvent& f) {
            if (f.fixed_slots.empty()) return false;
            f.fixed_slots.push_back(f.fixed_slots.front());
            return true;
        }));
        CHECK(mentions(replay(c, ev), "two fixed slots"));
    }
    SUBCASE("p > m")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameStartEvent>(ev, [](FrameStartEvent& f) {
            if (f.fixed_slots.empty()) return false;
            f.flexible_slots = 0;
            return true;
        }));
        CHECK(mentions(replay(c, ev), "p > m"));
    }
    SUBCASE("stale node in the fixed part")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameStartEvent>(ev, [](FrameStartEvent& f) {
            if (f.frame < 5) return false;
            f.fixed_slots.insert(f.fixed_slots.begin(), NodeId{0});
            return true;
        }));
        CHECK(mentions(replay(c, ev), "last three frames"));
    }
    SUBCASE("node left off base at frame end")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameEndEvent>(ev, [](FrameEndEvent& f) {
            f.channels.front().second = ChannelId::reserved(1);
            return true;
        }));
        CHECK(mentions(replay(c, ev), "ended the frame on"));
    }
    SUBCASE("energy drift")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameEndEvent>(ev, [](FrameEndEvent& f) {
            f.max_energy_error = 1e-9;
            return true;
        }));
        CHECK(mentions(replay(c, ev), "energy ledger"));
    }
    SUBCASE("source data outside its period")
    {
        auto ev = base;
        REQUIRE(mutate_first<TxStartEvent>(ev, [](TxStartEvent& t) {
            if (t.kind != TxKind::Data || t.role != Role::Source || t.period != Period::Cap1a) return false;
            t.channel = ChannelId::reserved(0);
            return true;
        }));
        CHECK(mentions(replay(c, ev), "CAP-1A"));
    }
    SUBCASE("case partition")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameEndEvent>(ev, [](FrameEndEvent& f) {
            if (f.outcomes.empty()) return false;
            f.outcomes.push_back(f.outcomes.front());
            return true;
        }));
        CHECK(mentions(replay(c, ev), "two outcomes"));
    }
    SUBCASE("wrong case label")
    {
        auto ev = base;
        REQUIRE(mutate_first<FrameEndEvent>(ev, [](FrameEndEvent& f) {
            for (auto& [n, o] : f.outcomes) {
                if (o == Outcome::Case1) {
                    o = Outcome::Case3;
                    return true;
                }
            }
            return false;
        }));
        CHECK_FALSE(replay(c, ev).empty());
    }
}

TEST_CASE("baseline faults")
{
    const auto c = cfg(Scheme::Pc, 30);
    auto ev = clean_trace(c);
    REQUIRE(replay(c, ev).empty());
    REQUIRE(mutate_first<TxStartEvent>(ev, [](TxStartEvent& t) {
        t.power_dbm = 3.0;
        return true;
    }));
    const auto v = replay(c, ev);
    CHECK(mentions(v, "outside the control bounds"));
}
