// One PASS/FAIL line per acceptance criterion, with the measured figures.
#include "wban/engine.hpp"
#include "wban/invariants.hpp"
#include "wban/metrics.hpp"
#include "wban/outage.hpp"
#include "wban/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace wban;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail)
{
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void policy_inequality()
{
    const auto t0 = Clock::now();
    Rng rng(20240601);
    bool ok = true;
    std::string detail;
    for (std::uint32_t n : {4u, 8u, 12u}) {
        const double thr = 1.0;
        const auto d = outage::Distribution::uniform(0.0, 2.0 * thr / (n - 1));
        const auto r = outage::verify_policy_inequality(d, n, thr, 100000, rng);
        ok = ok && r.p_pr.estimate < r.p_out.estimate && r.non_overlapping;
        detail += fmt("N=%u P_Pr=%.5f [%.5f,%.5f] P_out=%.5f [%.5f,%.5f] gap=%.5f; ", n, r.p_pr.estimate, r.p_pr.lo,
                      r.p_pr.hi, r.p_out.estimate, r.p_out.lo, r.p_out.hi, r.p_out.lo - r.p_pr.hi);
    }
    const double secs = seconds_since(t0);
    report(ok && secs < 10.0, "policy_outage_inequality", detail + fmt("runtime %.2f s (limit 10 s)", secs));
}

void mean_interference_exactness()
{
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double thr = std::exp(u(g) * 8.0 - 4.0);
        std::vector<double> v(1 + static_cast<std::size_t>(u(g) * 30));
        for (auto& x : v) x = thr * u(g);
        // Brute force: expectation over the two policy outcomes per sensor.
        long double expect = 0.0L;
        for (double x : v) {
            const long double p = static_cast<long double>(x) / thr;
            expect += p * 0.0L + (1.0L - p) * x;
        }
        const double got = outage::mean_interference_probabilistic(v, thr);
        const long double rel = expect == 0.0L ? std::fabs(got) : std::fabs((got - expect) / expect);
        worst = std::max(worst, static_cast<double>(rel));
    }
    report(worst <= 1e-12, "mean_interference_exactness", fmt("worst relative error %.3e over 1000 vectors (limit 1e-12)", worst));
}

struct SchemeRuns {
    std::map<Scheme, std::vector<const RunResult*>> by_scheme;  // indexed by seed order
};

void scheme_ordering_and_energy()
{
    SweepSpec spec;
    spec.schemes = {Scheme::Iaa, Scheme::Or, Scheme::Pc};
    spec.thresholds = {SimConfig{}.sinr_threshold_db};
    for (std::uint64_t s = 1; s <= 20; ++s) spec.seeds.push_back(s);
    spec.workers = 1;
    const auto t0 = Clock::now();
    const auto out = run_sweep_in_memory(spec);
    const double secs = seconds_since(t0);

    std::map<Scheme, std::map<std::uint64_t, const RunResult*>> runs;
    for (const auto& r : out.runs) runs[r.scheme][r.seed] = &r.result;

    int all_three = 0, iaa_pc = 0, pc_or = 0, iaa_or = 0;
    double sum_iaa = 0, sum_or = 0, sum_pc = 0;
    for (auto seed : spec.seeds) {
        const double i = *runs[Scheme::Iaa][seed]->summary.time_avg_min_sinr_db;
        const double o = *runs[Scheme::Or][seed]->summary.time_avg_min_sinr_db;
        const double p = *runs[Scheme::Pc][seed]->summary.time_avg_min_sinr_db;
        sum_iaa += i;
        sum_or += o;
        sum_pc += p;
        all_three += i > p && p > o;
        iaa_pc += i > p;
        pc_or += p > o;
        iaa_or += i > o;
    }
    const double n = static_cast<double>(spec.seeds.size());
    const double margin = (sum_iaa - sum_or) / n;
    const bool order_ok = all_three >= 0.9 * n && margin > 0.0 && secs < 300.0;
    report(order_ok, "scheme_ordering",
           fmt("IAA>PC>OR in %d/20 seeds (need 18); IAA>PC %d/20, PC>OR %d/20, IAA>OR %d/20; mean time-averaged "
               "min SINR IAA %.3f PC %.3f OR %.3f dB; IAA-OR margin %.3f dB; 3x20 sweep of 3000 s took %.1f s "
               "(limit 300 s)",
               all_three, iaa_pc, pc_or, iaa_or, sum_iaa / n, sum_pc / n, sum_or / n, margin, secs));

    // Medians across seeds at each record time after ten minutes.
    const auto& ref = runs[Scheme::Iaa].begin()->second->records;
    bool energy_ok = true;
    std::size_t checked = 0;
    double worst_ip = 1e300, worst_po = 1e300;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        if (ref[k].time_s <= 600.0) continue;
        std::map<Scheme, double> med;
        for (auto s : spec.schemes) {
            std::vector<double> v;
            for (auto seed : spec.seeds) v.push_back(runs[s][seed]->records.at(k).energy_residue_j);
            med[s] = median(v);
        }
        worst_ip = std::min(worst_ip, med[Scheme::Iaa] - med[Scheme::Pc]);
        worst_po = std::min(worst_po, med[Scheme::Pc] - med[Scheme::Or]);
        energy_ok = energy_ok && med[Scheme::Iaa] >= med[Scheme::Pc] && med[Scheme::Pc] >= med[Scheme::Or];
        ++checked;
    }
    std::vector<double> drop_iaa, drop_or;
    for (auto seed : spec.seeds) {
        const auto& a = runs[Scheme::Iaa][seed]->summary;
        const auto& b = runs[Scheme::Or][seed]->summary;
        drop_iaa.push_back(a.initial_energy_j - a.final_energy_residue_j);
        drop_or.push_back(b.initial_energy_j - b.final_energy_residue_j);
    }
    const double di = median(drop_iaa), dor = median(drop_or);
    energy_ok = energy_ok && checked > 0 && di < dor;
    report(energy_ok, "energy_ordering",
           fmt("%zu sample times after 600 s; min median gap IAA-PC %.4f J, PC-OR %.4f J; median total drop IAA "
               "%.3f J vs OR %.3f J",
               checked, worst_ip, worst_po, di, dor));
}

void threshold_sweep()
{
    const double crossover = -45.0;
    SweepSpec spec;
    spec.schemes = {Scheme::Iaa, Scheme::Or};
    for (double t = -60.0; t <= -40.0; t += 5.0) spec.thresholds.push_back(t);
    for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
    spec.base.duration_s = 300.0;
    spec.workers = 1;
    const auto t0 = Clock::now();
    const auto out = run_sweep_in_memory(spec);
    const double secs = seconds_since(t0);

    std::map<std::pair<Scheme, double>, std::map<std::uint64_t, double>> avg;
    for (const auto& r : out.runs) avg[{r.scheme, r.threshold_db}][r.seed] = *r.result.summary.avg_sinr_db;

    bool ok = true;
    std::string detail;
    std::vector<double> gaps;
    for (double t : spec.thresholds) {
        int wins = 0;
        double gi = 0, go = 0;
        for (auto seed : spec.seeds) {
            const double i = avg[{Scheme::Iaa, t}][seed], o = avg[{Scheme::Or, t}][seed];
            wins += i >= o;
            gi += i;
            go += o;
        }
        const double n = static_cast<double>(spec.seeds.size());
        gaps.push_back((gi - go) / n);
        if (t >= crossover) ok = ok && wins >= 0.9 * n;
        detail += fmt("thr %.0f: IAA %.2f OR %.2f dB, IAA>=OR %d/%zu; ", t, gi / n, go / n, wins, spec.seeds.size());
    }
    int sign_changes = 0;
    for (std::size_t i = 1; i < gaps.size(); ++i) sign_changes += (gaps[i] > 0) != (gaps[i - 1] > 0);
    ok = ok && sign_changes <= 1;
    report(ok, "threshold_sweep",
           detail + fmt("gap sign changes %d (limit 1); crossover %.0f dB; 10 seeds x 300 s; %.1f s", sign_changes,
                        crossover, secs));
}

void invariant_suite()
{
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    Rng pick(4242);
    for (auto scheme : {Scheme::Iaa, Scheme::Or, Scheme::Pc}) {
        std::uint64_t frames = 0, violations = 0;
        std::string first;
        for (std::uint64_t run_i = 0; frames < 10000; ++run_i) {
            SimConfig c;
            c.scheme = scheme;
            c.seed = 1000 + run_i;
            c.max_frames = 1000;
            c.p_traffic = pick.uniform(0.2, 1.0);
            c.sinr_threshold_db = pick.uniform(-60.0, 30.0);
            c.n_sources = 4 + static_cast<std::uint32_t>(pick.uniform_below(13));
            InvariantChecker checker(c, false);
            run(c, &checker);
            frames += checker.frames_checked();
            violations += checker.violations().size();
            if (first.empty() && !checker.ok()) first = checker.violations().front();
        }
        ok = ok && violations == 0;
        detail += fmt("%s %llu frames %llu violations; ", to_string(scheme), static_cast<unsigned long long>(frames),
                      static_cast<unsigned long long>(violations));
        if (!first.empty()) detail += "first: " + first + "; ";
    }
    report(ok, "invariant_suite", detail + fmt("%.1f s", seconds_since(t0)));
}

void determinism()
{
    bool ok = true;
    std::string detail;
    for (auto scheme : {Scheme::Iaa, Scheme::Or, Scheme::Pc}) {
        SimConfig c;
        c.scheme = scheme;
        c.seed = 42;
        c.duration_s = 120.0;
        std::string trace[2], csv[2];
        for (int k = 0; k < 2; ++k) {
            std::ostringstream t, s;
            JsonlTraceWriter w(t);
            const auto r = run(c, &w);
            write_run_csv(s, r.records);
            trace[k] = t.str();
            csv[k] = s.str();
        }
        const bool same = trace[0] == trace[1] && csv[0] == csv[1];
        ok = ok && same && !trace[0].empty();
        detail += fmt("%s trace %zu bytes %s, csv %zu bytes %s; ", to_string(scheme), trace[0].size(),
                      trace[0] == trace[1] ? "identical" : "DIFFERENT", csv[0].size(),
                      csv[0] == csv[1] ? "identical" : "DIFFERENT");
    }
    report(ok, "determinism", detail);
}

struct AdmissionTrace : TraceSink {
    std::map<std::uint64_t, std::vector<NodeId>> fixed;
    std::map<std::uint64_t, std::uint32_t> fixed_count;
    std::map<std::uint64_t, std::set<NodeId>> delivered;
    std::map<std::uint64_t, std::set<NodeId>> via_flexible;
    std::uint64_t frame = 0;
    void on_event(const TraceEvent& e) override
    {
        if (auto* f = std::get_if<FrameStartEvent>(&e)) {
            frame = f->frame;
            fixed[frame] = f->fixed_slots;
            fixed_count[frame] = static_cast<std::uint32_t>(f->fixed_slots.size());
        } else if (auto* t = std::get_if<TxStartEvent>(&e)) {
            if (t->role == Role::Relay && t->kind == TxKind::Data && t->slot >= 0 &&
                static_cast<std::uint32_t>(t->slot) >= fixed_count[frame]) {
                via_flexible[frame].insert(t->node);
            }
        } else if (auto* d = std::get_if<DeliveryEvent>(&e)) {
            if (d->packets > 0) delivered[d->frame].insert(d->relay);
        }
    }
};

bool in(const std::vector<NodeId>& v, NodeId n) { return std::find(v.begin(), v.end(), n) != v.end(); }

void ftdma_admission()
{
    // One source with traffic for a single frame: its relay is new in frame 0
    // and silent afterwards.
    SimConfig c;
    c.n_sources = 1;
    c.traffic_frames = 1;
    c.max_frames = 8;
    c.seed = 3;
    AdmissionTrace t;
    run(c, &t);

    bool ok = false;
    std::string detail = "no relay delivered through a flexible slot";
    for (const auto& [k, relays] : t.via_flexible) {
        for (NodeId r : relays) {
            if (!t.delivered[k].count(r) || in(t.fixed[k], r)) continue;
            const bool admitted = in(t.fixed[k + 1], r);
            // Count silent frames after k until the relay drops out.
            std::uint64_t j = k + 1, silent = 0;
            bool kept_while_recent = true;
            while (t.fixed.count(j + 1)) {
                if (t.delivered[j].count(r)) {
                    silent = 0;
                } else {
                    ++silent;
                }
                const bool present = in(t.fixed[j + 1], r);
                if (silent < 3 && !present) kept_while_recent = false;
                if (silent == 3) break;
                ++j;
            }
            const bool dropped = silent == 3 && !in(t.fixed[j + 1], r);
            ok = admitted && kept_while_recent && dropped;
            detail = fmt("relay %u delivered via flexible slot in frame %llu; in fixed part of frame %llu: %s; "
                         "kept while active: %s; absent from frame %llu after %llu silent frames: %s",
                         r.value, static_cast<unsigned long long>(k), static_cast<unsigned long long>(k + 1),
                         admitted ? "yes" : "no", kept_while_recent ? "yes" : "no",
                         static_cast<unsigned long long>(j + 1), static_cast<unsigned long long>(silent),
                         dropped ? "yes" : "no");
            goto done;
        }
    }
done:
    report(ok, "ftdma_admission", detail);
}

}  // namespace

int main()
{
    policy_inequality();
    mean_interference_exactness();
    determinism();
    ftdma_admission();
    invariant_suite();
    threshold_sweep();
    scheme_ordering_and_energy();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
