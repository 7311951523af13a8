#include "wban/engine.hpp"
#include "wban/metrics.hpp"
#include "wban/sweep.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wban;
namespace fs = std::filesystem;

namespace {

TxEndEvent rx(double db, double at_s)
{
    TxEndEvent e;
    e.at = from_seconds(at_s);
    e.attempt = true;
    e.min_sinr_db = db;
    return e;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* name)
{
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("window metrics")
{
    std::vector<TraceEvent> w{rx(10, 0.1), rx(15, 0.2), rx(20, 0.3)};
    TxEndEvent not_attempt = rx(-50, 0.35);
    not_attempt.attempt = false;
    w.push_back(not_attempt);
    w.push_back(DeliveryEvent{from_seconds(0.4), 0, NodeId{1}, 3});
    const auto m = compute_window_metrics(w, 12.5, 7);
    CHECK(m.min_sinr_db == 10.0);
    CHECK(m.avg_sinr_db == 15.0);
    CHECK(m.delivered == 10);
    CHECK(m.energy_residue_j == 12.5);

    const std::vector<TraceEvent> quiet{DeliveryEvent{from_seconds(1.0), 1, NodeId{2}, 0}};
    const auto q = compute_window_metrics(quiet, 12.0, m.delivered);
    CHECK_FALSE(q.min_sinr_db);
    CHECK_FALSE(q.avg_sinr_db);
    CHECK(q.energy_residue_j <= m.energy_residue_j);
}

TEST_CASE("interval aggregation weights frame minima by duration")
{
    IntervalAggregator agg;
    WindowStats a, b, none;
    a.add(10);
    a.add(20);
    b.add(4);
    agg.add_frame(a, from_millis(30));
    agg.add_frame(b, from_millis(10));
    agg.add_frame(none, from_millis(50));
    const auto r = agg.flush(1.0, 2.0, 3, Scheme::Or, -45.0, 9);
    CHECK(*r.min_sinr_db == doctest::Approx((10 * 0.03 + 4 * 0.01) / 0.04));
    CHECK(*r.avg_sinr_db == doctest::Approx(34.0 / 3));
    const auto empty = agg.flush(2.0, 2.0, 3, Scheme::Or, -45.0, 9);
    CHECK_FALSE(empty.min_sinr_db);
}

TEST_CASE("run csv round trip")
{
    std::vector<MetricsRecord> recs;
    for (int i = 0; i < 5; ++i) {
        MetricsRecord r;
        r.time_s = 30.0 * (i + 1);
        if (i != 2) r.min_sinr_db = -3.25 + 0.1 * i;
        if (i != 2) r.avg_sinr_db = 1.0 / 3.0 + i;
        r.energy_residue_j = 3999.123456789012 - i;
        r.delivered = 100u * i;
        r.scheme = Scheme::Pc;
        r.threshold_db = -47.5;
        r.seed = 18446744073709551615ULL;
        recs.push_back(r);
    }
    std::ostringstream os;
    write_run_csv(os, recs);
    const auto text = os.str();
    CHECK(text.rfind("# wban-run-csv v1\ntime_s,min_sinr_db,avg_sinr_db,energy_residue_j,delivered,scheme,threshold_db,seed\n",
                     0) == 0);
    // Absent is empty, never zero.
    CHECK(text.find("90,,,") != std::string::npos);
    std::istringstream is(text);
    CHECK(parse_run_csv(is) == recs);

    std::istringstream bad("# wban-run-csv v2\n");
    CHECK_THROWS(parse_run_csv(bad));
    std::istringstream short_row(std::string(kRunCsvFormat) + "\ntime_s,min_sinr_db,avg_sinr_db,energy_residue_j,"
                                 "delivered,scheme,threshold_db,seed\n1,2\n");
    CHECK_THROWS(parse_run_csv(short_row));
}

TEST_CASE("summary csv round trip")
{
    std::vector<SummaryRow> rows(2);
    rows[0] = {Scheme::Iaa, -60.0, 30.0, 3, {1.5, 0.25}, {21.0, 0.1}, {3999.5, 0.01}, {1200.0, 3.0}};
    rows[1] = {Scheme::Or, -60.0, std::nullopt, 1, {std::nullopt, std::nullopt}, {2.0, 0.0}, {3900.0, 0.0}, {0.0, 0.0}};
    std::ostringstream os;
    write_summary_csv(os, rows);
    std::istringstream is(os.str());
    CHECK(parse_summary_csv(is) == rows);
}

TEST_CASE("mean and std")
{
    const std::vector<std::optional<double>> v{1.0, std::nullopt, 2.0, 6.0};
    const auto m = mean_std(v);
    CHECK(*m.mean == 3.0);
    CHECK(*m.std == doctest::Approx(std::sqrt(7.0)));
    const std::vector<std::optional<double>> none{std::nullopt};
    CHECK_FALSE(mean_std(none).mean);
}

TEST_CASE("summary means equal per-seed means")
{
    std::vector<RunResult> runs;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SimConfig c;
        c.duration_s = 6.0;
        c.record_interval_s = 2.0;
        c.seed = seed;
        runs.push_back(run(c));
    }
    std::vector<const RunResult*> ptrs;
    for (const auto& r : runs) ptrs.push_back(&r);
    const auto rows = summarize_group(ptrs);
    REQUIRE(rows.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
        long double e = 0, m = 0;
        for (const auto& r : runs) {
            e += r.records[k].energy_residue_j;
            m += *r.records[k].min_sinr_db;
        }
        CHECK(std::abs(*rows[k].energy_residue_j.mean - static_cast<double>(e / 4)) < 1e-9);
        CHECK(std::abs(*rows[k].min_sinr_db.mean - static_cast<double>(m / 4)) < 1e-9);
        CHECK(rows[k].time_s == runs[0].records[k].time_s);
    }
    long double fin = 0;
    for (const auto& r : runs) fin += r.summary.final_energy_residue_j;
    CHECK_FALSE(rows[3].time_s);
    CHECK(std::abs(*rows[3].energy_residue_j.mean - static_cast<double>(fin / 4)) < 1e-9);
}

TEST_CASE("sweep spec parsing")
{
    const auto s = parse_sweep_spec("schemes = iaa, or\nthresholds = -60..-40:5\nseeds = 1..3\nout_dir = x\n"
                                    "duration_s = 12\nworkers = 2\n");
    CHECK(s.schemes == std::vector<Scheme>{Scheme::Iaa, Scheme::Or});
    CHECK(s.thresholds == std::vector<double>{-60, -55, -50, -45, -40});
    CHECK(s.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(s.base.duration_s == 12.0);
    CHECK(s.workers == 2);
    CHECK_THROWS(parse_sweep_spec("schemes = iaa\nthresholds = 1\n"));
    CHECK_THROWS(parse_sweep_spec("schemes = mesh\nthresholds = 1\nseeds = 1\n"));
    CHECK_THROWS(parse_sweep_spec("schemes = iaa\nthresholds = 1\nseeds = 1\nbogus = 3\n"));
    CHECK(run_file_name(Scheme::Or, -45.0, 7) == "run_or_thr-45_seed7.csv");
}

TEST_CASE("sweep writes runs, summary and manifest")
{
    const auto dir = fresh_dir("wban_sweep_test");
    SweepSpec spec;
    spec.schemes = {Scheme::Iaa, Scheme::Or, Scheme::Pc};
    spec.thresholds = {20.0};
    spec.seeds = {1, 2, 3, 4, 5};
    spec.out_dir = dir;
    spec.base.duration_s = 2.0;
    spec.base.record_interval_s = 1.0;
    spec.workers = 1;
    const auto out = run_sweep(spec);
    std::size_t csv = 0, summary = 0, manifest = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name == "summary.csv") ++summary;
        else if (name == "manifest.json") ++manifest;
        else if (name.rfind("run_", 0) == 0 && e.path().extension() == ".csv") ++csv;
    }
    CHECK(csv == 15);
    CHECK(summary == 1);
    CHECK(manifest == 1);

    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j.contains("git_describe"));
    CHECK(j["seeds"].size() == 5);
    CHECK(j["runs"].size() == 15);
    CHECK(j.contains("config"));

    std::ifstream sin(dir / "summary.csv");
    const auto rows = parse_summary_csv(sin);
    CHECK(rows.size() == 3 * 3);  // two record rows and one whole-run row per group
    for (const auto& r : rows) CHECK(r.n_seeds == 5);

    std::vector<std::string> first;
    for (const auto& f : out.files) first.push_back(slurp(f));
    spec.workers = 3;
    const auto again = run_sweep(spec);
    REQUIRE(again.files.size() == out.files.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (again.files[i].extension() == ".csv") CHECK(slurp(again.files[i]) == first[i]);
    }

    std::ifstream rin(dir / run_file_name(Scheme::Pc, 20.0, 3));
    const auto recs = parse_run_csv(rin);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].scheme == Scheme::Pc);
    CHECK(recs[0].seed == 3);
    fs::remove_all(dir);
}

TEST_CASE("sweep failure leaves nothing behind")
{
    const auto dir = fresh_dir("wban_sweep_fail");
    SweepSpec spec;
    spec.schemes = {Scheme::Iaa};
    spec.thresholds = {20.0};
    spec.seeds = {1};
    spec.out_dir = dir;
    spec.base.duration_s = -1.0;
    CHECK_THROWS(run_sweep(spec));
    CHECK((!fs::exists(dir) || fs::is_empty(dir)));
    fs::remove_all(dir);
}

TEST_CASE("default output directory")
{
    ::unsetenv("WBAN_OUT_DIR");
    CHECK(default_out_dir() == fs::path("out"));
    ::setenv("WBAN_OUT_DIR", "/tmp/elsewhere", 1);
    CHECK(default_out_dir() == fs::path("/tmp/elsewhere"));
    ::unsetenv("WBAN_OUT_DIR");
}
