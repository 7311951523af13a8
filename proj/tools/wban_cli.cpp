#include "wban/config.hpp"
#include "wban/engine.hpp"
#include "wban/invariants.hpp"
#include "wban/metrics.hpp"
#include "wban/outage.hpp"
#include "wban/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

nlohmann::ordered_json summary_json(const wban::RunSummary& s)
{
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["scheme"] = wban::to_string(s.scheme);
    j["threshold_db"] = s.threshold_db;
    j["seed"] = s.seed;
    j["duration_s"] = s.duration_s;
    j["frames"] = s.frames;
    j["time_avg_min_sinr_db"] = opt(s.time_avg_min_sinr_db);
    j["avg_sinr_db"] = opt(s.avg_sinr_db);
    j["initial_energy_j"] = s.initial_energy_j;
    j["final_energy_residue_j"] = s.final_energy_residue_j;
    j["generated"] = s.generated;
    j["delivered"] = s.delivered;
    j["delivered_to_relays"] = s.delivered_to_relays;
    j["dropped"] = s.dropped;
    j["overflow"] = s.overflow;
    j["collisions"] = s.collisions;
    j["jams"] = s.jams;
    j["receptions"] = s.receptions;
    j["failed_receptions"] = s.failed_receptions;
    j["case1"] = s.case1;
    j["case2"] = s.case2;
    j["case3"] = s.case3;
    j["deferred"] = s.deferred;
    j["dead_nodes"] = s.dead_nodes;
    j["max_energy_error"] = s.max_energy_error;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"WBAN interference avoidance simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one simulation");
    std::string config_file;
    std::string scheme;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;
    std::optional<double> duration;
    std::string out_dir;
    std::string trace_file;
    std::vector<std::string> sets;
    bool check = false;
    sim->add_option("--config", config_file, "Config file (key = value)")->check(CLI::ExistingFile);
    sim->add_option("--scheme", scheme, "iaa, or or pc");
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--threshold", threshold, "Interference threshold in dB");
    sim->add_option("--duration", duration, "Simulated seconds");
    sim->add_option("--out", out_dir, "Output directory (default $WBAN_OUT_DIR or ./out)");
    sim->add_option("--trace", trace_file, "Write the event trace as JSON lines");
    sim->add_option("--set", sets, "Override a config field, key=value");
    sim->add_flag("--check-invariants", check, "Abort on the first protocol invariant violation");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a grid of simulations");
    std::string spec_file;
    std::string sweep_out;
    std::optional<unsigned> workers;
    sweep->add_option("--spec", spec_file, "Sweep spec file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Override out_dir");
    sweep->add_option("--workers", workers, "Parallel runs");

    // analyze outage
    auto* analyze = app.add_subcommand("analyze", "Analysis tools");
    analyze->require_subcommand(1);
    auto* outage_cmd = analyze->add_subcommand("outage", "Outage probability with and without the doubling policy");
    std::string dist_text = "uniform:0,2";
    std::uint32_t n_nodes = 12;
    std::vector<double> thresholds{1.0};
    std::uint64_t trials = 100000;
    std::uint64_t outage_seed = 1;
    std::string outage_out;
    bool relative = false;
    std::string direction = "above";
    outage_cmd->add_option("--dist", dist_text, "uniform:LO,HI | texp:RATE,UPPER | twopoint:LOW,HIGH,P | det:V")
        ->capture_default_str();
    outage_cmd->add_option("--n", n_nodes, "Sources, the tagged one included")->capture_default_str();
    outage_cmd->add_option("--thresholds", thresholds, "Thresholds (linear)")->delimiter(',')->capture_default_str();
    outage_cmd->add_option("--trials", trials, "Monte-Carlo trials per threshold")->capture_default_str();
    outage_cmd->add_option("--seed", outage_seed, "Seed")->capture_default_str();
    outage_cmd->add_option("--out", outage_out, "CSV file (default stdout)");
    outage_cmd->add_flag("--relative", relative, "Distribution values are in units of threshold/(n-1)");
    outage_cmd->add_option("--direction", direction, "above (x > thr) or below (x < thr)")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            wban::SimConfig c;
            if (!config_file.empty()) c = wban::load_config(config_file);
            if (!scheme.empty()) c.scheme = wban::parse_scheme(scheme);
            if (seed) c.seed = *seed;
            if (threshold) c.sinr_threshold_db = *threshold;
            if (duration) c.duration_s = *duration;
            if (check) c.check_invariants = true;
            for (const auto& s : sets) wban::apply_override(c, s);
            c.validate();

            const std::filesystem::path dir = out_dir.empty() ? wban::default_out_dir() : std::filesystem::path(out_dir);
            std::filesystem::create_directories(dir);
            std::optional<std::ofstream> trace_stream;
            std::optional<wban::JsonlTraceWriter> writer;
            if (!trace_file.empty()) {
                trace_stream.emplace(trace_file, std::ios::binary | std::ios::trunc);
                if (!*trace_stream) throw std::runtime_error("cannot write " + trace_file);
                writer.emplace(*trace_stream);
            }
            const auto result = wban::run(c, writer ? &*writer : nullptr);
            std::ostringstream csv;
            wban::write_run_csv(csv, result.records);
            const auto csv_path = dir / wban::run_file_name(c.scheme, c.sinr_threshold_db, c.seed);
            write_text(csv_path, csv.str());
            const auto json_path = csv_path.parent_path() / (csv_path.stem().string() + ".summary.json");
            write_text(json_path, summary_json(result.summary).dump(2) + "\n");
            std::cout << csv_path.string() << "\n" << json_path.string() << "\n";
            return 0;
        }
        if (sweep->parsed()) {
            auto spec = wban::load_sweep_spec(spec_file);
            if (!sweep_out.empty()) spec.out_dir = sweep_out;
            if (workers) spec.workers = *workers;
            const auto out = wban::run_sweep(spec);
            std::cout << out.runs.size() << " runs written to " << spec.out_dir.string() << "\n";
            return 0;
        }
        if (outage_cmd->parsed()) {
            const auto dist = wban::outage::parse_distribution(dist_text);
            const auto dir = wban::outage::parse_direction(direction);
            std::vector<wban::outage::AnalyzeRow> rows;
            wban::Rng rng(outage_seed);
            for (double thr : thresholds) {
                const auto d = relative ? dist.scaled(thr / (n_nodes - 1)) : dist;
                rows.push_back({thr, wban::outage::verify_policy_inequality(d, n_nodes, thr, trials, rng, dir)});
            }
            if (outage_out.empty()) {
                wban::outage::write_analyze_csv(std::cout, rows);
            } else {
                std::ostringstream ss;
                wban::outage::write_analyze_csv(ss, rows);
                write_text(outage_out, ss.str());
            }
            return 0;
        }
    } catch (const wban::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
