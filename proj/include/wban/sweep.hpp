#pragma once

#include "wban/config.hpp"
#include "wban/metrics.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wban {

/// Grid of runs. Every (scheme, threshold, seed) combination runs `base`
/// with those three fields replaced.
struct SweepSpec {
    std::vector<Scheme> schemes;
    std::vector<double> thresholds;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path out_dir;
    SimConfig base;
    unsigned workers = 1;

    void validate() const;
};

/// Reads `key = value` lines. Known keys: schemes (iaa,or,pc), thresholds
/// and seeds (comma lists or START..STOP[:STEP]), out_dir, config (a base
/// config file, relative to the spec), workers. Anything else is a config
/// override applied on top of the base config.
SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& spec_dir = {},
                           std::string_view origin = "<spec>");
SweepSpec load_sweep_spec(const std::filesystem::path& path);

/// WBAN_OUT_DIR if set, else "out".
std::filesystem::path default_out_dir();

std::string run_file_name(Scheme scheme, double threshold_db, std::uint64_t seed);

struct SweepRun {
    Scheme scheme = Scheme::Iaa;
    double threshold_db = 0.0;
    std::uint64_t seed = 0;
    RunResult result;
};

struct SweepOutput {
    /// Sorted by (scheme, threshold, seed).
    std::vector<SweepRun> runs;
    std::vector<SummaryRow> summary;
    std::vector<std::filesystem::path> files;
};

/// Runs the grid without touching the disk.
SweepOutput run_sweep_in_memory(const SweepSpec& spec);

/// Runs the grid and writes one CSV per run, summary.csv and manifest.json
/// into spec.out_dir. On failure, files written so far are removed.
SweepOutput run_sweep(const SweepSpec& spec);

}  // namespace wban
