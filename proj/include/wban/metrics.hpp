#pragma once

#include "wban/config.hpp"
#include "wban/energy.hpp"
#include "wban/trace.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wban {

struct MetricsRecord {
    double time_s = 0.0;
    std::optional<double> min_sinr_db;
    std::optional<double> avg_sinr_db;
    double energy_residue_j = 0.0;
    std::uint64_t delivered = 0;
    Scheme scheme = Scheme::Iaa;
    double threshold_db = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const MetricsRecord&) const = default;
};

/// Reception statistics of one window.
struct WindowStats {
    std::optional<double> min_sinr_db;
    double sum_sinr_db = 0.0;
    std::uint64_t receptions = 0;

    void add(double sinr_db);
    std::optional<double> avg_sinr_db() const;
};

/// Metrics of one window from its trace events: SINR statistics over every
/// reception attempt at an intended receiver, deliveries at the coordinator
/// added to `delivered_before`, energy as sampled at the window end.
MetricsRecord compute_window_metrics(std::span<const TraceEvent> window, double energy_residue_j,
                                     std::uint64_t delivered_before = 0);

/// Folds per-frame windows into output rows. The row minimum is the
/// duration-weighted mean of the per-frame minima; the row average is the
/// mean over all receptions in the row.
class IntervalAggregator {
public:
    void add_frame(const WindowStats& frame, Time duration);
    /// Emits the row for everything added since the last call.
    MetricsRecord flush(double time_s, double energy_residue_j, std::uint64_t delivered, Scheme scheme,
                        double threshold_db, std::uint64_t seed);

private:
    double weighted_min_ = 0.0;
    double weight_s_ = 0.0;
    double sum_db_ = 0.0;
    std::uint64_t receptions_ = 0;
};

/// Whole-run figures.
struct RunSummary {
    Scheme scheme = Scheme::Iaa;
    double threshold_db = 0.0;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::uint64_t frames = 0;
    /// Duration-weighted mean of per-frame minimum SINR.
    std::optional<double> time_avg_min_sinr_db;
    /// Mean SINR over every reception in the run.
    std::optional<double> avg_sinr_db;
    double initial_energy_j = 0.0;
    double final_energy_residue_j = 0.0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t delivered_to_relays = 0;
    std::uint64_t dropped = 0;
    std::uint64_t overflow = 0;
    std::uint64_t collisions = 0;
    std::uint64_t jams = 0;
    std::uint64_t receptions = 0;
    std::uint64_t failed_receptions = 0;
    std::uint64_t case1 = 0;
    std::uint64_t case2 = 0;
    std::uint64_t case3 = 0;
    std::uint64_t deferred = 0;
    std::uint64_t dead_nodes = 0;
    /// Largest relative ledger error seen at any frame end.
    double max_energy_error = 0.0;
};

struct RunResult {
    std::vector<MetricsRecord> records;
    RunSummary summary;
    EnergyLedger ledger;
};

inline constexpr const char* kRunCsvFormat = "# wban-run-csv v1";
inline constexpr const char* kSummaryCsvFormat = "# wban-summary-csv v1";

void write_run_csv(std::ostream& out, std::span<const MetricsRecord> records);
std::vector<MetricsRecord> parse_run_csv(std::istream& in);

struct MeanStd {
    std::optional<double> mean;
    std::optional<double> std;

    bool operator==(const MeanStd&) const = default;
};

/// Mean and sample standard deviation over the present values. Absent
/// inputs are skipped; no values gives absent outputs.
MeanStd mean_std(std::span<const std::optional<double>> values);

struct SummaryRow {
    Scheme scheme = Scheme::Iaa;
    double threshold_db = 0.0;
    /// Absent for the whole-run row.
    std::optional<double> time_s;
    std::uint64_t n_seeds = 0;
    MeanStd min_sinr_db;
    MeanStd avg_sinr_db;
    MeanStd energy_residue_j;
    MeanStd delivered;

    bool operator==(const SummaryRow&) const = default;
};

/// Summary rows for one (scheme, threshold) group of runs: one row per record
/// time, then the whole-run row.
std::vector<SummaryRow> summarize_group(std::span<const RunResult* const> runs);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
std::vector<SummaryRow> parse_summary_csv(std::istream& in);

}  // namespace wban
