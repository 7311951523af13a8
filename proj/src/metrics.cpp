#include "wban/metrics.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string_view>

namespace wban {

void WindowStats::add(double sinr_db)
{
    min_sinr_db = min_sinr_db ? std::min(*min_sinr_db, sinr_db) : sinr_db;
    sum_sinr_db += sinr_db;
    ++receptions;
}

std::optional<double> WindowStats::avg_sinr_db() const
{
    if (receptions == 0) return std::nullopt;
    return sum_sinr_db / static_cast<double>(receptions);
}

MetricsRecord compute_window_metrics(std::span<const TraceEvent> window, double energy_residue_j,
                                     std::uint64_t delivered_before)
{
    WindowStats stats;
    MetricsRecord r;
    r.delivered = delivered_before;
    for (const auto& e : window) {
        if (const auto* end = std::get_if<TxEndEvent>(&e); end && end->attempt) {
            stats.add(end->min_sinr_db);
        } else if (const auto* d = std::get_if<DeliveryEvent>(&e)) {
            r.delivered += d->packets;
        }
        r.time_s = std::max(r.time_s, to_seconds(event_time(e)));
    }
    r.min_sinr_db = stats.min_sinr_db;
    r.avg_sinr_db = stats.avg_sinr_db();
    r.energy_residue_j = energy_residue_j;
    return r;
}

void IntervalAggregator::add_frame(const WindowStats& frame, Time duration)
{
    if (frame.min_sinr_db) {
        const double w = to_seconds(duration);
        weighted_min_ += *frame.min_sinr_db * w;
        weight_s_ += w;
    }
    sum_db_ += frame.sum_sinr_db;
    receptions_ += frame.receptions;
}

MetricsRecord IntervalAggregator::flush(double time_s, double energy_residue_j, std::uint64_t delivered,
                                        Scheme scheme, double threshold_db, std::uint64_t seed)
{
    MetricsRecord r;
    r.time_s = time_s;
    if (weight_s_ > 0.0) r.min_sinr_db = weighted_min_ / weight_s_;
    if (receptions_ > 0) r.avg_sinr_db = sum_db_ / static_cast<double>(receptions_);
    r.energy_residue_j = energy_residue_j;
    r.delivered = delivered;
    r.scheme = scheme;
    r.threshold_db = threshold_db;
    r.seed = seed;
    *this = IntervalAggregator{};
    return r;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(std::string_view s, const char* column)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string("csv: bad number in column ") + column + ": '" + std::string(s) + "'");
    }
    return v;
}

std::optional<double> parse_opt(std::string_view s, const char* column)
{
    if (s.empty()) return std::nullopt;
    return parse_double(s, column);
}

std::uint64_t parse_u64(std::string_view s, const char* column)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string("csv: bad integer in column ") + column + ": '" + std::string(s) + "'");
    }
    return v;
}

void expect_header(std::istream& in, const char* format, std::string_view columns)
{
    std::string line;
    if (!std::getline(in, line) || line != format) {
        throw std::runtime_error(std::string("csv: expected format line '") + format + "'");
    }
    if (!std::getline(in, line) || line != columns) {
        throw std::runtime_error("csv: unexpected column header '" + line + "'");
    }
}

constexpr std::string_view kRunColumns =
    "time_s,min_sinr_db,avg_sinr_db,energy_residue_j,delivered,scheme,threshold_db,seed";
constexpr std::string_view kSummaryColumns =
    "scheme,threshold_db,time_s,n_seeds,min_sinr_db_mean,min_sinr_db_std,avg_sinr_db_mean,avg_sinr_db_std,"
    "energy_residue_j_mean,energy_residue_j_std,delivered_mean,delivered_std";

}  // namespace

void write_run_csv(std::ostream& out, std::span<const MetricsRecord> records)
{
    out << kRunCsvFormat << '\n' << kRunColumns << '\n';
    for (const auto& r : records) {
        out << format_double(r.time_s) << ',' << opt(r.min_sinr_db) << ',' << opt(r.avg_sinr_db) << ','
            << format_double(r.energy_residue_j) << ',' << r.delivered << ',' << to_string(r.scheme) << ','
            << format_double(r.threshold_db) << ',' << r.seed << '\n';
    }
}

std::vector<MetricsRecord> parse_run_csv(std::istream& in)
{
    expect_header(in, kRunCsvFormat, kRunColumns);
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 8) throw std::runtime_error("csv: expected 8 fields, got " + std::to_string(f.size()));
        MetricsRecord r;
        r.time_s = parse_double(f[0], "time_s");
        r.min_sinr_db = parse_opt(f[1], "min_sinr_db");
        r.avg_sinr_db = parse_opt(f[2], "avg_sinr_db");
        r.energy_residue_j = parse_double(f[3], "energy_residue_j");
        r.delivered = parse_u64(f[4], "delivered");
        r.scheme = parse_scheme(f[5]);
        r.threshold_db = parse_double(f[6], "threshold_db");
        r.seed = parse_u64(f[7], "seed");
        out.push_back(r);
    }
    return out;
}

MeanStd mean_std(std::span<const std::optional<double>> values)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return {};
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& v : values) {
        if (v) ss += (*v - mean) * (*v - mean);
    }
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return {mean, sd};
}

std::vector<SummaryRow> summarize_group(std::span<const RunResult* const> runs)
{
    std::vector<SummaryRow> rows;
    if (runs.empty()) return rows;
    const Scheme scheme = runs.front()->summary.scheme;
    const double thr = runs.front()->summary.threshold_db;

    // Rows keyed by record time; every run of a group shares the cadence.
    std::map<double, std::vector<const MetricsRecord*>> by_time;
    for (const auto* run : runs) {
        for (const auto& rec : run->records) by_time[rec.time_s].push_back(&rec);
    }
    auto fill = [](SummaryRow& row, const std::vector<std::optional<double>>& a, const std::vector<std::optional<double>>& b,
                   const std::vector<std::optional<double>>& c, const std::vector<std::optional<double>>& d) {
        row.min_sinr_db = mean_std(a);
        row.avg_sinr_db = mean_std(b);
        row.energy_residue_j = mean_std(c);
        row.delivered = mean_std(d);
    };
    for (const auto& [t, recs] : by_time) {
        std::vector<std::optional<double>> a, b, c, d;
        for (const auto* r : recs) {
            a.push_back(r->min_sinr_db);
            b.push_back(r->avg_sinr_db);
            c.push_back(r->energy_residue_j);
            d.push_back(static_cast<double>(r->delivered));
        }
        SummaryRow row{scheme, thr, t, recs.size(), {}, {}, {}, {}};
        fill(row, a, b, c, d);
        rows.push_back(row);
    }
    std::vector<std::optional<double>> a, b, c, d;
    for (const auto* run : runs) {
        a.push_back(run->summary.time_avg_min_sinr_db);
        b.push_back(run->summary.avg_sinr_db);
        c.push_back(run->summary.final_energy_residue_j);
        d.push_back(static_cast<double>(run->summary.delivered));
    }
    SummaryRow total{scheme, thr, std::nullopt, runs.size(), {}, {}, {}, {}};
    fill(total, a, b, c, d);
    rows.push_back(total);
    return rows;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows)
{
    out << kSummaryCsvFormat << '\n' << kSummaryColumns << '\n';
    for (const auto& r : rows) {
        out << to_string(r.scheme) << ',' << format_double(r.threshold_db) << ',' << opt(r.time_s) << ','
            << r.n_seeds;
        for (const MeanStd* m : {&r.min_sinr_db, &r.avg_sinr_db, &r.energy_residue_j, &r.delivered}) {
            out << ',' << opt(m->mean) << ',' << opt(m->std);
        }
        out << '\n';
    }
}

std::vector<SummaryRow> parse_summary_csv(std::istream& in)
{
    expect_header(in, kSummaryCsvFormat, kSummaryColumns);
    std::vector<SummaryRow> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 12) throw std::runtime_error("csv: expected 12 fields, got " + std::to_string(f.size()));
        SummaryRow r;
        r.scheme = parse_scheme(f[0]);
        r.threshold_db = parse_double(f[1], "threshold_db");
        r.time_s = parse_opt(f[2], "time_s");
        r.n_seeds = parse_u64(f[3], "n_seeds");
        r.min_sinr_db = {parse_opt(f[4], "min_sinr_db_mean"), parse_opt(f[5], "min_sinr_db_std")};
        r.avg_sinr_db = {parse_opt(f[6], "avg_sinr_db_mean"), parse_opt(f[7], "avg_sinr_db_std")};
        r.energy_residue_j = {parse_opt(f[8], "energy_residue_j_mean"), parse_opt(f[9], "energy_residue_j_std")};
        r.delivered = {parse_opt(f[10], "delivered_mean"), parse_opt(f[11], "delivered_std")};
        out.push_back(r);
    }
    return out;
}

}  // namespace wban
