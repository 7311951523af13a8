#include "wban/sweep.hpp"

#include "wban/engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <tuple>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef WBAN_GIT_DESCRIBE
#define WBAN_GIT_DESCRIBE "unknown"
#endif

namespace wban {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto at = s.find(sep);
        out.push_back(trim(s.substr(0, at)));
        if (at == std::string_view::npos) break;
        s.remove_prefix(at + 1);
    }
    return out;
}

template <typename T>
T number(std::string_view s, const std::string& key)
{
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": cannot parse '" + std::string(s) + "'");
    }
    return v;
}

/// "a,b,c" or "START..STOP[:STEP]".
template <typename T>
std::vector<T> parse_list(std::string_view text, const std::string& key, T default_step)
{
    std::vector<T> out;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        auto tail = text.substr(dots + 2);
        T step = default_step;
        if (const auto colon = tail.find(':'); colon != std::string_view::npos) {
            step = number<T>(trim(tail.substr(colon + 1)), key);
            tail = tail.substr(0, colon);
        }
        const T start = number<T>(trim(text.substr(0, dots)), key);
        const T stop = number<T>(trim(tail), key);
        if (!(step > T{0})) throw ConfigError(key + ": range step must be positive");
        if (stop < start) throw ConfigError(key + ": range is empty");
        if constexpr (std::is_floating_point_v<T>) {
            const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
            for (long i = 0; i <= n; ++i) out.push_back(start + step * static_cast<T>(i));
        } else {
            for (T v = start; v <= stop; v += step) out.push_back(v);
        }
        return out;
    }
    for (auto item : split(text, ',')) {
        if (!item.empty()) out.push_back(number<T>(item, key));
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents, std::vector<std::filesystem::path>& written)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void SweepSpec::validate() const
{
    if (schemes.empty()) throw ConfigError("schemes: must not be empty");
    if (thresholds.empty()) throw ConfigError("thresholds: must not be empty");
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    base.validate();
}

SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& spec_dir, std::string_view origin)
{
    SweepSpec spec;
    spec.out_dir = default_out_dir();
    std::vector<std::pair<std::string, std::string>> overrides;
    std::filesystem::path config_file;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (key == "schemes") {
                spec.schemes.clear();
                for (auto s : split(value, ',')) spec.schemes.push_back(parse_scheme(s));
            } else if (key == "thresholds") {
                spec.thresholds = parse_list<double>(value, key, 1.0);
            } else if (key == "seeds") {
                spec.seeds = parse_list<std::uint64_t>(value, key, 1);
            } else if (key == "out_dir") {
                spec.out_dir = std::filesystem::path(std::string(value));
            } else if (key == "config") {
                config_file = spec_dir / std::filesystem::path(std::string(value));
            } else if (key == "workers") {
                spec.workers = number<unsigned>(value, key);
            } else {
                overrides.emplace_back(key, std::string(value));
            }
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (!config_file.empty()) spec.base = load_config(config_file);
    for (const auto& [k, v] : overrides) spec.base.set(k, v);
    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep spec " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sweep_spec(ss.str(), path.parent_path(), path.string());
}

std::filesystem::path default_out_dir()
{
    if (const char* env = std::getenv("WBAN_OUT_DIR"); env && *env) return env;
    return "out";
}

std::string run_file_name(Scheme scheme, double threshold_db, std::uint64_t seed)
{
    return std::string("run_") + to_string(scheme) + "_thr" + format_double(threshold_db) + "_seed" +
           std::to_string(seed) + ".csv";
}

SweepOutput run_sweep_in_memory(const SweepSpec& spec)
{
    spec.validate();
    SweepOutput out;
    for (Scheme s : spec.schemes) {
        for (double t : spec.thresholds) {
            for (std::uint64_t seed : spec.seeds) out.runs.push_back({s, t, seed, {}});
        }
    }
    std::sort(out.runs.begin(), out.runs.end(), [](const SweepRun& a, const SweepRun& b) {
        return std::tie(a.scheme, a.threshold_db, a.seed) < std::tie(b.scheme, b.threshold_db, b.seed);
    });

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= out.runs.size()) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            auto& r = out.runs[i];
            try {
                SimConfig c = spec.base;
                c.scheme = r.scheme;
                c.sinr_threshold_db = r.threshold_db;
                c.seed = r.seed;
                r.result = run(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const unsigned n = std::min<unsigned>(spec.workers, static_cast<unsigned>(out.runs.size()));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < out.runs.size();) {
        std::size_t j = i;
        std::vector<const RunResult*> group;
        while (j < out.runs.size() && out.runs[j].scheme == out.runs[i].scheme &&
               out.runs[j].threshold_db == out.runs[i].threshold_db) {
            group.push_back(&out.runs[j].result);
            ++j;
        }
        auto rows = summarize_group(group);
        out.summary.insert(out.summary.end(), rows.begin(), rows.end());
        i = j;
    }
    return out;
}

SweepOutput run_sweep(const SweepSpec& spec)
{
    SweepOutput out = run_sweep_in_memory(spec);
    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(spec.out_dir);
        nlohmann::ordered_json manifest;
        manifest["git_describe"] = WBAN_GIT_DESCRIBE;
        manifest["schemes"] = nlohmann::json::array();
        for (Scheme s : spec.schemes) manifest["schemes"].push_back(to_string(s));
        manifest["thresholds_db"] = spec.thresholds;
        manifest["seeds"] = spec.seeds;
        manifest["workers"] = spec.workers;
        nlohmann::ordered_json config;
        for (const auto& [k, v] : spec.base.to_key_values()) config[k] = v;
        manifest["config"] = config;
        manifest["runs"] = nlohmann::json::array();
        for (const auto& r : out.runs) {
            const auto path = spec.out_dir / run_file_name(r.scheme, r.threshold_db, r.seed);
            std::ostringstream ss;
            write_run_csv(ss, r.result.records);
            write_file(path, ss.str(), written);
            manifest["runs"].push_back(nlohmann::ordered_json{{"scheme", to_string(r.scheme)},
                                                              {"threshold_db", r.threshold_db},
                                                              {"seed", r.seed},
                                                              {"file", path.filename().string()}});
        }
        std::ostringstream ss;
        write_summary_csv(ss, out.summary);
        write_file(spec.out_dir / "summary.csv", ss.str(), written);
        write_file(spec.out_dir / "manifest.json", manifest.dump(2) + "\n", written);
    } catch (const std::exception& e) {
        for (const auto& p : written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw std::runtime_error(std::string("sweep aborted: ") + e.what());
    }
    out.files = std::move(written);
    return out;
}

}  // namespace wban
