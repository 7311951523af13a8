#include "wban/outage.hpp"

#include "wban/config.hpp"
#include "wban/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wban::outage {

namespace {

double parse_number(std::string_view s, std::string_view what)
{
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError("distribution: bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

// A sum of `terms` doubles landing within rounding of the threshold counts as
// on it, not beyond: eleven copies of 1/11 must not be an outage.
bool beyond(double x, double thr, Direction d, std::size_t terms)
{
    const double slack = 4.0 * static_cast<double>(terms + 1) * std::numeric_limits<double>::epsilon() * thr;
    return d == Direction::Above ? x > thr + slack : x < thr - slack;
}

double ratio(double delta, double threshold) { return std::min(delta / threshold, 1.0); }

}  // namespace

Direction parse_direction(std::string_view text)
{
    if (text == "above") return Direction::Above;
    if (text == "below") return Direction::Below;
    throw ConfigError("direction: expected above or below, got '" + std::string(text) + "'");
}

const char* to_string(Direction d) { return d == Direction::Above ? "above" : "below"; }

const char* to_string(PolicyAction a)
{
    switch (a) {
    case PolicyAction::NoChange: return "NoChange";
    case PolicyAction::DoubledCw: return "DoubledCw";
    case PolicyAction::SwitchedChannel: return "SwitchedChannel";
    }
    return "?";
}

Distribution Distribution::uniform(double lo, double hi)
{
    if (!(lo >= 0.0) || !(hi >= lo)) throw ConfigError("distribution: uniform needs 0 <= lo <= hi");
    return {Kind::Uniform, lo, hi, 0.0};
}

Distribution Distribution::truncated_exponential(double rate, double upper)
{
    if (!(rate > 0.0) || !(upper > 0.0)) throw ConfigError("distribution: texp needs rate > 0 and upper > 0");
    return {Kind::TruncExp, rate, upper, 0.0};
}

Distribution Distribution::two_point(double low, double high, double p_high)
{
    if (!(low >= 0.0) || !(high >= 0.0) || !(p_high >= 0.0 && p_high <= 1.0)) {
        throw ConfigError("distribution: twopoint needs values >= 0 and 0 <= p <= 1");
    }
    return {Kind::TwoPoint, low, high, p_high};
}

Distribution Distribution::deterministic(double v)
{
    if (!(v >= 0.0)) throw ConfigError("distribution: det needs a value >= 0");
    return {Kind::Det, v, 0.0, 0.0};
}

double Distribution::sample(Rng& rng) const
{
    switch (kind) {
    case Kind::Uniform: return rng.uniform(a, b);
    case Kind::TruncExp: {
        const double u = rng.uniform01();
        return -std::log1p(-u * -std::expm1(-a * b)) / a;
    }
    case Kind::TwoPoint: return rng.bernoulli(p) ? b : a;
    case Kind::Det: return a;
    }
    return 0.0;
}

Distribution Distribution::scaled(double k) const
{
    switch (kind) {
    case Kind::Uniform: return uniform(a * k, b * k);
    case Kind::TruncExp: return truncated_exponential(a / k, b * k);
    case Kind::TwoPoint: return two_point(a * k, b * k, p);
    case Kind::Det: return deterministic(a * k);
    }
    return *this;
}

std::string Distribution::describe() const
{
    switch (kind) {
    case Kind::Uniform: return "uniform:" + format_double(a) + "," + format_double(b);
    case Kind::TruncExp: return "texp:" + format_double(a) + "," + format_double(b);
    case Kind::TwoPoint: return "twopoint:" + format_double(a) + "," + format_double(b) + "," + format_double(p);
    case Kind::Det: return "det:" + format_double(a);
    }
    return "?";
}

Distribution parse_distribution(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("distribution: expected NAME:ARGS, got '" + std::string(text) + "'");
    const auto name = text.substr(0, colon);
    std::vector<double> args;
    auto rest = text.substr(colon + 1);
    while (true) {
        const auto comma = rest.find(',');
        args.push_back(parse_number(rest.substr(0, comma), "argument"));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    auto need = [&](std::size_t n) {
        if (args.size() != n) {
            throw ConfigError("distribution: " + std::string(name) + " takes " + std::to_string(n) + " arguments");
        }
    };
    if (name == "uniform") {
        need(2);
        return Distribution::uniform(args[0], args[1]);
    }
    if (name == "texp") {
        need(2);
        return Distribution::truncated_exponential(args[0], args[1]);
    }
    if (name == "twopoint") {
        need(3);
        return Distribution::two_point(args[0], args[1], args[2]);
    }
    if (name == "det") {
        need(1);
        return Distribution::deterministic(args[0]);
    }
    throw ConfigError("distribution: unknown family '" + std::string(name) + "'");
}

double outage_empirical(std::span<const std::vector<double>> samples, double threshold, Direction direction)
{
    if (samples.empty()) throw std::invalid_argument("outage_empirical: no samples");
    if (!(threshold > 0.0)) throw std::invalid_argument("outage_empirical: threshold must be > 0");
    std::uint64_t hits = 0;
    for (const auto& v : samples) {
        double sum = 0.0;
        for (double d : v) sum += d;
        if (beyond(sum, threshold, direction, v.size())) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double mean_interference_probabilistic(std::span<const double> deltas, double threshold, std::size_t* clamped)
{
    if (!(threshold > 0.0)) throw std::invalid_argument("mean_interference_probabilistic: threshold must be > 0");
    std::size_t over = 0;
    double sum = 0.0;
    for (double d : deltas) {
        if (d < 0.0 || !std::isfinite(d)) {
            throw std::invalid_argument("mean_interference_probabilistic: negative or non-finite contribution");
        }
        if (d > threshold) ++over;
        sum += d * (1.0 - ratio(d, threshold));
    }
    if (clamped) *clamped = over;
    return sum;
}

std::vector<PolicyOutcome> policy_sample(std::span<const double> deltas, double threshold, Rng& rng)
{
    std::vector<PolicyOutcome> out;
    out.reserve(deltas.size());
    for (double d : deltas) {
        const double r = ratio(d, threshold);
        // Two draws per sensor whatever happens, so streams stay aligned.
        const double u1 = rng.uniform01();
        const double u2 = rng.uniform01();
        if (u1 >= r) {
            out.push_back({PolicyAction::NoChange, d});
        } else if (u2 < r * r) {
            out.push_back({PolicyAction::SwitchedChannel, 0.0});
        } else {
            out.push_back({PolicyAction::DoubledCw, 0.0});
        }
    }
    return out;
}

Proportion wilson(std::uint64_t hits, std::uint64_t trials, double z)
{
    Proportion p;
    p.hits = hits;
    p.trials = trials;
    if (trials == 0) return p;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double centre = (ph + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n));
    p.estimate = ph;
    p.lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    p.hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
    return p;
}

PolicyInequality verify_policy_inequality(const Distribution& dist, std::uint32_t n, double threshold,
                                          std::uint64_t trials, Rng& rng, Direction direction, double z)
{
    if (n < 2) throw std::invalid_argument("verify_policy_inequality: need n >= 2");
    if (trials < 10000) throw std::invalid_argument("verify_policy_inequality: need at least 10^4 trials");
    if (!(threshold > 0.0)) throw std::invalid_argument("verify_policy_inequality: threshold must be > 0");
    std::uint64_t out_hits = 0;
    std::uint64_t pr_hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        double plain = 0.0;
        double policy = 0.0;
        for (std::uint32_t j = 0; j + 1 < n; ++j) {
            const double d = dist.sample(rng);
            const double r = ratio(d, threshold);
            plain += d;
            policy += d * (1.0 - (r + r * r));
        }
        if (beyond(plain, threshold, direction, n - 1)) ++out_hits;
        if (beyond(policy, threshold, direction, n - 1)) ++pr_hits;
    }
    PolicyInequality res;
    res.p_out = wilson(out_hits, trials, z);
    res.p_pr = wilson(pr_hits, trials, z);
    res.holds = res.p_pr.estimate <= res.p_out.estimate;
    res.non_overlapping = res.p_pr.hi < res.p_out.lo;
    res.degenerate = out_hits == 0 && pr_hits == 0;
    return res;
}

double doubling_probability(double delta, double threshold)
{
    if (delta < 0.0) throw std::invalid_argument("doubling_probability: negative contribution");
    return delta > threshold ? 1.0 : delta / threshold;
}

double doubling_probability(const Distribution& dist, double threshold)
{
    const double t = threshold;
    switch (dist.kind) {
    case Distribution::Kind::Det: return doubling_probability(dist.a, t);
    case Distribution::Kind::TwoPoint:
        return (1 - dist.p) * doubling_probability(dist.a, t) + dist.p * doubling_probability(dist.b, t);
    case Distribution::Kind::Uniform: {
        const double lo = dist.a;
        const double hi = dist.b;
        if (hi == lo) return doubling_probability(lo, t);
        // Integral of x/t over [lo, min(hi, t)] plus the mass above t.
        const double c = std::clamp(t, lo, hi);
        return ((c * c - lo * lo) / (2 * t) + (hi - c)) / (hi - lo);
    }
    case Distribution::Kind::TruncExp: {
        const double rate = dist.a;
        const double upper = dist.b;
        const double norm = -std::expm1(-rate * upper);
        auto pdf = [&](double x) { return rate * std::exp(-rate * x) / norm; };
        const double c = std::min(t, upper);
        const int steps = 2000;
        const double h = c / steps;
        double acc = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double x = i * h;
            const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * (x / t) * pdf(x);
        }
        const double below = acc * h / 3.0;
        const double above = c < upper ? (std::exp(-rate * c) - std::exp(-rate * upper)) / norm : 0.0;
        return below + above;
    }
    }
    return 0.0;
}

void write_analyze_csv(std::ostream& out, std::span<const AnalyzeRow> rows)
{
    out << "threshold,p_out,p_out_lo,p_out_hi,p_pr,p_pr_lo,p_pr_hi,holds,non_overlapping,degenerate\n";
    for (const auto& r : rows) {
        const auto& x = r.result;
        out << format_double(r.threshold) << ',' << format_double(x.p_out.estimate) << ',' << format_double(x.p_out.lo)
            << ',' << format_double(x.p_out.hi) << ',' << format_double(x.p_pr.estimate) << ','
            << format_double(x.p_pr.lo) << ',' << format_double(x.p_pr.hi) << ',' << (x.holds ? 1 : 0) << ','
            << (x.non_overlapping ? 1 : 0) << ',' << (x.degenerate ? 1 : 0) << '\n';
    }
}

}  // namespace wban::outage
