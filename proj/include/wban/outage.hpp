#pragma once

#include "wban/rng.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wban::outage {

/// Which side of the threshold counts as outage. Above is Pr(x > thr);
/// Below is the conventional Pr(x < thr).
enum class Direction : std::uint8_t { Above, Below };

Direction parse_direction(std::string_view text);
const char* to_string(Direction d);

/// Law of a single interference contribution (linear scale).
struct Distribution {
    enum class Kind : std::uint8_t { Uniform, TruncExp, TwoPoint, Det };
    Kind kind = Kind::Det;
    // Uniform: [a, b]. TruncExp: rate a on [0, b]. TwoPoint: a w.p. 1-p, b w.p. p. Det: a.
    double a = 0.0;
    double b = 0.0;
    double p = 0.0;

    static Distribution uniform(double lo, double hi);
    static Distribution truncated_exponential(double rate, double upper);
    static Distribution two_point(double low, double high, double p_high);
    static Distribution deterministic(double v);

    double sample(Rng& rng) const;
    /// Same shape with every value multiplied by k.
    Distribution scaled(double k) const;
    std::string describe() const;
};

/// "uniform:LO,HI", "texp:RATE,UPPER", "twopoint:LOW,HIGH,P" or "det:V".
Distribution parse_distribution(std::string_view text);

/// Fraction of vectors whose sum is beyond `threshold`.
double outage_empirical(std::span<const std::vector<double>> samples, double threshold,
                        Direction direction = Direction::Above);

/// sum_j d_j (1 - d_j / thr). Ratios above 1 are clamped; `clamped`, when
/// given, receives how many were. Negative entries are rejected.
double mean_interference_probabilistic(std::span<const double> deltas, double threshold,
                                       std::size_t* clamped = nullptr);

enum class PolicyAction : std::uint8_t { NoChange, DoubledCw, SwitchedChannel };
const char* to_string(PolicyAction a);

struct PolicyOutcome {
    PolicyAction action = PolicyAction::NoChange;
    /// What is left of the contribution at the tagged instant.
    double contribution = 0.0;
};

/// Sensor j doubles with probability r_j = min(d_j / thr, 1) and, having
/// doubled, switches channel with probability r_j^2. Both remove it from
/// the instant's sum.
std::vector<PolicyOutcome> policy_sample(std::span<const double> deltas, double threshold, Rng& rng);

struct Proportion {
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval.
Proportion wilson(std::uint64_t hits, std::uint64_t trials, double z);

inline constexpr double kZ99 = 2.576;

struct PolicyInequality {
    Proportion p_pr;
    Proportion p_out;
    /// p_pr <= p_out.
    bool holds = false;
    /// p_pr.hi < p_out.lo.
    bool non_overlapping = false;
    /// Both estimates are zero; the inequality holds only as an equality.
    bool degenerate = false;
};

/// Estimates, on shared draws of n - 1 contributions per trial,
///   P_out = Pr(sum d_j beyond thr) and
///   P_Pr  = Pr(sum d_j (1 - (r_j + r_j^2)) beyond thr).
PolicyInequality verify_policy_inequality(const Distribution& dist, std::uint32_t n, double threshold,
                                          std::uint64_t trials, Rng& rng, Direction direction = Direction::Above,
                                          double z = kZ99);

/// 1 if d > thr, else d / thr.
double doubling_probability(double delta, double threshold);
/// Expectation of the point form over `dist`.
double doubling_probability(const Distribution& dist, double threshold);

struct AnalyzeRow {
    double threshold = 0.0;
    PolicyInequality result;
};

void write_analyze_csv(std::ostream& out, std::span<const AnalyzeRow> rows);

}  // namespace wban::outage
