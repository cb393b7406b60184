#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmcnets/nets.hpp"

namespace qmcnets {

enum class Regime { Conv, Trac };

struct TracConstants {
    double sigma_bar_inf;
    double c_vol;
    double c_bd;
    double c_help;
    double r;
    double p;  // (2r+1)/(r+1), the convergence exponent this rule certifies
};

/// Constants of the worst-case error machinery, computed fresh from the
/// weight sequence rather than hard-coded.
struct BoundConstants {
    int base = 2;
    std::size_t s = 1;
    int rho = 2;            // smallest prime factor of b
    double sigma_bar = 0;   // (b-1) sum_{j<=s} n_j
    double c_prime = 0;     // sigma_bar + 2 sqrt((b-1) s)
    double c_bar = 0;       // tail constant: sum_{w>=M} b^{-w} <= c_bar b^{-M/2}
    double c_second = 0;    // (log rho)^2 (log b) / (2 c_prime^2)
    std::optional<TracConstants> trac;

    static BoundConstants compute(std::size_t s, const WeightSequence& a, int base);
};

struct MeritReport {
    double wafom = 0;           // truncated WAFOM: sum over in-box dual of b^{-weight}
    double delta = 0;           // min(delta_in_range, delta_floor)
    double delta_in_range = 0;  // +inf when the precision box holds no nonzero dual index
    double delta_floor = 0;     // max(1, a_1 + l + 1)
    double tail_bound = 0;      // bound on the out-of-box part of the dual sum
    double wce_bound = 0;       // regime constant * b^{-delta/2}
    double log_wce_bound = 0;   // natural log of wce_bound, usable below 1e-300
    double wafom_enum_cap = 0;  // weight cap the dual sum used (inf = complete)

    std::string to_kv_block() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

/// Truncated WAFOM through the character-sum factorization
/// -1 + |P|^{-1} sum_x prod_{j,i} (1 + b^{-w_ji} (b [xi_ji = 0] - 1)).
/// Uses exact integer arithmetic when the weights are integral and the bit
/// budget allows, else compensated doubles.
double wafom_pointwise(const DigitalNet& net, const WeightSequence& a);
double wafom_pointwise_double(const DigitalNet& net, const WeightSequence& a);
std::optional<double> wafom_pointwise_exact(const DigitalNet& net, const WeightSequence& a);

struct WafomDualResult {
    double value;
    double weight_cap;  // inf when the enumeration was complete
};

/// Truncated WAFOM by direct dual-net enumeration; the verification path.
/// Falls back to an adaptive weight-capped support search when the kernel
/// walk is infeasible, dropping terms below 1e-16 of the running sum.
WafomDualResult wafom_dual_detailed(const GeneratingMatrices& g, const WeightSequence& a,
                                    std::uint64_t enum_cap = 20000000ULL);
double wafom_dual(const GeneratingMatrices& g, const WeightSequence& a,
                  std::uint64_t enum_cap = 20000000ULL);

/// T_l = prod_{j<=s} prod_{i<=l} (1 + (b-1) b^{-max(i+a_j,1)}), the total
/// weight mass of the precision box.
double truncated_weight_sum(std::size_t s, const WeightSequence& a, int base, std::size_t l);

/// Exact out-of-box mass T_inf - T_l, evaluated without cancellation.
double weight_sum_tail(std::size_t s, const WeightSequence& a, int base, std::size_t l);

/// Worst-case error bound c * b^{-delta/2} with the regime's constant.
double wce_upper_bound(double delta, std::size_t s, const WeightSequence& a, int base,
                       Regime regime);

/// b^{-sum_j (d^2/2 + (a_j + 1/2) d)}; valid for every algorithm using fewer
/// than b^{sd} points. Requires a_j >= 0.
double lower_bound_box(int d, std::size_t s, const WeightSequence& a, int base);

/// exp_b of -(log n)^2/(2s (log b)^2) - (3s/2 + sum a'_j) log n/(s log b)
/// - (s + sum a'_j), with a' = max(a, 0).
double lower_bound_n(std::uint64_t n, std::size_t s, const WeightSequence& a, int base);

/// Smallest s with 1/(2 s log b) < c; witnesses that no dimension-uniform
/// exp(-c (log n)^2) bound can hold for all s.
std::size_t no_p2_tractability_witness(double c, int base);

MeritReport evaluate_report(const GeneratingMatrices& g, const WeightSequence& a,
                            Regime regime = Regime::Conv);

struct SearchTarget {
    enum class Kind { MinWafom, MinDelta };
    Kind kind = Kind::MinWafom;
    double min_delta = 0;

    static SearchTarget min_wafom() { return {Kind::MinWafom, 0}; }
    static SearchTarget delta_at_least(double m) { return {Kind::MinDelta, m}; }
};

struct SearchResult {
    GeneratingMatrices net;
    MeritReport report;
    std::uint64_t trial = 0;
    std::uint64_t trials_run = 0;
    bool target_met = false;
};

/// Samples matrices with independent uniform entries, trial t drawn from
/// substream(seed, t). Delta targets stop at the first achieving trial;
/// min-WAFOM scans all trials. Deterministic for fixed seed regardless of
/// the worker count.
SearchResult search_net(std::size_t s, int base, std::size_t d, std::size_t l,
                        const WeightSequence& a, SearchTarget target, std::uint64_t trials,
                        std::uint64_t seed, unsigned jobs = 1);

struct RateRow {
    std::size_t s = 0;
    std::size_t d = 0;
    std::uint64_t n = 0;
    std::size_t l = 0;
    std::uint64_t seed = 0;
    double target_m = 0;     // delta level the existence argument certifies
    double delta = 0;        // best delta actually found
    double wafom = 0;
    double wce_at_delta = 0;  // bound evaluated at the found delta
    double wce_target = 0;    // theoretical bound at the certified level
    double lower_bound = 0;   // lower_bound_n(b^d)
    bool target_met = false;
};

std::vector<RateRow> convergence_rate_table(const WeightSequence& a, int base,
                                            const std::vector<std::size_t>& s_range,
                                            const std::vector<std::size_t>& d_range,
                                            std::uint64_t trials, std::uint64_t seed,
                                            Regime regime, unsigned jobs = 1);

}  // namespace qmcnets
