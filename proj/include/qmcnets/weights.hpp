#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmcnets/basefield.hpp"

namespace qmcnets {

/// m_b = 2 sin(pi/b), M_b = 2 sin(floor(b/2) pi/b), and the coefficient-decay
/// constant C_b (2 for b = 2, else M_b + b m_b / (b - M_b)).
struct EmbeddingConstants {
    double m_b;
    double big_m_b;
    double c_b;

    static EmbeddingConstants for_base(int base);
};

/// Coordinate weight sequence. Walsh-space sequences are non-decreasing
/// (a_1 <= a_2 <= ...); smooth-space sequences are positive non-increasing
/// (u_1 >= u_2 >= ... > 0). Closed-form rules keep tractability questions
/// decidable; explicit lists are an escape hatch with finitely many terms.
class WeightSequence {
public:
    enum class Kind { ExplicitList, Power, SmoothPower, SmoothList };

    static WeightSequence explicit_list(std::vector<double> a, int base);
    static WeightSequence power(double a, double r, double c, int base);
    static WeightSequence smooth_power(double u0, double q, int base);
    static WeightSequence smooth_list(std::vector<double> u, int base);

    /// Grammar: "explicit:0,0.5,1" | "power:a=1,r=1,c=0" |
    /// "smooth-power:u0=0.5,q=0.5" | "smooth-explicit:0.5,0.25".
    static WeightSequence parse(const std::string& rule, int base);
    std::string to_string() const;

    Kind kind() const { return kind_; }
    int base() const { return base_; }
    bool is_smooth() const { return kind_ == Kind::SmoothPower || kind_ == Kind::SmoothList; }

    /// Walsh-space weight a_j, 1-based. Throws for smooth sequences and for
    /// explicit lists shorter than j.
    double a(std::size_t j) const;
    /// Smooth-space weight u_j, 1-based.
    double u(std::size_t j) const;

    /// Number of terms of an explicit list; 0 for closed-form rules.
    std::size_t explicit_size() const { return list_.size(); }

    /// True when a_1..a_s are all integers (within 1e-9 snap); enables the
    /// exact arithmetic paths.
    bool integral_weights(std::size_t s) const;

    struct TracParams {
        double a;
        double r;
        std::size_t big_a;  // a_j >= a j^r for all j > big_a
    };
    /// Parameters witnessing liminf a_j / j^r > 0. Only decidable for
    /// closed-form rules; explicit lists report nullopt ("unknown").
    std::optional<TracParams> trac_params() const;

    bool operator==(const WeightSequence&) const = default;

private:
    WeightSequence() = default;

    Kind kind_ = Kind::ExplicitList;
    int base_ = 2;
    std::vector<double> list_;               // explicit / smooth-explicit terms
    double p_a_ = 0.0, p_r_ = 1.0, p_c_ = 0.0;  // power rule a * j^r + c
    double u0_ = 1.0, q_ = 1.0;                 // smooth power u0 * q^{j-1}
};

enum class EmbedVariant { Loose, Tight };

struct EmbeddedWeights {
    WeightSequence a;
    double per_dim_norm_factor;  // 1 for loose, C_b for tight

    double norm_factor(std::size_t s) const;
};

/// Walsh-space weights induced by a smooth-space sequence:
/// loose  a'_j  = -log_b(C_b m_b^{-1} u_j), norm factor 1;
/// tight  a''_j = -log_b(m_b^{-1} u_j),     norm factor C_b per coordinate.
/// Values within 1e-9 of an integer are snapped so downstream exact paths
/// recognize integral weights.
EmbeddedWeights embed_smooth_to_walsh(const WeightSequence& u, EmbedVariant variant);

/// Number of nonzero base-b digits of k.
int hamming_weight(std::uint64_t k, int base);

/// Cost of a nonzero digit at position i (1-based) in coordinate weight a_j:
/// i + a_j, clamped below by 1 in the modified variant.
double digit_cost(std::size_t i, double a_j, bool modified);

/// Generalized (modified = false) or modified (true) Dick weight of k.
double dick_weight(const MultiIndex& k, const WeightSequence& a, bool modified);

/// n_j = |{i >= 1 : i + a_j <= 1}|.
std::size_t n_negative(double a_j);

/// Sigma-bar = (b-1) sum_{j<=s} n_j.
double sigma_bar(const WeightSequence& a, std::size_t s, int base);

/// Sigma-bar over all j >= 1; finite for rules with a_j -> infinity.
double sigma_bar_inf(const WeightSequence& a, int base);

/// Exact |{k : modified Dick weight <= M}| by pruned depth-first enumeration.
/// Throws enumeration_cap_error when the count would exceed cap.
std::uint64_t vol(double m_cap, std::size_t s, const WeightSequence& a, int base,
                  std::uint64_t cap = 100000000ULL);

/// exp(Sigma-bar + 2 sqrt((b-1) s M)).
double vol_bound_conv(double m_cap, std::size_t s, const WeightSequence& a, int base);

struct TracVolConstants {
    double sigma_bar_inf;
    double c_vol;  // (b-1)(A + Gamma(1/r) / (r a^{1/r})) + Sigma-bar-inf + 1
    double r;
};
TracVolConstants trac_vol_constants(const WeightSequence& a, int base);

/// exp(C_vol M^{(r+1)/(2r+1)}); requires a power-rule sequence.
double vol_bound_trac(double m_cap, const WeightSequence& a, int base);

/// Left: sum over all k with k_j < b^l of X^{mu_a(k)} (literal enumeration,
/// factorized over coordinates when the full box is too large to walk).
/// Right: prod_j prod_{i<=l} (1 + (b-1) X^{cost(i, a_j)}).
/// Negative X requires integral weights (fractional powers of a negative
/// base are undefined).
std::pair<double, double> power_series_check(double x, std::size_t s,
                                             const WeightSequence& a, int base,
                                             std::size_t l, bool modified);

/// Left: sum_{j<=s} X^{a j^r}. Right: Gamma(1/r) (a log(1/X))^{-1/r} / r.
std::pair<double, double> gamma_sum_bound_check(double x, std::size_t s, double a,
                                                double r);

/// Walsh-coefficient decay bound for f in the smooth space:
/// |f-hat(k)| <= norm * b^{-mu_0(k)} prod_j (m_b^{-1} u_j)^{v(k_j)} C_b^{min(1, v(k_j))}.
double walsh_decay_bound(double f_norm, const MultiIndex& k, const WeightSequence& u);

/// Norm-equivalence exponent sum_j sum_{i in N_j} (1 - (i + a_j)); the factor
/// b^{this} converts a W-space norm bound into a modified-space one.
double norm_equivalence_exponent(const WeightSequence& a, std::size_t s);

}  // namespace qmcnets
