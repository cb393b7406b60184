#include "qmcnets/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "qmcnets/format.hpp"
#include "qmcnets/summation.hpp"

namespace qmcnets {

namespace {

constexpr double kIntegerSnapTol = 1e-9;
constexpr double kBoundaryTol = 1e-9;

bool near_integer(double v) { return std::abs(v - std::rint(v)) <= kIntegerSnapTol; }

double snap(double v) { return near_integer(v) ? std::rint(v) : v; }

}  // namespace

EmbeddingConstants EmbeddingConstants::for_base(int base) {
    if (base < 2) throw std::invalid_argument("EmbeddingConstants: base must be >= 2");
    EmbeddingConstants e;
    e.m_b = 2.0 * std::sin(std::numbers::pi / base);
    e.big_m_b = 2.0 * std::sin((base / 2) * std::numbers::pi / base);
    e.c_b = (base == 2) ? 2.0 : e.big_m_b + base * e.m_b / (base - e.big_m_b);
    return e;
}

WeightSequence WeightSequence::explicit_list(std::vector<double> a, int base) {
    if (base < 2) throw std::invalid_argument("WeightSequence: base must be >= 2");
    if (a.empty()) throw std::invalid_argument("WeightSequence: empty explicit list");
    for (std::size_t j = 1; j < a.size(); ++j)
        if (a[j] < a[j - 1] - 1e-12)
            throw std::invalid_argument("WeightSequence: explicit list must be non-decreasing");
    WeightSequence w;
    w.kind_ = Kind::ExplicitList;
    w.base_ = base;
    w.list_ = std::move(a);
    return w;
}

WeightSequence WeightSequence::power(double a, double r, double c, int base) {
    if (base < 2) throw std::invalid_argument("WeightSequence: base must be >= 2");
    if (a < 0.0) throw std::invalid_argument("WeightSequence: power rule needs a >= 0");
    if (r <= 0.0) throw std::invalid_argument("WeightSequence: power rule needs r > 0");
    WeightSequence w;
    w.kind_ = Kind::Power;
    w.base_ = base;
    w.p_a_ = a;
    w.p_r_ = r;
    w.p_c_ = c;
    return w;
}

WeightSequence WeightSequence::smooth_power(double u0, double q, int base) {
    if (base < 2) throw std::invalid_argument("WeightSequence: base must be >= 2");
    if (u0 <= 0.0) throw std::invalid_argument("WeightSequence: smooth rule needs u0 > 0");
    if (q <= 0.0 || q > 1.0)
        throw std::invalid_argument("WeightSequence: smooth rule needs q in (0, 1]");
    WeightSequence w;
    w.kind_ = Kind::SmoothPower;
    w.base_ = base;
    w.u0_ = u0;
    w.q_ = q;
    return w;
}

WeightSequence WeightSequence::smooth_list(std::vector<double> u, int base) {
    if (base < 2) throw std::invalid_argument("WeightSequence: base must be >= 2");
    if (u.empty()) throw std::invalid_argument("WeightSequence: empty smooth list");
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j] <= 0.0)
            throw std::invalid_argument("WeightSequence: smooth weights must be positive");
        if (j > 0 && u[j] > u[j - 1] + 1e-12)
            throw std::invalid_argument("WeightSequence: smooth list must be non-increasing");
    }
    WeightSequence w;
    w.kind_ = Kind::SmoothList;
    w.base_ = base;
    w.list_ = std::move(u);
    return w;
}

namespace {

std::vector<double> parse_double_list(const std::string& body, const std::string& rule) {
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("weight rule '" + rule + "': bad number '" + item + "'");
        }
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
        if (pos != item.size())
            throw std::invalid_argument("weight rule '" + rule + "': bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument("weight rule '" + rule + "': empty value list");
    return out;
}

std::vector<std::pair<std::string, double>> parse_kv_list(const std::string& body,
                                                          const std::string& rule) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("weight rule '" + rule + "': expected key=value, got '" +
                                        item + "'");
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        try {
            std::size_t pos = 0;
            double v = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("trailing chars");
            out.emplace_back(key, v);
        } catch (const std::exception&) {
            throw std::invalid_argument("weight rule '" + rule + "': bad value for '" + key + "'");
        }
    }
    return out;
}

}  // namespace

WeightSequence WeightSequence::parse(const std::string& rule, int base) {
    std::size_t colon = rule.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("weight rule '" + rule +
                                    "': expected '<kind>:<params>' (kinds: explicit, power, "
                                    "smooth-power, smooth-explicit)");
    std::string head = rule.substr(0, colon);
    std::string body = rule.substr(colon + 1);
    if (head == "explicit") return explicit_list(parse_double_list(body, rule), base);
    if (head == "smooth-explicit") return smooth_list(parse_double_list(body, rule), base);
    if (head == "power") {
        double a = 0.0, r = 1.0, c = 0.0;
        bool saw_a = false;
        for (const auto& [k, v] : parse_kv_list(body, rule)) {
            if (k == "a") {
                a = v;
                saw_a = true;
            } else if (k == "r")
                r = v;
            else if (k == "c")
                c = v;
            else
                throw std::invalid_argument("weight rule '" + rule + "': unknown key '" + k + "'");
        }
        if (!saw_a) throw std::invalid_argument("weight rule '" + rule + "': missing a=");
        return power(a, r, c, base);
    }
    if (head == "smooth-power") {
        double u0 = 0.0, q = 1.0;
        bool saw_u0 = false;
        for (const auto& [k, v] : parse_kv_list(body, rule)) {
            if (k == "u0") {
                u0 = v;
                saw_u0 = true;
            } else if (k == "q")
                q = v;
            else
                throw std::invalid_argument("weight rule '" + rule + "': unknown key '" + k + "'");
        }
        if (!saw_u0) throw std::invalid_argument("weight rule '" + rule + "': missing u0=");
        return smooth_power(u0, q, base);
    }
    throw std::invalid_argument("weight rule '" + rule + "': unknown kind '" + head + "'");
}

std::string WeightSequence::to_string() const {
    std::string out;
    switch (kind_) {
        case Kind::ExplicitList:
        case Kind::SmoothList: {
            out = (kind_ == Kind::ExplicitList) ? "explicit:" : "smooth-explicit:";
            for (std::size_t j = 0; j < list_.size(); ++j) {
                if (j) out += ',';
                out += fmt_g17(list_[j]);
            }
            return out;
        }
        case Kind::Power:
            return "power:a=" + fmt_g17(p_a_) + ",r=" + fmt_g17(p_r_) + ",c=" + fmt_g17(p_c_);
        case Kind::SmoothPower:
            return "smooth-power:u0=" + fmt_g17(u0_) + ",q=" + fmt_g17(q_);
    }
    return out;
}

double WeightSequence::a(std::size_t j) const {
    if (j == 0) throw std::invalid_argument("WeightSequence::a: j is 1-based");
    switch (kind_) {
        case Kind::ExplicitList:
            if (j > list_.size())
                throw std::invalid_argument("WeightSequence::a: explicit list has only " +
                                            std::to_string(list_.size()) + " terms");
            return list_[j - 1];
        case Kind::Power:
            return p_a_ * std::pow(static_cast<double>(j), p_r_) + p_c_;
        default:
            throw std::invalid_argument(
                "WeightSequence::a: smooth-space sequence; apply embed_smooth_to_walsh first");
    }
}

double WeightSequence::u(std::size_t j) const {
    if (j == 0) throw std::invalid_argument("WeightSequence::u: j is 1-based");
    switch (kind_) {
        case Kind::SmoothList:
            if (j > list_.size())
                throw std::invalid_argument("WeightSequence::u: smooth list has only " +
                                            std::to_string(list_.size()) + " terms");
            return list_[j - 1];
        case Kind::SmoothPower:
            return u0_ * std::pow(q_, static_cast<double>(j - 1));
        default:
            throw std::invalid_argument("WeightSequence::u: not a smooth-space sequence");
    }
}

bool WeightSequence::integral_weights(std::size_t s) const {
    if (is_smooth()) return false;
    for (std::size_t j = 1; j <= s; ++j)
        if (!near_integer(a(j))) return false;
    return true;
}

std::optional<WeightSequence::TracParams> WeightSequence::trac_params() const {
    if (kind_ != Kind::Power || p_a_ <= 0.0) return std::nullopt;
    if (p_c_ >= 0.0) return TracParams{p_a_, p_r_, 0};
    // a j^r + c >= (a/2) j^r once (a/2) j^r >= -c.
    double threshold = std::pow(-2.0 * p_c_ / p_a_, 1.0 / p_r_);
    return TracParams{p_a_ / 2.0, p_r_, static_cast<std::size_t>(std::ceil(threshold))};
}

double EmbeddedWeights::norm_factor(std::size_t s) const {
    return std::pow(per_dim_norm_factor, static_cast<double>(s));
}

EmbeddedWeights embed_smooth_to_walsh(const WeightSequence& u, EmbedVariant variant) {
    if (!u.is_smooth())
        throw std::invalid_argument("embed_smooth_to_walsh: input must be a smooth-space rule");
    const int b = u.base();
    const EmbeddingConstants ec = EmbeddingConstants::for_base(b);
    const double log_b = std::log(static_cast<double>(b));
    const double scale = (variant == EmbedVariant::Loose) ? ec.c_b / ec.m_b : 1.0 / ec.m_b;
    const double per_dim = (variant == EmbedVariant::Loose) ? 1.0 : ec.c_b;

    auto embed_one = [&](double uj) {
        if (uj <= 0.0) throw std::invalid_argument("embed_smooth_to_walsh: u_j must be positive");
        return snap(-std::log(scale * uj) / log_b);
    };

    if (u.kind() == WeightSequence::Kind::SmoothPower) {
        // u_j = u0 q^{j-1} gives an affine sequence a_j = A j + B.
        double slope = snap(-std::log(u.u(2) / u.u(1)) / log_b);
        double intercept = snap(embed_one(u.u(1)) - slope);
        if (slope < 0.0) slope = 0.0;  // q <= 1 guarantees this up to rounding
        return {WeightSequence::power(slope, 1.0, intercept, b), per_dim};
    }

    std::vector<double> a;
    a.reserve(u.explicit_size());
    for (std::size_t j = 1; j <= u.explicit_size(); ++j) {
        double v = embed_one(u.u(j));
        if (!a.empty() && v < a.back()) v = a.back();  // guard fp wiggle at ties
        a.push_back(v);
    }
    return {WeightSequence::explicit_list(std::move(a), b), per_dim};
}

int hamming_weight(std::uint64_t k, int base) {
    if (base < 2) throw std::invalid_argument("hamming_weight: base must be >= 2");
    int v = 0;
    while (k != 0) {
        if (k % static_cast<std::uint64_t>(base) != 0) ++v;
        k /= static_cast<std::uint64_t>(base);
    }
    return v;
}

double digit_cost(std::size_t i, double a_j, bool modified) {
    double c = static_cast<double>(i) + a_j;
    return modified ? std::max(c, 1.0) : c;
}

double dick_weight(const MultiIndex& k, const WeightSequence& a, bool modified) {
    double w = 0.0;
    for (std::size_t j = 0; j < k.dimension(); ++j) {
        double aj = a.a(j + 1);
        const Digits& d = k.coord(j);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d[i] != 0) w += digit_cost(i + 1, aj, modified);
    }
    return w;
}

std::size_t n_negative(double a_j) {
    double bound = std::floor(1.0 - a_j + 1e-12);
    return bound > 0.0 ? static_cast<std::size_t>(bound) : 0;
}

double sigma_bar(const WeightSequence& a, std::size_t s, int base) {
    std::size_t total = 0;
    for (std::size_t j = 1; j <= s; ++j) total += n_negative(a.a(j));
    return static_cast<double>(base - 1) * static_cast<double>(total);
}

double sigma_bar_inf(const WeightSequence& a, int base) {
    if (a.kind() != WeightSequence::Kind::Power)
        throw std::invalid_argument("sigma_bar_inf: requires a power rule (a_j -> infinity)");
    std::size_t total = 0;
    for (std::size_t j = 1;; ++j) {
        std::size_t nj = n_negative(a.a(j));
        if (nj == 0) {
            // Non-decreasing rule: later terms contribute nothing either.
            break;
        }
        total += nj;
        if (j > 10000000)
            throw std::invalid_argument("sigma_bar_inf: sequence never exceeds 0");
    }
    return static_cast<double>(base - 1) * static_cast<double>(total);
}

namespace {

// Digit positions that could appear in an index of modified weight <= M,
// sorted by cost. Enumeration over subsets of this list with budget M visits
// exactly the candidate set.
std::vector<double> weight_positions(double m_cap, std::size_t s, const WeightSequence& a,
                                     double tol) {
    std::vector<double> costs;
    for (std::size_t j = 1; j <= s; ++j) {
        double aj = a.a(j);
        for (std::size_t i = 1;; ++i) {
            double c = digit_cost(i, aj, true);
            if (c > m_cap + tol) break;  // cost is non-decreasing in i
            costs.push_back(c);
            if (costs.size() > 4000000)
                throw enumeration_cap_error("vol: position list exceeds cap");
        }
    }
    std::sort(costs.begin(), costs.end());
    return costs;
}

}  // namespace

std::uint64_t vol(double m_cap, std::size_t s, const WeightSequence& a, int base,
                  std::uint64_t cap) {
    if (!std::isfinite(m_cap)) throw std::invalid_argument("vol: M must be finite");
    if (m_cap < 0.0) return 0;
    const double tol = a.integral_weights(s) ? 0.0 : kBoundaryTol;
    if (m_cap + tol < 1.0) return 1;  // only k = 0: every nonzero index weighs >= 1

    std::vector<double> costs = weight_positions(m_cap, s, a, tol);
    const std::uint64_t mult_step = static_cast<std::uint64_t>(base - 1);
    std::uint64_t count = 0;

    std::function<void(std::size_t, double, std::uint64_t)> dfs =
        [&](std::size_t idx, double remaining, std::uint64_t mult) {
            if (mult > cap - count)
                throw enumeration_cap_error("vol: count exceeds cap; use the analytic bound");
            count += mult;
            for (std::size_t t = idx; t < costs.size(); ++t) {
                if (costs[t] > remaining + tol) break;  // sorted ascending
                dfs(t + 1, remaining - costs[t], mult * mult_step);
            }
        };
    dfs(0, m_cap, 1);
    return count;
}

double vol_bound_conv(double m_cap, std::size_t s, const WeightSequence& a, int base) {
    if (m_cap < 0.0) throw std::invalid_argument("vol_bound_conv: M must be >= 0");
    return std::exp(sigma_bar(a, s, base) +
                    2.0 * std::sqrt((base - 1) * static_cast<double>(s) * m_cap));
}

TracVolConstants trac_vol_constants(const WeightSequence& a, int base) {
    auto params = a.trac_params();
    if (!params)
        throw std::invalid_argument(
            "trac_vol_constants: sequence has no certified power-rule growth");
    TracVolConstants c;
    c.r = params->r;
    c.sigma_bar_inf = sigma_bar_inf(a, base);
    double gamma_term = std::tgamma(1.0 / params->r) / params->r *
                        std::pow(params->a, -1.0 / params->r);
    c.c_vol = (base - 1) * (static_cast<double>(params->big_a) + gamma_term) +
              c.sigma_bar_inf + 1.0;
    return c;
}

double vol_bound_trac(double m_cap, const WeightSequence& a, int base) {
    if (m_cap < 0.0) throw std::invalid_argument("vol_bound_trac: M must be >= 0");
    TracVolConstants c = trac_vol_constants(a, base);
    return std::exp(c.c_vol * std::pow(m_cap, (c.r + 1.0) / (2.0 * c.r + 1.0)));
}

std::pair<double, double> power_series_check(double x, std::size_t s,
                                             const WeightSequence& a, int base,
                                             std::size_t l, bool modified) {
    if (!(std::abs(x) < 1.0))
        throw std::invalid_argument("power_series_check: requires |X| < 1");
    if (x < 0.0 && !a.integral_weights(s))
        throw std::invalid_argument(
            "power_series_check: negative X needs integral weights (fractional powers of a "
            "negative base are undefined)");

    if (static_cast<double>(l) * std::log2(static_cast<double>(base)) > 26.0)
        throw enumeration_cap_error("power_series_check: per-coordinate box exceeds cap");
    const std::uint64_t box = saturating_pow(static_cast<std::uint64_t>(base),
                                             static_cast<unsigned>(l));
    // Per-coordinate weights of every k_j < b^l.
    std::vector<std::vector<double>> terms(s);
    for (std::size_t j = 0; j < s; ++j) {
        double aj = a.a(j + 1);
        terms[j].resize(box);
        for (std::uint64_t kj = 0; kj < box; ++kj) {
            double w = 0.0;
            std::uint64_t rest = kj;
            for (std::size_t i = 1; rest != 0; ++i) {
                if (rest % base != 0) w += digit_cost(i, aj, modified);
                rest /= base;
            }
            terms[j][kj] = (x == 0.0) ? (w == 0.0 ? 1.0 : 0.0) : std::pow(x, w);
        }
    }

    double lhs;
    double box_total_log2 = static_cast<double>(s) * std::log2(static_cast<double>(box));
    if (box_total_log2 <= 22.0) {
        // Literal sum over the whole box.
        std::vector<std::uint64_t> idx(s, 0);
        NeumaierSum acc;
        for (;;) {
            double prod = 1.0;
            for (std::size_t j = 0; j < s; ++j) prod *= terms[j][idx[j]];
            acc.add(prod);
            std::size_t j = 0;
            while (j < s && ++idx[j] == box) idx[j++] = 0;
            if (j == s) break;
        }
        lhs = acc.value();
    } else {
        // Coordinate-factorized literal sums (Dick weight is additive across
        // coordinates by definition; only the per-digit identity is under test).
        lhs = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            NeumaierSum sum;
            for (double t : terms[j]) sum.add(t);
            lhs *= sum.value();
        }
    }

    double rhs = 1.0;
    for (std::size_t j = 0; j < s; ++j) {
        double aj = a.a(j + 1);
        for (std::size_t i = 1; i <= l; ++i)
            rhs *= 1.0 + (base - 1) * std::pow(x, digit_cost(i, aj, modified));
    }
    return {lhs, rhs};
}

std::pair<double, double> gamma_sum_bound_check(double x, std::size_t s, double a, double r) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument("gamma_sum_bound_check: requires 0 < X < 1");
    if (a <= 0.0 || r <= 0.0)
        throw std::invalid_argument("gamma_sum_bound_check: requires a > 0 and r > 0");
    double sum = 0.0;
    for (std::size_t j = 1; j <= s; ++j)
        sum += std::pow(x, a * std::pow(static_cast<double>(j), r));
    double bound = std::tgamma(1.0 / r) / r * std::pow(a * std::log(1.0 / x), -1.0 / r);
    return {sum, bound};
}

double walsh_decay_bound(double f_norm, const MultiIndex& k, const WeightSequence& u) {
    if (!u.is_smooth())
        throw std::invalid_argument("walsh_decay_bound: needs a smooth-space sequence");
    const int b = k.base();
    const EmbeddingConstants ec = EmbeddingConstants::for_base(b);
    double bound = f_norm;
    for (std::size_t j = 0; j < k.dimension(); ++j) {
        const Digits& d = k.coord(j);
        int v = 0;
        double mu0 = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] != 0) {
                ++v;
                mu0 += static_cast<double>(i + 1);
            }
        }
        bound *= std::pow(static_cast<double>(b), -mu0);
        if (v > 0) bound *= std::pow(u.u(j + 1) / ec.m_b, v) * ec.c_b;
    }
    return bound;
}

double norm_equivalence_exponent(const WeightSequence& a, std::size_t s) {
    double total = 0.0;
    for (std::size_t j = 1; j <= s; ++j) {
        double aj = a.a(j);
        std::size_t n = n_negative(aj);
        for (std::size_t i = 1; i <= n; ++i) total += 1.0 - (static_cast<double>(i) + aj);
    }
    return total;
}

}  // namespace qmcnets
