#include "qmcnets/merit.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "qmcnets/format.hpp"
#include "qmcnets/parallel.hpp"
#include "qmcnets/summation.hpp"

namespace qmcnets {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ln(double x) { return std::log(x); }

struct CostTable {
    std::vector<double> w;  // flat (j * l + i), modified digit costs
    std::size_t s, l;

    CostTable(std::size_t s_, std::size_t l_, const WeightSequence& a) : s(s_), l(l_) {
        w.resize(s * l);
        for (std::size_t j = 0; j < s; ++j) {
            double aj = a.a(j + 1);
            for (std::size_t i = 0; i < l; ++i) w[j * l + i] = digit_cost(i + 1, aj, true);
        }
    }
};

}  // namespace

BoundConstants BoundConstants::compute(std::size_t s, const WeightSequence& a, int base) {
    if (s < 1) throw std::invalid_argument("BoundConstants: s must be >= 1");
    BoundConstants c;
    c.base = base;
    c.s = s;
    c.rho = smallest_prime_factor(base);
    c.sigma_bar = qmcnets::sigma_bar(a, s, base);
    const double ln_b = ln(static_cast<double>(base));
    c.c_prime = c.sigma_bar + 2.0 * std::sqrt(static_cast<double>((base - 1)) * s);
    c.c_bar = std::exp(c.sigma_bar + ln_b / 2.0 + 2.0 * (base - 1) * s / ln_b) /
              (1.0 - std::exp(-ln_b / 2.0));
    double ln_rho = ln(static_cast<double>(c.rho));
    c.c_second = ln_rho * ln_rho * ln_b / (2.0 * c.c_prime * c.c_prime);
    if (a.trac_params()) {
        TracVolConstants tv = trac_vol_constants(a, base);
        TracConstants t;
        t.sigma_bar_inf = tv.sigma_bar_inf;
        t.c_vol = tv.c_vol;
        t.r = tv.r;
        t.p = (2.0 * t.r + 1.0) / (t.r + 1.0);
        t.c_bd = std::exp(ln_b / 2.0 +
                          t.c_vol * t.r / (2.0 * t.r + 1.0) *
                              std::pow(2.0 * t.c_vol * (t.r + 1.0) / ((2.0 * t.r + 1.0) * ln_b),
                                       (t.r + 1.0) / t.r)) /
                 (1.0 - std::exp(-ln_b / 2.0));
        t.c_help = std::pow(ln_rho / t.c_vol, (2.0 * t.r + 1.0) / (t.r + 1.0));
        c.trac = t;
    }
    return c;
}

double wafom_pointwise_double(const DigitalNet& net, const WeightSequence& a) {
    const GeneratingMatrices& g = net.generators();
    const int b = g.base();
    const std::size_t s = g.dimension();
    const std::size_t l = g.precision();
    CostTable costs(s, l, a);

    std::vector<double> e_zero(s * l), e_nonzero(s * l);
    for (std::size_t p = 0; p < s * l; ++p) {
        double bmw = std::pow(static_cast<double>(b), -costs.w[p]);
        e_zero[p] = (b - 1) * bmw;
        e_nonzero[p] = -bmw;
    }

    // Compensated mean of per-point (product - 1) values; the per-point
    // recurrence keeps each term's absolute error near machine eps.
    NeumaierSum acc;
    for (std::size_t k = 0; k < net.size(); ++k) {
        const PointDigits& x = net.point(k);
        double pm1 = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            const Digits& xd = x.coord(j);
            for (std::size_t i = 0; i < l; ++i) {
                double e = (xd[i] == 0) ? e_zero[j * l + i] : e_nonzero[j * l + i];
                pm1 = pm1 + e + pm1 * e;
            }
        }
        acc.add(pm1);
    }
    return acc.value() / static_cast<double>(net.size());
}

namespace {

using u128 = unsigned __int128;

double log2_factor_budget(const CostTable& costs, int b) {
    double bits = 0.0;
    for (double w : costs.w)
        bits += w * std::log2(static_cast<double>(b)) +
                std::log2(1.0 + (b - 1) * std::pow(static_cast<double>(b), -w));
    return bits;
}

u128 u128_pow(int b, std::uint64_t e) {
    u128 r = 1;
    for (std::uint64_t i = 0; i < e; ++i) r *= static_cast<unsigned>(b);
    return r;
}

}  // namespace

std::optional<double> wafom_pointwise_exact(const DigitalNet& net, const WeightSequence& a) {
    const GeneratingMatrices& g = net.generators();
    const int b = g.base();
    const std::size_t s = g.dimension();
    const std::size_t l = g.precision();
    if (!a.integral_weights(s)) return std::nullopt;

    CostTable costs(s, l, a);
    double bits = log2_factor_budget(costs, b) +
                  std::log2(static_cast<double>(net.size()));
    if (bits > 120.0) return std::nullopt;

    std::uint64_t w_total = 0;
    std::vector<u128> f_zero(s * l), f_nonzero(s * l);
    for (std::size_t p = 0; p < s * l; ++p) {
        std::uint64_t w = static_cast<std::uint64_t>(std::llrint(costs.w[p]));
        w_total += w;
        u128 bw = u128_pow(b, w);
        f_zero[p] = bw + static_cast<unsigned>(b - 1);
        f_nonzero[p] = bw - 1;
    }

    u128 sum = 0;
    for (std::size_t k = 0; k < net.size(); ++k) {
        const PointDigits& x = net.point(k);
        u128 prod = 1;
        for (std::size_t j = 0; j < s; ++j) {
            const Digits& xd = x.coord(j);
            for (std::size_t i = 0; i < l; ++i)
                prod *= (xd[i] == 0) ? f_zero[j * l + i] : f_nonzero[j * l + i];
        }
        sum += prod;
    }
    u128 den = u128_pow(b, w_total) * static_cast<u128>(net.size());
    u128 diff = sum - den;  // truncated WAFOM is non-negative, so sum >= den
    return static_cast<double>(diff) / static_cast<double>(den);
}

double wafom_pointwise(const DigitalNet& net, const WeightSequence& a) {
    if (auto exact = wafom_pointwise_exact(net, a)) return *exact;
    return wafom_pointwise_double(net, a);
}

namespace {

// Exact dual-side sum over a complete kernel walk, integral weights only.
std::optional<double> wafom_dual_exact_kernel(const GeneratingMatrices& g,
                                              const WeightSequence& a,
                                              std::uint64_t enum_cap) {
    const int b = g.base();
    const std::size_t s = g.dimension();
    const std::size_t l = g.precision();
    if (!a.integral_weights(s)) return std::nullopt;
    CostTable costs(s, l, a);
    std::uint64_t w_total = 0;
    for (double w : costs.w) w_total += static_cast<std::uint64_t>(std::llrint(w));

    DualNetView view(g);
    double count_log2 =
        static_cast<double>(view.kernel_dimension()) * std::log2(static_cast<double>(b));
    if (w_total * std::log2(static_cast<double>(b)) + count_log2 > 120.0) return std::nullopt;

    std::vector<u128> pow_table(w_total + 1);
    pow_table[0] = 1;
    for (std::uint64_t e = 1; e <= w_total; ++e) pow_table[e] = pow_table[e - 1] * static_cast<unsigned>(b);

    u128 sum = 0;
    view.for_each(
        [&](const MultiIndex& k) {
            if (k.is_zero()) return;
            std::uint64_t w = 0;
            for (std::size_t j = 0; j < s; ++j) {
                const Digits& kd = k.coord(j);
                for (std::size_t i = 0; i < l; ++i)
                    if (kd[i] != 0) w += static_cast<std::uint64_t>(std::llrint(costs.w[j * l + i]));
            }
            sum += pow_table[w_total - w];
        },
        enum_cap);
    return static_cast<double>(sum) / static_cast<double>(pow_table[w_total]);
}

}  // namespace

WafomDualResult wafom_dual_detailed(const GeneratingMatrices& g, const WeightSequence& a,
                                    std::uint64_t enum_cap) {
    const int b = g.base();
    const std::size_t s = g.dimension();

    bool kernel_feasible = false;
    if (is_prime(b)) {
        double kdim = static_cast<double>(s * g.precision()) - static_cast<double>(g.log_size());
        kernel_feasible =
            kdim * std::log2(static_cast<double>(b)) <= std::log2(static_cast<double>(enum_cap));
    }

    if (kernel_feasible) {
        try {
            if (auto exact = wafom_dual_exact_kernel(g, a, enum_cap))
                return {*exact, kInf};
            NeumaierSum acc;
            enumerate_dual(
                g, kInf, a,
                [&](const MultiIndex&, double w) {
                    acc.add(std::pow(static_cast<double>(b), -w));
                },
                DualEnumMode::KernelWalk, enum_cap);
            return {acc.value(), kInf};
        } catch (const enumeration_cap_error&) {
            // rank-deficient matrices have kernels larger than b^{sl-d};
            // fall through to the capped scan
        }
    }

    // Adaptive support scan: one pass accumulates the capped dual sum and the
    // capped whole-box mass. The leftover box mass T_l - 1 - all_sum dominates
    // every dropped dual term, so it certifies the truncation directly; the
    // cap grows until that remainder falls below 1e-16 of the running sum (or
    // below the fp resolution of the box mass itself).
    DualWeightReport rep = min_dual_weight_report(g, a, enum_cap);
    if (rep.delta_in_range == kInf) return {0.0, rep.floor};
    const double box_mass = truncated_weight_sum(s, a, b, g.precision());

    double cap = rep.delta_in_range + 8.0;
    for (;;) {
        NeumaierSum dual_sum, all_sum;
        scan_weighted_box(
            g, a, cap,
            [&](double w, bool in_dual) {
                double term = std::pow(static_cast<double>(b), -w);
                all_sum.add(term);
                if (in_dual) dual_sum.add(term);
            },
            enum_cap);
        double remainder = std::max(0.0, box_mass - 1.0 - all_sum.value());
        double tol = 1e-16 * dual_sum.value() + 8e-16 * box_mass;
        if (remainder <= tol) return {dual_sum.value(), cap};
        cap += 8.0;  // node budget in the scan stops runaway growth
    }
}

double wafom_dual(const GeneratingMatrices& g, const WeightSequence& a,
                  std::uint64_t enum_cap) {
    return wafom_dual_detailed(g, a, enum_cap).value;
}

double truncated_weight_sum(std::size_t s, const WeightSequence& a, int base, std::size_t l) {
    double prod = 1.0;
    for (std::size_t j = 1; j <= s; ++j) {
        double aj = a.a(j);
        for (std::size_t i = 1; i <= l; ++i)
            prod *= 1.0 + (base - 1) * std::pow(static_cast<double>(base),
                                                -digit_cost(i, aj, true));
    }
    return prod;
}

double weight_sum_tail(std::size_t s, const WeightSequence& a, int base, std::size_t l) {
    double log_ratio = 0.0;
    for (std::size_t j = 1; j <= s; ++j) {
        double aj = a.a(j);
        for (std::size_t i = l + 1;; ++i) {
            double term = (base - 1) * std::pow(static_cast<double>(base),
                                                -digit_cost(i, aj, true));
            if (static_cast<double>(i) + aj > 1.0 && term < 1e-19) break;
            log_ratio += std::log1p(term);
        }
    }
    return truncated_weight_sum(s, a, base, l) * std::expm1(log_ratio);
}

double wce_upper_bound(double delta, std::size_t s, const WeightSequence& a, int base,
                       Regime regime) {
    BoundConstants c = BoundConstants::compute(s, a, base);
    const double ln_b = ln(static_cast<double>(base));
    if (regime == Regime::Conv) return c.c_bar * std::exp(-delta * ln_b / 2.0);
    if (!c.trac)
        throw std::invalid_argument(
            "wce_upper_bound: tractability regime needs a power rule with a > 0");
    return c.trac->c_bd * std::exp(-delta * ln_b / 2.0);
}

double lower_bound_box(int d, std::size_t s, const WeightSequence& a, int base) {
    if (d < 1) throw std::invalid_argument("lower_bound_box: d must be >= 1");
    double exponent = 0.0;
    for (std::size_t j = 1; j <= s; ++j) {
        double aj = a.a(j);
        if (aj < 0.0)
            throw std::invalid_argument("lower_bound_box: requires a_j >= 0 for all j");
        exponent += d * d / 2.0 + (aj + 0.5) * d;
    }
    return std::exp(-exponent * ln(static_cast<double>(base)));
}

double lower_bound_n(std::uint64_t n, std::size_t s, const WeightSequence& a, int base) {
    if (n < 1) throw std::invalid_argument("lower_bound_n: n must be >= 1");
    const double ln_b = ln(static_cast<double>(base));
    const double ln_n = ln(static_cast<double>(n));
    double sum_pos = 0.0;
    for (std::size_t j = 1; j <= s; ++j) sum_pos += std::max(a.a(j), 0.0);
    double exponent = -ln_n * ln_n / (2.0 * s * ln_b * ln_b) -
                      (1.5 * s + sum_pos) * ln_n / (s * ln_b) - (s + sum_pos);
    return std::exp(exponent * ln_b);
}

std::size_t no_p2_tractability_witness(double c, int base) {
    if (c <= 0.0) throw std::invalid_argument("no_p2_tractability_witness: c must be > 0");
    double threshold = 1.0 / (2.0 * c * ln(static_cast<double>(base)));
    return static_cast<std::size_t>(std::floor(threshold)) + 1;
}

MeritReport evaluate_report(const GeneratingMatrices& g, const WeightSequence& a,
                            Regime regime) {
    const int b = g.base();
    const std::size_t s = g.dimension();
    MeritReport r;

    DigitalNet net(g);
    r.wafom = wafom_pointwise(net, a);
    DualWeightReport d = min_dual_weight_report(g, a);
    r.delta = d.delta;
    r.delta_in_range = d.delta_in_range;
    r.delta_floor = d.floor;
    r.wafom_enum_cap = kInf;

    BoundConstants c = BoundConstants::compute(s, a, b);
    const double ln_b = ln(static_cast<double>(b));
    double analytic_tail = c.c_bar * std::exp(-d.floor * ln_b / 2.0);
    double exact_tail = weight_sum_tail(s, a, b, g.precision());
    r.tail_bound = std::min(analytic_tail, exact_tail);

    double constant = c.c_bar;
    if (regime == Regime::Trac) {
        if (!c.trac)
            throw std::invalid_argument(
                "evaluate_report: tractability regime needs a power rule with a > 0");
        constant = c.trac->c_bd;
    }
    r.log_wce_bound = ln(constant) - r.delta * ln_b / 2.0;
    r.wce_bound = constant * std::exp(-r.delta * ln_b / 2.0);
    return r;
}

std::string MeritReport::to_kv_block() const {
    std::string out;
    out += "wafom=" + fmt_g17(wafom) + "\n";
    out += "delta=" + fmt_g17(delta) + "\n";
    out += "delta_in_range=" + fmt_g17(delta_in_range) + "\n";
    out += "delta_floor=" + fmt_g17(delta_floor) + "\n";
    out += "tail_bound=" + fmt_g17(tail_bound) + "\n";
    out += "wce_bound=" + fmt_g17(wce_bound) + "\n";
    out += "log_wce_bound=" + fmt_g17(log_wce_bound) + "\n";
    out += "wafom_enum_cap=" + fmt_g17(wafom_enum_cap) + "\n";
    return out;
}

std::string MeritReport::csv_header() {
    return "wafom,delta,delta_in_range,delta_floor,tail_bound,wce_bound,log_wce_bound,"
           "wafom_enum_cap";
}

std::string MeritReport::to_csv_row() const {
    return fmt_g17(wafom) + "," + fmt_g17(delta) + "," + fmt_g17(delta_in_range) + "," +
           fmt_g17(delta_floor) + "," + fmt_g17(tail_bound) + "," + fmt_g17(wce_bound) + "," +
           fmt_g17(log_wce_bound) + "," + fmt_g17(wafom_enum_cap);
}

SearchResult search_net(std::size_t s, int base, std::size_t d, std::size_t l,
                        const WeightSequence& a, SearchTarget target, std::uint64_t trials,
                        std::uint64_t seed, unsigned jobs) {
    if (trials == 0) throw std::invalid_argument("search_net: zero trials");
    const double a1 = a.a(1);
    if (target.kind == SearchTarget::Kind::MinDelta) {
        if (static_cast<double>(l) < target.min_delta - a1 - 1.0 - 1e-12)
            throw std::invalid_argument(
                "search_net: precision l is below M - a_1 - 1; the out-of-box floor would sit "
                "under the delta target");
        try {
            std::uint64_t v = vol(target.min_delta, s, a, base, 10000000ULL);
            double rho_pow = std::pow(static_cast<double>(smallest_prime_factor(base)),
                                      static_cast<double>(d));
            if (static_cast<double>(v) > rho_pow)
                std::cerr << "search_net: warning: vol(M) = " << v << " exceeds rho_b^d = "
                          << rho_pow << "; the existence guarantee does not apply\n";
        } catch (const enumeration_cap_error&) {
            // advisory check only
        }
    }

    jobs = resolve_jobs(jobs);
    const double delta_tol = a.integral_weights(s) ? 0.0 : 1e-9;

    std::uint64_t processed = 0;
    double best_key = kInf;  // minimized: wafom, or -delta
    std::uint64_t best_trial = 0;
    std::optional<GeneratingMatrices> best_net;
    bool met = false;

    while (processed < trials && !(met && target.kind == SearchTarget::Kind::MinDelta)) {
        std::uint64_t batch = std::min<std::uint64_t>(jobs, trials - processed);
        std::vector<GeneratingMatrices> nets;
        nets.reserve(batch);
        for (std::uint64_t t = 0; t < batch; ++t) {
            SplitMix64 rng = substream(seed, processed + t);
            nets.push_back(GeneratingMatrices::random(base, s, l, d, rng));
        }
        std::vector<double> keys(batch, kInf);
        // plain chars: vector<bool> packs bits and parallel writes would race
        std::vector<char> ok(batch, 0);
        parallel_for(batch, jobs, [&](std::size_t t) {
            if (target.kind == SearchTarget::Kind::MinWafom) {
                DigitalNet net(nets[t]);
                keys[t] = wafom_pointwise(net, a);
                ok[t] = 1;
            } else {
                DualWeightReport rep = min_dual_weight_report(nets[t], a);
                keys[t] = -rep.delta;
                ok[t] = rep.delta >= target.min_delta - delta_tol ? 1 : 0;
            }
        });
        for (std::uint64_t t = 0; t < batch; ++t) {
            std::uint64_t trial_index = processed + t;
            if (keys[t] < best_key) {
                best_key = keys[t];
                best_trial = trial_index;
                best_net = nets[t];
            }
            if (target.kind == SearchTarget::Kind::MinDelta && ok[t]) {
                // first achieving trial wins; report it, not a later best
                best_key = keys[t];
                best_trial = trial_index;
                best_net = nets[t];
                met = true;
                processed = trial_index + 1;
                break;
            }
        }
        if (!(met && target.kind == SearchTarget::Kind::MinDelta))
            processed += batch;
    }

    SearchResult result{*best_net, evaluate_report(*best_net, a), best_trial, processed,
                        false};
    if (target.kind == SearchTarget::Kind::MinDelta)
        result.target_met = result.report.delta >= target.min_delta - delta_tol;
    else
        result.target_met = true;
    return result;
}

std::vector<RateRow> convergence_rate_table(const WeightSequence& a, int base,
                                            const std::vector<std::size_t>& s_range,
                                            const std::vector<std::size_t>& d_range,
                                            std::uint64_t trials, std::uint64_t seed,
                                            Regime regime, unsigned jobs) {
    std::vector<RateRow> rows;
    const double ln_b = ln(static_cast<double>(base));
    for (std::size_t s : s_range) {
        BoundConstants c = BoundConstants::compute(s, a, base);
        double ln_rho = ln(static_cast<double>(c.rho));
        for (std::size_t d : d_range) {
            RateRow row;
            row.s = s;
            row.d = d;
            row.n = checked_pow(static_cast<std::uint64_t>(base), static_cast<unsigned>(d));
            if (regime == Regime::Conv) {
                double ratio = static_cast<double>(d) * ln_rho / c.c_prime;
                row.target_m = ratio * ratio;
                row.wce_target = c.c_bar * std::exp(-c.c_second * static_cast<double>(d * d));
            } else {
                if (!c.trac)
                    throw std::invalid_argument(
                        "convergence_rate_table: tractability regime needs a power rule");
                double expo = (2.0 * c.trac->r + 1.0) / (c.trac->r + 1.0);
                row.target_m = c.trac->c_help * std::pow(static_cast<double>(d), expo);
                row.wce_target =
                    c.trac->c_bd *
                    std::exp(-c.trac->c_help * ln_b / 2.0 * std::pow(static_cast<double>(d), expo));
            }
            double a1 = a.a(1);
            std::size_t l = std::max<std::size_t>(
                d, static_cast<std::size_t>(std::max(0.0, std::ceil(row.target_m - a1 - 1.0))));
            row.l = l;
            row.seed = mix_seed(seed, (static_cast<std::uint64_t>(s) << 32) | d);
            SearchResult res = search_net(s, base, d, l, a,
                                          SearchTarget::delta_at_least(row.target_m), trials,
                                          row.seed, jobs);
            row.delta = res.report.delta;
            row.wafom = res.report.wafom;
            row.wce_at_delta = wce_upper_bound(res.report.delta, s, a, base, regime);
            row.lower_bound = lower_bound_n(row.n, s, a, base);
            row.target_met = res.target_met;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace qmcnets
