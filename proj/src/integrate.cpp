#include "qmcnets/integrate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "qmcnets/format.hpp"
#include "qmcnets/parallel.hpp"
#include "qmcnets/summation.hpp"

namespace qmcnets {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

TestFunction TestFunction::exp_linear(std::vector<double> c) {
    if (c.empty()) throw std::invalid_argument("exp_linear: empty coefficient list");
    TestFunction f;
    f.family_ = Family::ExpLinear;
    f.c_ = std::move(c);
    return f;
}

TestFunction TestFunction::cosine(std::vector<double> c) {
    if (c.empty()) throw std::invalid_argument("cosine: empty coefficient list");
    for (double cj : c)
        if (std::abs(cj) > 1.0)
            throw std::invalid_argument("cosine: requires |c_j| <= 1 (keeps the factor positive)");
    TestFunction f;
    f.family_ = Family::Cosine;
    f.c_ = std::move(c);
    return f;
}

TestFunction TestFunction::walsh_pure(MultiIndex k) {
    TestFunction f;
    f.family_ = Family::WalshPure;
    f.k_ = std::move(k);
    return f;
}

std::size_t TestFunction::dimension() const {
    return family_ == Family::WalshPure ? k_->dimension() : c_.size();
}

const MultiIndex& TestFunction::walsh_index() const {
    if (family_ != Family::WalshPure)
        throw std::invalid_argument("walsh_index: not a walsh-pure function");
    return *k_;
}

double TestFunction::operator()(const std::vector<double>& x) const {
    if (x.size() != dimension()) throw std::invalid_argument("TestFunction: dimension mismatch");
    switch (family_) {
        case Family::ExpLinear: {
            double e = 0.0;
            for (std::size_t j = 0; j < c_.size(); ++j) e += c_[j] * x[j];
            return std::exp(e);
        }
        case Family::Cosine: {
            double p = 1.0;
            for (std::size_t j = 0; j < c_.size(); ++j)
                p *= 1.0 + c_[j] * std::cos(2.0 * std::numbers::pi * x[j]);
            return p;
        }
        case Family::WalshPure: {
            PointDigits pd = PointDigits::from_reals(x, k_->base(), k_->precision());
            return walsh_eval(*k_, pd).real();
        }
    }
    return 0.0;
}

double TestFunction::eval_point(const PointDigits& x) const {
    if (family_ == Family::WalshPure) {
        // digit-exact evaluation; pad the index when the point is finer
        if (x.precision() == k_->precision()) return walsh_eval(*k_, x).real();
        if (x.precision() > k_->precision()) {
            std::vector<Digits> coords;
            coords.reserve(k_->dimension());
            for (std::size_t j = 0; j < k_->dimension(); ++j) {
                Digits dj(k_->base(), x.precision());
                for (std::size_t i = 0; i < k_->precision(); ++i) dj[i] = k_->coord(j)[i];
                coords.push_back(std::move(dj));
            }
            return walsh_eval(MultiIndex(std::move(coords)), x).real();
        }
        for (std::size_t j = 0; j < k_->dimension(); ++j)
            for (std::size_t i = x.precision(); i < k_->precision(); ++i)
                if (k_->coord(j)[i] != 0)
                    throw std::invalid_argument(
                        "eval_point: point precision below the Walsh index precision");
        std::vector<Digits> coords;
        for (std::size_t j = 0; j < k_->dimension(); ++j)
            coords.push_back(k_->coord(j).truncated(x.precision()));
        return walsh_eval(MultiIndex(std::move(coords)), x).real();
    }
    return (*this)(x.values());
}

double TestFunction::exact_integral() const {
    switch (family_) {
        case Family::ExpLinear: {
            double p = 1.0;
            for (double c : c_) p *= (c == 0.0) ? 1.0 : std::expm1(c) / c;
            return p;
        }
        case Family::Cosine:
            return 1.0;
        case Family::WalshPure:
            return k_->is_zero() ? 1.0 : 0.0;
    }
    return 0.0;
}

std::optional<double> TestFunction::norm_certificate(const WeightSequence& u) const {
    if (!u.is_smooth()) return std::nullopt;
    switch (family_) {
        case Family::ExpLinear: {
            // ||f^(alpha)||_1 = prod |c_j|^{alpha_j} * I(|f|); the sup over
            // alpha is attained at 0 exactly when |c_j| <= u_j.
            double integral = 1.0;
            for (std::size_t j = 0; j < c_.size(); ++j) {
                if (std::abs(c_[j]) > u.u(j + 1)) return std::nullopt;
                integral *= (c_[j] == 0.0) ? 1.0 : std::abs(std::expm1(c_[j]) / c_[j]);
            }
            return integral;
        }
        case Family::Cosine: {
            // d^n/dx^n cos(2 pi x) grows like (2 pi)^n, so a finite norm needs
            // u_j >= 2 pi; then the sup over alpha_j sits at alpha_j <= 1.
            double cert = 1.0;
            for (std::size_t j = 0; j < c_.size(); ++j) {
                double uj = u.u(j + 1);
                if (uj < 2.0 * std::numbers::pi) return std::nullopt;
                double one_deriv =
                    std::abs(c_[j]) * (2.0 / std::numbers::pi) * (2.0 * std::numbers::pi / uj);
                cert *= std::max(1.0, one_deriv);
            }
            return cert;
        }
        case Family::WalshPure:
            return std::nullopt;  // not even continuous, so never in the smooth space
    }
    return std::nullopt;
}

std::vector<std::function<double(double)>> TestFunction::coordinate_factors() const {
    std::vector<std::function<double(double)>> out;
    switch (family_) {
        case Family::ExpLinear:
            for (double c : c_) out.push_back([c](double x) { return std::exp(c * x); });
            break;
        case Family::Cosine:
            for (double c : c_)
                out.push_back(
                    [c](double x) { return 1.0 + c * std::cos(2.0 * std::numbers::pi * x); });
            break;
        case Family::WalshPure:
            throw std::invalid_argument("coordinate_factors: walsh-pure is complex-valued");
    }
    return out;
}

double qmc(const DigitalNet& net, const TestFunction& f) {
    if (f.dimension() != net.generators().dimension())
        throw std::invalid_argument("qmc: integrand dimension != net dimension");
    NeumaierSum acc;
    for (std::size_t k = 0; k < net.size(); ++k) acc.add(f.eval_point(net.point(k)));
    return acc.value() / static_cast<double>(net.size());
}

ErrorVsBound error_vs_bound(const GeneratingMatrices& g, const TestFunction& f,
                            const WeightSequence& weights) {
    const int b = g.base();
    const std::size_t s = g.dimension();
    if (f.dimension() != s) throw std::invalid_argument("error_vs_bound: dimension mismatch");

    WeightSequence a = weights;
    double norm;
    if (weights.is_smooth()) {
        EmbeddedWeights embed = embed_smooth_to_walsh(weights, EmbedVariant::Loose);
        a = embed.a;
        std::optional<double> cert = f.norm_certificate(weights);
        if (!cert)
            throw std::invalid_argument(
                "error_vs_bound: integrand carries no norm certificate for these weights");
        // Loose-variant factor is 1; the remaining step lifts the plain-space
        // norm bound to the modified space.
        norm = *cert * embed.norm_factor(s) *
               std::pow(static_cast<double>(b), norm_equivalence_exponent(a, s));
    } else {
        if (f.family() != TestFunction::Family::WalshPure)
            throw std::invalid_argument(
                "error_vs_bound: Walsh-space weights certify only walsh-pure integrands");
        norm = std::pow(static_cast<double>(b), dick_weight(f.walsh_index(), a, true));
    }

    DigitalNet net(g);
    double empirical = std::abs(qmc(net, f) - f.exact_integral());
    double wafom = wafom_pointwise(net, a);
    BoundConstants c = BoundConstants::compute(s, a, b);
    double floor_w = dual_weight_floor(g.precision(), a);
    double tail = std::min(weight_sum_tail(s, a, b, g.precision()),
                           c.c_bar * std::exp(-floor_w * std::log(static_cast<double>(b)) / 2.0));
    return {empirical, norm * (wafom + tail)};
}

std::vector<ConvergenceRecord> convergence_experiment(
    TestFunction::Family family, const WeightSequence& u, int base,
    const std::vector<std::size_t>& s_list, const std::vector<std::size_t>& d_list,
    std::uint64_t trials, std::uint64_t seed, unsigned jobs) {
    if (!u.is_smooth())
        throw std::invalid_argument("convergence_experiment: needs a smooth-space rule");
    const std::size_t cells = s_list.size() * d_list.size();
    std::vector<ConvergenceRecord> records(cells);

    parallel_for(cells, resolve_jobs(jobs), [&](std::size_t cell) {
        const std::size_t s = s_list[cell / d_list.size()];
        const std::size_t d = d_list[cell % d_list.size()];
        EmbeddedWeights embed = embed_smooth_to_walsh(u, EmbedVariant::Loose);
        const WeightSequence& a = embed.a;

        const std::size_t l = std::max(d, 2 * d + 6);
        const std::uint64_t cell_seed =
            mix_seed(seed, (static_cast<std::uint64_t>(s) << 32) | d);
        SearchResult found = search_net(s, base, d, l, a, SearchTarget::min_wafom(), trials,
                                        cell_seed, 1);

        std::vector<double> c(s);
        for (std::size_t j = 0; j < s; ++j) c[j] = u.u(j + 1);
        TestFunction f = TestFunction::exp_linear(c);
        if (family == TestFunction::Family::Cosine) {
            for (double& cj : c) cj = std::min(cj, 1.0);  // keeps the factors positive
            f = TestFunction::cosine(c);
        }

        ConvergenceRecord rec;
        rec.s = s;
        rec.d = d;
        rec.n = checked_pow(static_cast<std::uint64_t>(base), static_cast<unsigned>(d));
        rec.seed = cell_seed;
        rec.delta = found.report.delta;
        rec.wafom = found.report.wafom;
        DigitalNet net(found.net);
        rec.empirical = std::abs(qmc(net, f) - f.exact_integral());
        if (f.norm_certificate(u)) {
            ErrorVsBound eb = error_vs_bound(found.net, f, u);
            rec.certified = eb.certified;
        } else {
            rec.certified = kNan;
        }
        rec.lower_bound = lower_bound_n(rec.n, s, a, base);
        records[cell] = rec;
    });
    return records;
}

std::string convergence_csv_header() {
    return "s,n,d,seed,delta,wafom,empirical,certified,lower_bound";
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records) {
    os << convergence_csv_header() << '\n';
    for (const ConvergenceRecord& r : records) {
        os << r.s << ',' << r.n << ',' << r.d << ',' << r.seed << ',' << fmt_g17(r.delta)
           << ',' << fmt_g17(r.wafom) << ',' << fmt_g17(r.empirical) << ','
           << fmt_g17(r.certified) << ',' << fmt_g17(r.lower_bound) << '\n';
    }
}

SlopeFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    SlopeFit fit;
    fit.points = xs.size();
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
        ss_res += e * e;
    }
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

SlopeFit fit_log_error(const std::vector<ConvergenceRecord>& records, double floor) {
    std::vector<double> xs, ys;
    for (const ConvergenceRecord& r : records) {
        if (!(r.empirical > floor)) continue;
        double ln_n = std::log(static_cast<double>(r.n));
        xs.push_back(ln_n * ln_n);
        ys.push_back(std::log(r.empirical));
    }
    return fit_line(xs, ys);
}

}  // namespace qmcnets
