#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qmcnets/merit.hpp"

namespace qmcnets {

/// Product-form integrands with closed-form integrals. exp-linear is the
/// primary family: every mixed partial and the smooth-space norm are explicit,
/// so the full error chain is testable end to end. The cosine family is a
/// smoke test (no certificate for the weight ranges of interest) and
/// walsh-pure indexes the exact worst-case witnesses of a net.
class TestFunction {
public:
    enum class Family { ExpLinear, Cosine, WalshPure };

    /// f(x) = prod_j exp(c_j x_j); integral prod_j (e^{c_j} - 1)/c_j.
    static TestFunction exp_linear(std::vector<double> c);
    /// f(x) = prod_j (1 + c_j cos(2 pi x_j)); integral 1. Requires |c_j| <= 1.
    static TestFunction cosine(std::vector<double> c);
    /// f = wal_k (real part; the imaginary part integrates to zero on nets).
    static TestFunction walsh_pure(MultiIndex k);

    Family family() const { return family_; }
    std::size_t dimension() const;

    double operator()(const std::vector<double>& x) const;
    double eval_point(const PointDigits& x) const;
    double exact_integral() const;

    /// Upper bound on the smooth-space norm ||f||_{S_{s,u}} when finite:
    /// exp-linear needs |c_j| <= u_j; cosine needs u_j >= 2 pi (its
    /// derivatives grow like (2 pi)^n, so small-u spaces exclude it).
    std::optional<double> norm_certificate(const WeightSequence& u) const;

    const std::vector<double>& coefficients() const { return c_; }
    const MultiIndex& walsh_index() const;

    std::vector<std::function<double(double)>> coordinate_factors() const;

private:
    TestFunction() = default;
    Family family_ = Family::ExpLinear;
    std::vector<double> c_;
    std::optional<MultiIndex> k_;
};

/// Equal-weight average of f over the point multiset.
double qmc(const DigitalNet& net, const TestFunction& f);

struct ErrorVsBound {
    double empirical;
    double certified;
};

/// |qmc - I(f)| against the certified chain norm * (wafom + tail).
/// Smooth-space weights are embedded (loose variant); Walsh-space weights are
/// accepted for walsh-pure integrands, whose modified-space norm is exactly
/// b^{weight(k)}. Throws when no certificate exists.
ErrorVsBound error_vs_bound(const GeneratingMatrices& g, const TestFunction& f,
                            const WeightSequence& weights);

struct ConvergenceRecord {
    std::size_t s = 0;
    std::uint64_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    double delta = 0;
    double wafom = 0;
    double empirical = 0;
    double certified = 0;  // NaN for families without a certificate
    double lower_bound = 0;
};

/// Per-(s, d) cell: search a net (min-WAFOM target), integrate the family
/// with c_j = u_j (clamped to 1 for the cosine family), and record the full
/// bound chain. Cells run independently; the cell seed depends only on
/// (seed, s, d), so results are byte-identical for any worker count.
std::vector<ConvergenceRecord> convergence_experiment(
    TestFunction::Family family, const WeightSequence& u, int base,
    const std::vector<std::size_t>& s_list, const std::vector<std::size_t>& d_list,
    std::uint64_t trials, std::uint64_t seed, unsigned jobs = 0);

std::string convergence_csv_header();
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records);

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::size_t points = 0;
};

/// Least squares of ln(empirical error) against (ln n)^2; rows at or below
/// the floating-point floor are excluded.
SlopeFit fit_log_error(const std::vector<ConvergenceRecord>& records, double floor = 1e-15);

/// Generic least squares helper for (x, y) pairs.
SlopeFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace qmcnets
