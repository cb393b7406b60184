#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qmcnets/integrate.hpp"

using namespace qmcnets;

namespace {
const WeightSequence zero_rule = WeightSequence::power(0, 1, 0, 2);
const WeightSequence u_geo = WeightSequence::smooth_power(0.5, 0.5, 2);  // u_j = 2^{-j}
}  // namespace

TEST_CASE("qmc of a constant is exact") {
    SplitMix64 rng(1);
    GeneratingMatrices g = GeneratingMatrices::random(2, 2, 4, 3, rng);
    TestFunction one = TestFunction::exp_linear({0.0, 0.0});
    CHECK(qmc(DigitalNet(g), one) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one.exact_integral() == doctest::Approx(1.0));
}

TEST_CASE("qmc error on walsh-pure integrands is the dual indicator") {
    SplitMix64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        int b = (rep % 2 == 0) ? 2 : 3;
        std::size_t s = 1 + rng.below(2);
        std::size_t l = 2 + rng.below(2);
        std::size_t d = 1 + rng.below(l);
        GeneratingMatrices g = GeneratingMatrices::random(b, s, l, d, rng);
        DigitalNet net(g);
        std::uint64_t box = checked_pow(b, static_cast<unsigned>(l));
        for (int probe = 0; probe < 8; ++probe) {
            std::vector<std::uint64_t> ks(s);
            for (auto& kv : ks) kv = rng.below(box);
            MultiIndex k = MultiIndex::from_integers(ks, b, l);
            if (k.is_zero()) continue;
            TestFunction f = TestFunction::walsh_pure(k);
            double estimate = qmc(net, f);
            double expect = dual_contains(g, k) ? 1.0 : 0.0;
            CHECK(std::abs(estimate - expect) < 1e-12);
            CHECK(f.exact_integral() == 0.0);
        }
    }
}

TEST_CASE("exp-linear exact integral matches grid quadrature") {
    // s = 1
    TestFunction f1 = TestFunction::exp_linear({0.5});
    auto q1 = walsh_coefficient_separable(f1.coordinate_factors(),
                                          MultiIndex(2, 1, 1), 14);
    CHECK(std::abs(q1.real() - f1.exact_integral()) < 1e-10);
    // s = 2
    TestFunction f2 = TestFunction::exp_linear({0.5, 0.25});
    auto q2 = walsh_coefficient_separable(f2.coordinate_factors(),
                                          MultiIndex(2, 2, 1), 14);
    CHECK(std::abs(q2.real() - f2.exact_integral()) < 1e-10);
    // closed form itself
    CHECK(f1.exact_integral() == doctest::Approx(2.0 * (std::sqrt(std::exp(1.0)) - 1.0)));
}

TEST_CASE("norm certificates") {
    TestFunction ok = TestFunction::exp_linear({0.5, 0.25});
    auto cert = ok.norm_certificate(WeightSequence::smooth_list({0.5, 0.25}, 2));
    REQUIRE(cert.has_value());
    CHECK(*cert == doctest::Approx(ok.exact_integral()));

    TestFunction too_big = TestFunction::exp_linear({0.6});
    CHECK_FALSE(too_big.norm_certificate(WeightSequence::smooth_list({0.5}, 2)).has_value());

    TestFunction cos_small = TestFunction::cosine({0.5});
    CHECK_FALSE(cos_small.norm_certificate(WeightSequence::smooth_list({0.5}, 2)).has_value());
    auto cos_cert = cos_small.norm_certificate(WeightSequence::smooth_list({7.0}, 2));
    REQUIRE(cos_cert.has_value());
    CHECK(*cos_cert >= 1.0);

    CHECK_FALSE(TestFunction::walsh_pure(MultiIndex::from_integers({1}, 2, 2))
                    .norm_certificate(u_geo)
                    .has_value());
}

TEST_CASE("error_vs_bound: sound on exp-linear, exact on walsh witnesses") {
    SplitMix64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t d = 2 + rng.below(4);
        std::size_t l = 2 * d + 4;
        GeneratingMatrices g = GeneratingMatrices::random(2, 1, l, d, rng);
        TestFunction f = TestFunction::exp_linear({0.5});
        ErrorVsBound eb = error_vs_bound(g, f, WeightSequence::smooth_power(0.5, 1.0, 2));
        CHECK(eb.empirical <= eb.certified);
    }

    // constant integrand: zero error, bound still non-negative
    GeneratingMatrices g0 = GeneratingMatrices::identity_net(2, 1, 4, 2);
    ErrorVsBound ez = error_vs_bound(g0, TestFunction::exp_linear({0.0}),
                                     WeightSequence::smooth_power(0.5, 1.0, 2));
    CHECK(ez.empirical <= 1e-15);
    CHECK(ez.certified >= 0.0);

    // walsh-pure witness inside the dual: empirical = 1, certified >= 1
    GeneratingMatrices gz(2, 1, 2, 1);
    gz.matrix(0).set(0, 0, 1);  // dual contains k = 2
    TestFunction wit = TestFunction::walsh_pure(MultiIndex::from_integers({2}, 2, 2));
    ErrorVsBound ew = error_vs_bound(gz, wit, zero_rule);
    CHECK(ew.empirical == doctest::Approx(1.0));
    CHECK(ew.certified >= 1.0 - 1e-12);

    CHECK_THROWS_AS(error_vs_bound(gz, TestFunction::cosine({0.5}),
                                   WeightSequence::smooth_power(0.5, 1.0, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(error_vs_bound(gz, TestFunction::exp_linear({0.5}), zero_rule),
                    std::invalid_argument);
}

TEST_CASE("full-grid net integrates cell-constant functions exactly") {
    GeneratingMatrices g = GeneratingMatrices::identity_net(2, 1, 3, 3);
    DigitalNet net(g);
    // arbitrary table over the 8 cells of length 1/8
    std::vector<double> table{0.3, -1.5, 2.25, 0.0, 7.5, -0.125, 1.0, 4.75};
    double mean = 0.0;
    for (double t : table) mean += t / 8.0;
    double estimate = 0.0;
    for (std::size_t k = 0; k < net.size(); ++k) {
        double x = net.point_values(k)[0];
        estimate += table[static_cast<std::size_t>(x * 8.0)] / 8.0;
    }
    CHECK(estimate == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("convergence experiment: shape, determinism, decay") {
    std::vector<std::size_t> ss{1, 2};
    std::vector<std::size_t> ds{2, 3, 4, 5, 6, 7, 8};
    auto records = convergence_experiment(TestFunction::Family::ExpLinear, u_geo, 2, ss, ds,
                                          16, 2718, 2);
    REQUIRE(records.size() == ss.size() * ds.size());

    // byte-identical CSV regardless of the worker count
    auto again = convergence_experiment(TestFunction::Family::ExpLinear, u_geo, 2, ss, ds,
                                        16, 2718, 1);
    std::ostringstream csv1, csv2;
    write_convergence_csv(csv1, records);
    write_convergence_csv(csv2, again);
    CHECK(csv1.str() == csv2.str());
    CHECK(csv1.str().substr(0, csv1.str().find('\n')) ==
          "s,n,d,seed,delta,wafom,empirical,certified,lower_bound");

    // soundness of every certified row, and bound ordering
    for (const ConvergenceRecord& r : records) {
        CHECK(r.empirical <= r.certified * (1.0 + 1e-12));
        CHECK(r.lower_bound <=
              wce_upper_bound(r.delta, r.s, embed_smooth_to_walsh(u_geo, EmbedVariant::Loose).a,
                              2, Regime::Conv) *
                  (1.0 + 1e-12));
    }

    // strong decay for s = 1: late errors collapse relative to early ones
    double early = 0.0, late = 1e300;
    for (const ConvergenceRecord& r : records) {
        if (r.s != 1) continue;
        if (r.d <= 3) early = std::max(early, r.empirical);
        if (r.d >= 7) late = std::min(late, r.empirical);
    }
    CHECK(late <= 1e-2 * early);

    SlopeFit fit = fit_log_error(records);
    CHECK(fit.slope < 0.0);
    CHECK(fit.points > 4);
}

TEST_CASE("dimension robustness: errors at fixed d sit under one s-free bound") {
    // u_j = 2^{-j} embeds to a_j = j, whose tractability constants carry no
    // dimension dependence; the same bound must cover s = 1 through 8.
    auto records = convergence_experiment(TestFunction::Family::ExpLinear, u_geo, 2,
                                          {1, 2, 4, 8}, {6, 7}, 16, 3141, 2);
    const WeightSequence a = embed_smooth_to_walsh(u_geo, EmbedVariant::Loose).a;
    BoundConstants c = BoundConstants::compute(1, a, 2);
    REQUIRE(c.trac.has_value());
    for (std::size_t d : {6u, 7u}) {
        double bound = c.trac->c_bd *
                       std::exp(-c.trac->c_help * std::log(2.0) / 2.0 *
                                std::pow(static_cast<double>(d), 1.5));
        double lo = 1e300, hi = 0.0;
        for (const ConvergenceRecord& r : records) {
            if (r.d != d) continue;
            CHECK(r.empirical <= bound);
            lo = std::min(lo, std::max(r.empirical, 1e-15));
            hi = std::max(hi, r.empirical);
        }
        // growing s costs a bounded factor, far from exponential blow-up
        CHECK(hi <= 1e3 * lo);
    }
}

TEST_CASE("cosine family runs as an uncertified smoke test") {
    std::vector<std::size_t> ss{1};
    std::vector<std::size_t> ds{2, 3};
    auto records = convergence_experiment(TestFunction::Family::Cosine, u_geo, 2, ss, ds,
                                          4, 99, 1);
    for (const ConvergenceRecord& r : records) {
        CHECK(std::isnan(r.certified));
        CHECK(r.empirical < 0.5);  // it still integrates reasonably
    }
}

TEST_CASE("fit_line recovers a known line") {
    SlopeFit fit = fit_line({1, 2, 3, 4}, {2.0, 3.5, 5.0, 6.5});
    CHECK(fit.slope == doctest::Approx(1.5));
    CHECK(fit.intercept == doctest::Approx(0.5));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_line({1}, {1}), std::invalid_argument);
}
