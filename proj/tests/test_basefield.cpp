#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmcnets/basefield.hpp"
#include "qmcnets/rng.hpp"

using namespace qmcnets;

TEST_CASE("from_integer produces little-endian digits") {
    CHECK(Digits::from_integer(6, 2, 4).digits() == std::vector<digit_t>{0, 1, 1, 0});
    CHECK(Digits::from_integer(0, 3, 2).digits() == std::vector<digit_t>{0, 0});
    CHECK(Digits::from_integer(7, 3, 3).digits() == std::vector<digit_t>{1, 2, 0});
}

TEST_CASE("from_integer rejects bad input") {
    CHECK_THROWS_AS(Digits::from_integer(0, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(Digits::from_integer(8, 2, 3), std::invalid_argument);  // 8 >= 2^3
    CHECK_THROWS_AS(Digits::from_integer(1, 2, 0), std::invalid_argument);
    CHECK_NOTHROW(Digits::from_integer(7, 2, 3));
}

TEST_CASE("value round-trips from_integer") {
    for (int b : {2, 3, 5, 6}) {
        std::size_t l = 5;
        std::uint64_t box = checked_pow(b, static_cast<unsigned>(l));
        for (std::uint64_t k = 0; k < box; k += (b == 2 ? 1 : 3))
            CHECK(Digits::from_integer(k, b, l).value() == k);
    }
}

TEST_CASE("digitwise add and sub") {
    auto d = [](std::uint64_t k, int b, std::size_t l) { return Digits::from_integer(k, b, l); };
    CHECK((d(3, 2, 2) + d(1, 2, 2)).value() == 2);  // (1,1) + (1,0) = (0,1)
    CHECK((d(5, 3, 2) + d(7, 3, 2)).value() == 0);  // (2,1) + (1,2) = (0,0)
    CHECK((d(5, 3, 2) - d(5, 3, 2)).value() == 0);

    CHECK_THROWS_AS(d(1, 2, 2) + d(1, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(d(1, 2, 2) + d(1, 2, 3), std::invalid_argument);
}

TEST_CASE("group law (k + k') - k' = k") {
    SplitMix64 rng(12345);
    for (int rep = 0; rep < 200; ++rep) {
        int b = 2 + static_cast<int>(rng.below(5));
        std::size_t l = 1 + rng.below(6);
        std::uint64_t box = checked_pow(b, static_cast<unsigned>(l));
        Digits a = Digits::from_integer(rng.below(box), b, l);
        Digits c = Digits::from_integer(rng.below(box), b, l);
        CHECK((a + c) - c == a);
        CHECK((a - c) + c == a);
    }
}

TEST_CASE("mat_vec basics") {
    MatrixZb id = MatrixZb::identity(2, 3);
    Digits v(2, {1, 0, 1});
    CHECK(mat_vec(id, v) == v);

    MatrixZb zero(5, 2, 2);
    Digits w(5, {3, 4});
    CHECK(mat_vec(zero, w).is_zero());

    MatrixZb g(2, 2, 2);
    g.set(0, 0, 1);
    g.set(0, 1, 1);
    g.set(1, 1, 1);
    Digits ones(2, {1, 1});
    CHECK(mat_vec(g, ones).digits() == std::vector<digit_t>{0, 1});

    CHECK_THROWS_AS(mat_vec(g, Digits(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(mat_vec(g, Digits(3, 2)), std::invalid_argument);
}

TEST_CASE("kernel_basis examples") {
    CHECK(kernel_basis(MatrixZb::identity(2, 3)).empty());
    CHECK(kernel_basis(MatrixZb(3, 2, 3)).size() == 3);

    MatrixZb rel(2, 1, 2);
    rel.set(0, 0, 1);
    rel.set(0, 1, 1);
    auto basis = kernel_basis(rel);
    REQUIRE(basis.size() == 1);
    CHECK(basis[0].digits() == std::vector<digit_t>{1, 1});

    CHECK_THROWS_AS(kernel_basis(MatrixZb(6, 2, 2)), std::invalid_argument);
}

TEST_CASE("kernel size is b^(cols - rank), exhaustively") {
    SplitMix64 rng(777);
    for (int b : {2, 3, 5}) {
        for (int rep = 0; rep < 6; ++rep) {
            std::size_t rows = 1 + rng.below(4);
            std::size_t cols = 2 + rng.below(7);  // cols <= 8
            MatrixZb a(b, rows, cols);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    a.set(r, c, static_cast<digit_t>(rng.below(b)));
            auto basis = kernel_basis(a);
            for (const Digits& v : basis) CHECK(mat_vec(a, v).is_zero());

            std::uint64_t box = checked_pow(b, static_cast<unsigned>(cols));
            std::uint64_t in_kernel = 0;
            for (std::uint64_t k = 0; k < box; ++k)
                if (mat_vec(a, Digits::from_integer(k, b, cols)).is_zero()) ++in_kernel;
            CHECK(in_kernel == checked_pow(b, static_cast<unsigned>(basis.size())));
            CHECK(basis.size() == cols - a.rank());
        }
    }
}

TEST_CASE("MultiIndex componentwise ops") {
    MultiIndex a = MultiIndex::from_integers({3, 5}, 2, 4);
    MultiIndex b = MultiIndex::from_integers({1, 5}, 2, 4);
    CHECK((a - b).values() == std::vector<std::uint64_t>{2, 0});
    CHECK((a + b) - b == a);
    CHECK(MultiIndex(2, 3, 4).is_zero());
}

TEST_CASE("truncated keeps the leading digits") {
    Digits d = Digits::from_integer(6, 2, 4);  // 0110
    CHECK(d.truncated(2).digits() == std::vector<digit_t>{0, 1});
    CHECK(d.truncated(6).digits() == std::vector<digit_t>{0, 1, 1, 0, 0, 0});
}
