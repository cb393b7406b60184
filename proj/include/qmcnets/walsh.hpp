#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "qmcnets/basefield.hpp"

namespace qmcnets {

using WalshIndex = MultiIndex;

/// Point of [0,1)^s held as explicit digit vectors; coordinate j has value
/// sum_i digits[i] * b^{-(i+1)}. Digit extraction stays exact this way, which
/// is what keeps Walsh evaluation and net generation bit-reproducible.
class PointDigits {
public:
    PointDigits(int base, std::size_t dimension, std::size_t precision);
    explicit PointDigits(std::vector<Digits> coords);

    /// Round-toward-zero digit extraction; follows the convention that the
    /// expansion does not end in an infinite run of (b-1)s.
    static PointDigits from_reals(const std::vector<double>& x, int base,
                                  std::size_t precision);

    int base() const { return base_; }
    std::size_t dimension() const { return coords_.size(); }
    std::size_t precision() const { return precision_; }
    const Digits& coord(std::size_t j) const { return coords_[j]; }
    Digits& coord(std::size_t j) { return coords_[j]; }

    double coordinate_value(std::size_t j) const;
    std::vector<double> values() const;

    bool operator==(const PointDigits&) const = default;

private:
    int base_;
    std::size_t precision_;
    std::vector<Digits> coords_;
};

/// exp(2 pi i e / b) for e in [0, b).
std::complex<double> root_of_unity(int base, unsigned exponent);

/// Exponent of wal_k(x) in Z_b, i.e. sum_j sum_i kappa_{j,i} xi_{j,i} mod b.
unsigned walsh_exponent(const WalshIndex& k, const PointDigits& x);

std::complex<double> walsh_eval(const WalshIndex& k, const PointDigits& x);

/// Sign of wal_k(x) for base 2 without complex arithmetic.
int walsh_eval_sign(const WalshIndex& k, const PointDigits& x);

using Integrand = std::function<double(const std::vector<double>&)>;

/// k-th Walsh coefficient approximated on the b-adic grid with b^{s*level}
/// cells: f is sampled at cell midpoints, wal_k is constant per cell.
/// Exact whenever f is constant on the grid cells. Throws
/// enumeration_cap_error when the full grid exceeds grid_cap points.
std::complex<double> walsh_coefficient(const Integrand& f, const WalshIndex& k,
                                       std::size_t quad_level,
                                       std::uint64_t grid_cap = std::uint64_t{1} << 24);

/// Same quadrature for a product integrand f(x) = prod_j factors[j](x_j);
/// runs one anchored grid per coordinate, so the cost is s * b^level.
std::complex<double> walsh_coefficient_separable(
    const std::vector<std::function<double(double)>>& factors, const WalshIndex& k,
    std::size_t quad_level);

}  // namespace qmcnets
