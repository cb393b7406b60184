#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmcnets {

using digit_t = std::uint8_t;

/// Thrown when an exact enumeration would exceed its configured cap.
/// Callers should fall back to the analytic bound instead.
class enumeration_cap_error : public std::runtime_error {
public:
    explicit enumeration_cap_error(const std::string& what)
        : std::runtime_error(what) {}
};

bool is_prime(int b);
int smallest_prime_factor(int b);

/// b^e, throwing std::overflow_error if the result does not fit in 64 bits.
std::uint64_t checked_pow(std::uint64_t base, unsigned exponent);

/// b^e with saturation at UINT64_MAX (useful for "does k fit" tests).
std::uint64_t saturating_pow(std::uint64_t base, unsigned exponent);

/// Fixed-precision b-adic digit vector, little-endian: digits()[i] holds the
/// coefficient of b^i, so an integer k < b^l round-trips through from_integer.
class Digits {
public:
    Digits(int base, std::size_t length);
    Digits(int base, std::vector<digit_t> digits);

    static Digits from_integer(std::uint64_t k, int base, std::size_t precision);

    int base() const { return base_; }
    std::size_t size() const { return digits_.size(); }
    digit_t operator[](std::size_t i) const { return digits_[i]; }
    digit_t& operator[](std::size_t i) { return digits_[i]; }
    const std::vector<digit_t>& digits() const { return digits_; }

    bool is_zero() const;
    std::uint64_t value() const;            // throws std::overflow_error if > 2^64-1
    Digits truncated(std::size_t m) const;  // tr_m: first m digits, zero-padded

    friend Digits operator+(const Digits& a, const Digits& b);  // digitwise mod b
    friend Digits operator-(const Digits& a, const Digits& b);

    bool operator==(const Digits&) const = default;

private:
    int base_;
    std::vector<digit_t> digits_;
};

/// Dense l x d matrix over Z_b, row-major.
class MatrixZb {
public:
    MatrixZb(int base, std::size_t rows, std::size_t cols);

    static MatrixZb identity(int base, std::size_t n);

    int base() const { return base_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    digit_t at(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, digit_t v);

    MatrixZb transposed() const;

    /// Rank over Z_b; requires prime base.
    std::size_t rank() const;

    bool operator==(const MatrixZb&) const = default;

private:
    int base_;
    std::size_t rows_, cols_;
    std::vector<digit_t> e_;
};

/// G * v over Z_b. v must have length cols(G) and the same base.
Digits mat_vec(const MatrixZb& g, const Digits& v);

/// Basis of {v : A v = 0 over Z_b}. Requires prime base (Gaussian elimination
/// over a field); composite bases are rejected.
std::vector<Digits> kernel_basis(const MatrixZb& a);

/// Multi-index k = (k_1, ..., k_s), one digit vector per coordinate, all
/// sharing base and precision.
class MultiIndex {
public:
    MultiIndex(int base, std::size_t dimension, std::size_t precision);
    explicit MultiIndex(std::vector<Digits> coords);

    static MultiIndex from_integers(const std::vector<std::uint64_t>& ks, int base,
                                    std::size_t precision);

    int base() const { return base_; }
    std::size_t dimension() const { return coords_.size(); }
    std::size_t precision() const { return precision_; }
    const Digits& coord(std::size_t j) const { return coords_[j]; }
    Digits& coord(std::size_t j) { return coords_[j]; }

    bool is_zero() const;
    std::vector<std::uint64_t> values() const;

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
    friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);

    bool operator==(const MultiIndex&) const = default;

private:
    int base_;
    std::size_t precision_;
    std::vector<Digits> coords_;
};

}  // namespace qmcnets
