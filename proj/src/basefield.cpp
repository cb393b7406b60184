#include "qmcnets/basefield.hpp"

#include <limits>

namespace qmcnets {

bool is_prime(int b) {
    if (b < 2) return false;
    for (int p = 2; p * p <= b; ++p)
        if (b % p == 0) return false;
    return true;
}

int smallest_prime_factor(int b) {
    if (b < 2) throw std::invalid_argument("smallest_prime_factor: b must be >= 2");
    for (int p = 2; p * p <= b; ++p)
        if (b % p == 0) return p;
    return b;
}

std::uint64_t checked_pow(std::uint64_t base, unsigned exponent) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exponent; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
            throw std::overflow_error("checked_pow: result exceeds 64 bits");
        r *= base;
    }
    return r;
}

std::uint64_t saturating_pow(std::uint64_t base, unsigned exponent) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exponent; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        r *= base;
    }
    return r;
}

static void check_base(int base) {
    if (base < 2 || base > 255)
        throw std::invalid_argument("base must be in [2, 255]");
}

Digits::Digits(int base, std::size_t length) : base_(base), digits_(length, 0) {
    check_base(base);
}

Digits::Digits(int base, std::vector<digit_t> digits)
    : base_(base), digits_(std::move(digits)) {
    check_base(base);
    for (digit_t d : digits_)
        if (d >= base_) throw std::invalid_argument("digit out of range for base");
}

Digits Digits::from_integer(std::uint64_t k, int base, std::size_t precision) {
    check_base(base);
    if (precision < 1) throw std::invalid_argument("from_integer: precision must be >= 1");
    if (k >= saturating_pow(static_cast<std::uint64_t>(base), static_cast<unsigned>(precision)))
        throw std::invalid_argument("from_integer: k >= b^l; truncate explicitly instead");
    Digits out(base, precision);
    for (std::size_t i = 0; i < precision && k != 0; ++i) {
        out.digits_[i] = static_cast<digit_t>(k % static_cast<std::uint64_t>(base));
        k /= static_cast<std::uint64_t>(base);
    }
    return out;
}

bool Digits::is_zero() const {
    for (digit_t d : digits_)
        if (d != 0) return false;
    return true;
}

std::uint64_t Digits::value() const {
    std::uint64_t v = 0;
    std::uint64_t scale = 1;
    bool scale_valid = true;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        if (digits_[i] != 0) {
            if (!scale_valid)
                throw std::overflow_error("Digits::value: exceeds 64 bits");
            std::uint64_t term = scale * digits_[i];
            if (term / digits_[i] != scale || v > std::numeric_limits<std::uint64_t>::max() - term)
                throw std::overflow_error("Digits::value: exceeds 64 bits");
            v += term;
        }
        if (i + 1 < digits_.size()) {
            if (scale > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(base_))
                scale_valid = false;
            else
                scale *= static_cast<std::uint64_t>(base_);
        }
    }
    return v;
}

Digits Digits::truncated(std::size_t m) const {
    Digits out(base_, m);
    for (std::size_t i = 0; i < m && i < digits_.size(); ++i) out.digits_[i] = digits_[i];
    return out;
}

static void check_same_shape(const Digits& a, const Digits& b) {
    if (a.base() != b.base()) throw std::invalid_argument("digitwise op: base mismatch");
    if (a.size() != b.size()) throw std::invalid_argument("digitwise op: length mismatch");
}

Digits operator+(const Digits& a, const Digits& b) {
    check_same_shape(a, b);
    Digits out(a.base(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<digit_t>((a[i] + b[i]) % a.base());
    return out;
}

Digits operator-(const Digits& a, const Digits& b) {
    check_same_shape(a, b);
    Digits out(a.base(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<digit_t>((a[i] + a.base() - b[i]) % a.base());
    return out;
}

MatrixZb::MatrixZb(int base, std::size_t rows, std::size_t cols)
    : base_(base), rows_(rows), cols_(cols), e_(rows * cols, 0) {
    check_base(base);
}

MatrixZb MatrixZb::identity(int base, std::size_t n) {
    MatrixZb m(base, n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

void MatrixZb::set(std::size_t r, std::size_t c, digit_t v) {
    if (v >= base_) throw std::invalid_argument("MatrixZb::set: entry out of range");
    e_[r * cols_ + c] = v;
}

MatrixZb MatrixZb::transposed() const {
    MatrixZb t(base_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, at(r, c));
    return t;
}

Digits mat_vec(const MatrixZb& g, const Digits& v) {
    if (v.base() != g.base()) throw std::invalid_argument("mat_vec: base mismatch");
    if (v.size() != g.cols()) throw std::invalid_argument("mat_vec: dimension mismatch");
    Digits out(g.base(), g.rows());
    for (std::size_t r = 0; r < g.rows(); ++r) {
        unsigned acc = 0;
        for (std::size_t c = 0; c < g.cols(); ++c) acc += static_cast<unsigned>(g.at(r, c)) * v[c];
        out[r] = static_cast<digit_t>(acc % static_cast<unsigned>(g.base()));
    }
    return out;
}

namespace {

int mod_inverse(int a, int p) {
    // p prime, a in [1, p)
    int r = 1;
    int e = p - 2;
    long long x = a;
    while (e > 0) {
        if (e & 1) r = static_cast<int>((r * x) % p);
        x = (x * x) % p;
        e >>= 1;
    }
    return r;
}

// Reduced row echelon form in place; returns pivot column per pivot row.
std::vector<std::size_t> rref(std::vector<std::vector<int>>& m, int p) {
    std::vector<std::size_t> pivots;
    std::size_t rows = m.size();
    std::size_t cols = rows ? m[0].size() : 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t sel = row;
        while (sel < rows && m[sel][col] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(m[sel], m[row]);
        int inv = mod_inverse(m[row][col], p);
        for (std::size_t c = col; c < cols; ++c) m[row][c] = (m[row][c] * inv) % p;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == row || m[r][col] == 0) continue;
            int f = m[r][col];
            for (std::size_t c = col; c < cols; ++c)
                m[r][c] = ((m[r][c] - f * m[row][c]) % p + p) % p;
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::size_t MatrixZb::rank() const {
    if (!is_prime(base_))
        throw std::invalid_argument("MatrixZb::rank: prime base required");
    std::vector<std::vector<int>> m(rows_, std::vector<int>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m[r][c] = at(r, c);
    return rref(m, base_).size();
}

std::vector<Digits> kernel_basis(const MatrixZb& a) {
    int p = a.base();
    if (!is_prime(p))
        throw std::invalid_argument("kernel_basis: prime base required");
    std::vector<std::vector<int>> m(a.rows(), std::vector<int>(a.cols()));
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m[r][c] = a.at(r, c);
    std::vector<std::size_t> pivots = rref(m, p);

    std::vector<bool> is_pivot(a.cols(), false);
    for (std::size_t c : pivots) is_pivot[c] = true;

    std::vector<Digits> basis;
    for (std::size_t free_col = 0; free_col < a.cols(); ++free_col) {
        if (is_pivot[free_col]) continue;
        Digits v(p, a.cols());
        v[free_col] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            int coeff = m[r][free_col];
            if (coeff != 0) v[pivots[r]] = static_cast<digit_t>((p - coeff) % p);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

MultiIndex::MultiIndex(int base, std::size_t dimension, std::size_t precision)
    : base_(base), precision_(precision) {
    check_base(base);
    coords_.reserve(dimension);
    for (std::size_t j = 0; j < dimension; ++j) coords_.emplace_back(base, precision);
}

MultiIndex::MultiIndex(std::vector<Digits> coords) {
    if (coords.empty()) throw std::invalid_argument("MultiIndex: empty coordinate list");
    base_ = coords[0].base();
    precision_ = coords[0].size();
    for (const Digits& d : coords)
        if (d.base() != base_ || d.size() != precision_)
            throw std::invalid_argument("MultiIndex: coordinates must share base and precision");
    coords_ = std::move(coords);
}

MultiIndex MultiIndex::from_integers(const std::vector<std::uint64_t>& ks, int base,
                                     std::size_t precision) {
    std::vector<Digits> coords;
    coords.reserve(ks.size());
    for (std::uint64_t k : ks) coords.push_back(Digits::from_integer(k, base, precision));
    return MultiIndex(std::move(coords));
}

bool MultiIndex::is_zero() const {
    for (const Digits& d : coords_)
        if (!d.is_zero()) return false;
    return true;
}

std::vector<std::uint64_t> MultiIndex::values() const {
    std::vector<std::uint64_t> out;
    out.reserve(coords_.size());
    for (const Digits& d : coords_) out.push_back(d.value());
    return out;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.dimension() != b.dimension())
        throw std::invalid_argument("MultiIndex op: dimension mismatch");
    std::vector<Digits> coords;
    coords.reserve(a.dimension());
    for (std::size_t j = 0; j < a.dimension(); ++j) coords.push_back(a.coord(j) + b.coord(j));
    return MultiIndex(std::move(coords));
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
    if (a.dimension() != b.dimension())
        throw std::invalid_argument("MultiIndex op: dimension mismatch");
    std::vector<Digits> coords;
    coords.reserve(a.dimension());
    for (std::size_t j = 0; j < a.dimension(); ++j) coords.push_back(a.coord(j) - b.coord(j));
    return MultiIndex(std::move(coords));
}

}  // namespace qmcnets
