#include "qmcnets/walsh.hpp"

#include <cmath>
#include <numbers>

namespace qmcnets {

PointDigits::PointDigits(int base, std::size_t dimension, std::size_t precision)
    : base_(base), precision_(precision) {
    coords_.reserve(dimension);
    for (std::size_t j = 0; j < dimension; ++j) coords_.emplace_back(base, precision);
}

PointDigits::PointDigits(std::vector<Digits> coords) {
    if (coords.empty()) throw std::invalid_argument("PointDigits: empty coordinate list");
    base_ = coords[0].base();
    precision_ = coords[0].size();
    for (const Digits& d : coords)
        if (d.base() != base_ || d.size() != precision_)
            throw std::invalid_argument("PointDigits: coordinates must share base and precision");
    coords_ = std::move(coords);
}

PointDigits PointDigits::from_reals(const std::vector<double>& x, int base,
                                    std::size_t precision) {
    PointDigits out(base, x.size(), precision);
    for (std::size_t j = 0; j < x.size(); ++j) {
        double v = x[j];
        if (!(v >= 0.0 && v < 1.0))
            throw std::invalid_argument("PointDigits::from_reals: coordinate outside [0,1)");
        for (std::size_t i = 0; i < precision; ++i) {
            v *= base;
            int d = static_cast<int>(v);
            if (d >= base) d = base - 1;  // guard against rounding at cell edges
            out.coords_[j][i] = static_cast<digit_t>(d);
            v -= d;
        }
    }
    return out;
}

double PointDigits::coordinate_value(std::size_t j) const {
    double v = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < precision_; ++i) {
        scale /= base_;
        v += scale * coords_[j][i];
    }
    return v;
}

std::vector<double> PointDigits::values() const {
    std::vector<double> out(dimension());
    for (std::size_t j = 0; j < dimension(); ++j) out[j] = coordinate_value(j);
    return out;
}

std::complex<double> root_of_unity(int base, unsigned exponent) {
    exponent %= static_cast<unsigned>(base);
    if (exponent == 0) return {1.0, 0.0};
    if (base == 2) return {-1.0, 0.0};
    double angle = 2.0 * std::numbers::pi * exponent / base;
    return {std::cos(angle), std::sin(angle)};
}

unsigned walsh_exponent(const WalshIndex& k, const PointDigits& x) {
    if (k.base() != x.base() || k.dimension() != x.dimension() ||
        k.precision() != x.precision())
        throw std::invalid_argument("walsh_exponent: shape mismatch between index and point");
    unsigned acc = 0;
    unsigned b = static_cast<unsigned>(k.base());
    for (std::size_t j = 0; j < k.dimension(); ++j) {
        const Digits& kd = k.coord(j);
        const Digits& xd = x.coord(j);
        for (std::size_t i = 0; i < k.precision(); ++i)
            acc += static_cast<unsigned>(kd[i]) * xd[i];
        acc %= b;
    }
    return acc;
}

std::complex<double> walsh_eval(const WalshIndex& k, const PointDigits& x) {
    return root_of_unity(k.base(), walsh_exponent(k, x));
}

int walsh_eval_sign(const WalshIndex& k, const PointDigits& x) {
    if (k.base() != 2) throw std::invalid_argument("walsh_eval_sign: base 2 only");
    return walsh_exponent(k, x) == 0 ? 1 : -1;
}

namespace {

// Digits of the left endpoint of grid cell m at the given level:
// x = m * b^{-level}, so the fractional digits are the base-b digits of m
// reversed into most-significant-first order.
Digits cell_digits(std::uint64_t m, int base, std::size_t level, std::size_t precision) {
    Digits raw = Digits::from_integer(m, base, level);
    Digits out(base, precision);
    for (std::size_t i = 0; i < level && i < precision; ++i) out[i] = raw[level - 1 - i];
    return out;
}

}  // namespace

std::complex<double> walsh_coefficient(const Integrand& f, const WalshIndex& k,
                                       std::size_t quad_level, std::uint64_t grid_cap) {
    const int b = k.base();
    const std::size_t s = k.dimension();
    if (quad_level < k.precision()) {
        // Digits of k beyond the grid level would be invisible to the grid.
        for (std::size_t j = 0; j < s; ++j)
            for (std::size_t i = quad_level; i < k.precision(); ++i)
                if (k.coord(j)[i] != 0)
                    throw std::invalid_argument(
                        "walsh_coefficient: quad_level too small for the index");
    }
    std::uint64_t per_axis = checked_pow(static_cast<std::uint64_t>(b),
                                         static_cast<unsigned>(quad_level));
    double total_log = static_cast<double>(s) * std::log2(static_cast<double>(per_axis));
    if (total_log > std::log2(static_cast<double>(grid_cap)))
        throw enumeration_cap_error("walsh_coefficient: full grid exceeds cap");

    const std::size_t prec = std::max(quad_level, k.precision());
    WalshIndex kk = k;
    if (prec != k.precision()) {
        std::vector<Digits> coords;
        for (std::size_t j = 0; j < s; ++j) {
            Digits d(b, prec);
            for (std::size_t i = 0; i < k.precision(); ++i) d[i] = k.coord(j)[i];
            coords.push_back(std::move(d));
        }
        kk = WalshIndex(std::move(coords));
    }

    std::vector<std::uint64_t> cell(s, 0);
    std::vector<double> mid(s);
    std::complex<double> acc{0.0, 0.0};
    double inv = 1.0 / static_cast<double>(per_axis);
    for (;;) {
        PointDigits left(b, s, prec);
        for (std::size_t j = 0; j < s; ++j) {
            left.coord(j) = cell_digits(cell[j], b, quad_level, prec);
            mid[j] = (static_cast<double>(cell[j]) + 0.5) * inv;
        }
        acc += f(mid) * std::conj(walsh_eval(kk, left));

        std::size_t j = 0;
        while (j < s && ++cell[j] == per_axis) cell[j++] = 0;
        if (j == s) break;
    }
    for (std::size_t j = 0; j < s; ++j) acc *= inv;
    return acc;
}

std::complex<double> walsh_coefficient_separable(
    const std::vector<std::function<double(double)>>& factors, const WalshIndex& k,
    std::size_t quad_level) {
    if (factors.size() != k.dimension())
        throw std::invalid_argument("walsh_coefficient_separable: factor count mismatch");
    const int b = k.base();
    std::uint64_t per_axis = checked_pow(static_cast<std::uint64_t>(b),
                                         static_cast<unsigned>(quad_level));
    double inv = 1.0 / static_cast<double>(per_axis);
    std::complex<double> result{1.0, 0.0};
    std::size_t prec = std::max(quad_level, k.precision());
    for (std::size_t j = 0; j < k.dimension(); ++j) {
        Digits kj(b, prec);
        for (std::size_t i = 0; i < k.precision(); ++i) kj[i] = k.coord(j)[i];
        for (std::size_t i = quad_level; i < prec; ++i)
            if (kj[i] != 0)
                throw std::invalid_argument(
                    "walsh_coefficient_separable: quad_level too small for the index");
        WalshIndex k1(std::vector<Digits>{kj});
        std::complex<double> acc{0.0, 0.0};
        for (std::uint64_t m = 0; m < per_axis; ++m) {
            PointDigits left(std::vector<Digits>{cell_digits(m, b, quad_level, prec)});
            double midpoint = (static_cast<double>(m) + 0.5) * inv;
            acc += factors[j](midpoint) * std::conj(walsh_eval(k1, left));
        }
        result *= acc * inv;
    }
    return result;
}

}  // namespace qmcnets
