#include "qmcnets/nets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qmcnets {

namespace {

void check_shape(int base, std::size_t s, std::size_t l, std::size_t d) {
    if (base < 2 || base > 255)
        throw std::invalid_argument("GeneratingMatrices: base must be in [2, 255]");
    if (s < 1) throw std::invalid_argument("GeneratingMatrices: dimension must be >= 1");
    if (l < 1) throw std::invalid_argument("GeneratingMatrices: precision must be >= 1");
    if (d < 1 || d > l)
        throw std::invalid_argument("GeneratingMatrices: requires 1 <= d <= l");
}

}  // namespace

GeneratingMatrices::GeneratingMatrices(int base, std::size_t s, std::size_t l, std::size_t d)
    : base_(base), s_(s), l_(l), d_(d) {
    check_shape(base, s, l, d);
    g_.reserve(s);
    for (std::size_t j = 0; j < s; ++j) g_.emplace_back(base, l, d);
}

GeneratingMatrices::GeneratingMatrices(int base, std::size_t s, std::size_t l, std::size_t d,
                                       std::vector<MatrixZb> matrices)
    : base_(base), s_(s), l_(l), d_(d), g_(std::move(matrices)) {
    check_shape(base, s, l, d);
    if (g_.size() != s)
        throw std::invalid_argument("GeneratingMatrices: matrix count != dimension");
    for (const MatrixZb& m : g_)
        if (m.base() != base || m.rows() != l || m.cols() != d)
            throw std::invalid_argument("GeneratingMatrices: matrix shape mismatch");
}

GeneratingMatrices GeneratingMatrices::random(int base, std::size_t s, std::size_t l,
                                              std::size_t d, SplitMix64& rng) {
    GeneratingMatrices g(base, s, l, d);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t r = 0; r < l; ++r)
            for (std::size_t c = 0; c < d; ++c)
                g.g_[j].set(r, c, static_cast<digit_t>(rng.below(base)));
    return g;
}

GeneratingMatrices GeneratingMatrices::identity_net(int base, std::size_t s, std::size_t l,
                                                    std::size_t d) {
    GeneratingMatrices g(base, s, l, d);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t c = 0; c < d; ++c) g.g_[j].set(c, c, 1);
    return g;
}

std::uint64_t GeneratingMatrices::point_count() const {
    return checked_pow(static_cast<std::uint64_t>(base_), static_cast<unsigned>(d_));
}

DigitalNet::DigitalNet(const GeneratingMatrices& g) : g_(&g) {
    const std::uint64_t n = g.point_count();
    points_.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        Digits t = Digits::from_integer(k, g.base(), g.log_size());
        std::vector<Digits> coords;
        coords.reserve(g.dimension());
        for (std::size_t j = 0; j < g.dimension(); ++j) coords.push_back(mat_vec(g.matrix(j), t));
        points_.emplace_back(std::move(coords));
    }
}

bool dual_contains(const GeneratingMatrices& g, const MultiIndex& k) {
    if (k.base() != g.base()) throw std::invalid_argument("dual_contains: base mismatch");
    if (k.dimension() != g.dimension())
        throw std::invalid_argument("dual_contains: dimension mismatch");
    const std::size_t l = g.precision();
    const unsigned b = static_cast<unsigned>(g.base());
    for (std::size_t r = 0; r < g.log_size(); ++r) {
        unsigned acc = 0;
        for (std::size_t j = 0; j < g.dimension(); ++j) {
            const Digits& kj = k.coord(j);
            const MatrixZb& gj = g.matrix(j);
            const std::size_t upto = std::min(l, kj.size());
            for (std::size_t i = 0; i < upto; ++i)
                acc += static_cast<unsigned>(kj[i]) * gj.at(i, r);
        }
        if (acc % b != 0) return false;
    }
    return true;
}

double dual_weight_floor(std::size_t l, const WeightSequence& a) {
    return std::max(1.0, a.a(1) + static_cast<double>(l) + 1.0);
}

DualNetView::DualNetView(const GeneratingMatrices& g) : g_(&g) {
    if (!is_prime(g.base()))
        throw std::invalid_argument("DualNetView: prime base required; use SupportSearch or "
                                    "BoxScan enumeration for composite bases");
    const std::size_t l = g.precision();
    const std::size_t s = g.dimension();
    const std::size_t d = g.log_size();
    MatrixZb h(g.base(), d, s * l);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t r = 0; r < d; ++r) h.set(r, j * l + i, g.matrix(j).at(i, r));
    basis_ = kernel_basis(h);
}

std::size_t DualNetView::rank() const {
    return g_->dimension() * g_->precision() - basis_.size();
}

void DualNetView::for_each(const std::function<void(const MultiIndex&)>& f,
                           std::uint64_t walk_cap) const {
    const std::size_t m = basis_.size();
    const int b = g_->base();
    const std::size_t l = g_->precision();
    const std::size_t s = g_->dimension();
    double combos_log2 = static_cast<double>(m) * std::log2(static_cast<double>(b));
    if (combos_log2 > std::log2(static_cast<double>(walk_cap)))
        throw enumeration_cap_error("DualNetView::for_each: kernel walk exceeds cap");

    std::vector<digit_t> flat(s * l, 0);
    std::vector<digit_t> counter(m, 0);
    auto emit = [&] {
        std::vector<Digits> coords;
        coords.reserve(s);
        for (std::size_t j = 0; j < s; ++j) {
            Digits dj(b, l);
            for (std::size_t i = 0; i < l; ++i) dj[i] = flat[j * l + i];
            coords.push_back(std::move(dj));
        }
        f(MultiIndex(std::move(coords)));
    };
    emit();
    if (m == 0) return;
    for (;;) {
        std::size_t t = 0;
        for (;;) {
            const Digits& v = basis_[t];
            for (std::size_t p = 0; p < flat.size(); ++p)
                flat[p] = static_cast<digit_t>((flat[p] + v[p]) % b);
            if (++counter[t] < b) break;
            counter[t] = 0;
            if (++t == m) return;
        }
        emit();
    }
}

namespace {

struct Position {
    double cost;
    std::uint32_t j, i;  // 0-based coordinate and digit index
};

// Depth-first search over digit supports in ascending cost order, keeping the
// dual-net syndrome sum_j G_j^T tr_l(k_j) incrementally. Visits every index
// with modified weight within the cap exactly once.
class SupportSearch {
public:
    SupportSearch(const GeneratingMatrices& g, const WeightSequence& a, double cap,
                  bool strict, std::uint64_t node_cap)
        : g_(g), cap_(cap), strict_(strict), node_cap_(node_cap) {
        tol_ = a.integral_weights(g.dimension()) ? 0.0 : 1e-9;
        const std::size_t l = g.precision();
        for (std::uint32_t j = 0; j < g.dimension(); ++j) {
            double aj = a.a(j + 1);
            for (std::uint32_t i = 0; i < l; ++i) {
                double c = digit_cost(i + 1, aj, true);
                if (!admissible(c)) break;  // non-decreasing in i
                positions_.push_back({c, j, i});
            }
        }
        std::sort(positions_.begin(), positions_.end(),
                  [](const Position& x, const Position& y) { return x.cost < y.cost; });
        syndrome_.assign(g.log_size(), 0);
        digits_.assign(g.dimension() * l, 0);
    }

    /// f(k, weight) on every nonzero dual element found; return false from f
    /// to stop early. Returns false when stopped early.
    bool run(const std::function<bool(const MultiIndex&, double)>& f) {
        f_ = &f;
        scan_ = nullptr;
        nodes_ = 0;
        return dfs(0, 0.0);
    }

    /// f(weight, in_dual) on every nonzero index visited, dual or not.
    void run_scan(const std::function<void(double, bool)>& f) {
        f_ = nullptr;
        scan_ = &f;
        nodes_ = 0;
        dfs(0, 0.0);
    }

private:
    bool admissible(double extra) const {
        return strict_ ? extra < cap_ - tol_ : extra <= cap_ + tol_;
    }

    bool syndrome_zero() const {
        for (unsigned v : syndrome_)
            if (v != 0) return false;
        return true;
    }

    MultiIndex current_index() const {
        const std::size_t l = g_.precision();
        std::vector<Digits> coords;
        coords.reserve(g_.dimension());
        for (std::size_t j = 0; j < g_.dimension(); ++j) {
            Digits dj(g_.base(), l);
            for (std::size_t i = 0; i < l; ++i) dj[i] = digits_[j * l + i];
            coords.push_back(std::move(dj));
        }
        return MultiIndex(std::move(coords));
    }

    bool dfs(std::size_t idx, double w) {
        for (std::size_t t = idx; t < positions_.size(); ++t) {
            const Position& pos = positions_[t];
            if (!admissible(w + pos.cost)) break;
            const MatrixZb& gj = g_.matrix(pos.j);
            const unsigned b = static_cast<unsigned>(g_.base());
            for (unsigned v = 1; v < b; ++v) {
                if (++nodes_ > node_cap_)
                    throw enumeration_cap_error("dual support search exceeds node cap");
                for (std::size_t r = 0; r < g_.log_size(); ++r)
                    syndrome_[r] = (syndrome_[r] + gj.at(pos.i, r)) % b;
                digits_[pos.j * g_.precision() + pos.i] = static_cast<digit_t>(v);
                if (scan_) {
                    (*scan_)(w + pos.cost, syndrome_zero());
                } else if (syndrome_zero()) {
                    if (!(*f_)(current_index(), w + pos.cost)) return false;
                }
                if (!dfs(t + 1, w + pos.cost)) return false;
            }
            // undo the accumulated (b-1) additions of this row
            for (std::size_t r = 0; r < g_.log_size(); ++r)
                syndrome_[r] = (syndrome_[r] + gj.at(pos.i, r)) % b;
            digits_[pos.j * g_.precision() + pos.i] = 0;
        }
        return true;
    }

    const GeneratingMatrices& g_;
    double cap_;
    bool strict_;
    std::uint64_t node_cap_;
    double tol_ = 0.0;
    std::vector<Position> positions_;
    std::vector<unsigned> syndrome_;
    std::vector<digit_t> digits_;
    const std::function<bool(const MultiIndex&, double)>* f_ = nullptr;
    const std::function<void(double, bool)>* scan_ = nullptr;
    std::uint64_t nodes_ = 0;
};

}  // namespace

void enumerate_dual(const GeneratingMatrices& g, double weight_cap, const WeightSequence& a,
                    const std::function<void(const MultiIndex&, double)>& f,
                    DualEnumMode mode, std::uint64_t enum_cap) {
    if (mode == DualEnumMode::Auto) {
        if (is_prime(g.base())) {
            double kdim = static_cast<double>(g.dimension() * g.precision()) -
                          static_cast<double>(g.log_size());
            double walk_log2 = kdim * std::log2(static_cast<double>(g.base()));
            mode = (walk_log2 <= std::log2(static_cast<double>(enum_cap)))
                       ? DualEnumMode::KernelWalk
                       : DualEnumMode::SupportSearch;
        } else {
            mode = DualEnumMode::SupportSearch;
        }
    }
    const double tol = a.integral_weights(g.dimension()) ? 0.0 : 1e-9;
    switch (mode) {
        case DualEnumMode::KernelWalk: {
            DualNetView view(g);
            view.for_each(
                [&](const MultiIndex& k) {
                    if (k.is_zero()) return;
                    double w = dick_weight(k, a, true);
                    if (w <= weight_cap + tol) f(k, w);
                },
                enum_cap);
            return;
        }
        case DualEnumMode::BoxScan: {
            const std::size_t s = g.dimension();
            const std::size_t l = g.precision();
            double box_log2 = static_cast<double>(s * l) * std::log2(g.base());
            if (box_log2 > std::log2(static_cast<double>(enum_cap)))
                throw enumeration_cap_error("enumerate_dual: box scan exceeds cap");
            std::uint64_t per_coord =
                checked_pow(static_cast<std::uint64_t>(g.base()), static_cast<unsigned>(l));
            std::vector<std::uint64_t> ks(s, 0);
            for (;;) {
                std::size_t j = 0;
                while (j < s && ++ks[j] == per_coord) ks[j++] = 0;
                if (j == s) break;
                MultiIndex k = MultiIndex::from_integers(ks, g.base(), l);
                if (!dual_contains(g, k)) continue;
                double w = dick_weight(k, a, true);
                if (w <= weight_cap + tol) f(k, w);
            }
            return;
        }
        case DualEnumMode::SupportSearch: {
            SupportSearch search(g, a, weight_cap, false, enum_cap);
            search.run([&](const MultiIndex& k, double w) {
                f(k, w);
                return true;
            });
            return;
        }
        case DualEnumMode::Auto:
            break;
    }
    throw std::logic_error("enumerate_dual: unreachable");
}

void scan_weighted_box(const GeneratingMatrices& g, const WeightSequence& a,
                       double weight_cap, const std::function<void(double, bool)>& f,
                       std::uint64_t enum_cap) {
    SupportSearch search(g, a, weight_cap, false, enum_cap);
    search.run_scan(f);
}

DualWeightReport min_dual_weight_report(const GeneratingMatrices& g, const WeightSequence& a,
                                        std::uint64_t enum_cap) {
    DualWeightReport rep;
    rep.floor = dual_weight_floor(g.precision(), a);
    rep.delta_in_range = std::numeric_limits<double>::infinity();

    // Iterative deepening: every level enumerates the complete candidate set
    // up to the cap, so the first level with a hit yields the exact minimum.
    double cap = std::min(2.0, rep.floor);
    try {
        for (;;) {
            double best = std::numeric_limits<double>::infinity();
            SupportSearch search(g, a, cap, false, enum_cap);
            search.run([&](const MultiIndex&, double w) {
                best = std::min(best, w);
                return true;
            });
            if (best < std::numeric_limits<double>::infinity()) {
                rep.delta_in_range = best;
                break;
            }
            if (cap >= rep.floor) break;
            cap = std::min(cap * 2.0, rep.floor);
        }
    } catch (const enumeration_cap_error&) {
        // Supports got too wide; fall back to a full kernel walk if possible.
        if (!is_prime(g.base())) throw;
        DualNetView view(g);
        double best = std::numeric_limits<double>::infinity();
        view.for_each(
            [&](const MultiIndex& k) {
                if (k.is_zero()) return;
                best = std::min(best, dick_weight(k, a, true));
            },
            enum_cap);
        rep.delta_in_range = best;
    }
    rep.delta = std::min(rep.delta_in_range, rep.floor);
    return rep;
}

double min_dual_weight(const GeneratingMatrices& g, const WeightSequence& a) {
    return min_dual_weight_report(g, a).delta;
}

bool has_dual_below(const GeneratingMatrices& g, const WeightSequence& a, double m,
                    std::uint64_t enum_cap) {
    SupportSearch search(g, a, m, true, enum_cap);
    bool hit = false;
    search.run([&](const MultiIndex&, double) {
        hit = true;
        return false;
    });
    return hit;
}

void write_matrix_file(std::ostream& os, const GeneratingMatrices& g) {
    os << g.base() << ' ' << g.dimension() << ' ' << g.precision() << ' ' << g.log_size()
       << '\n';
    for (std::size_t j = 0; j < g.dimension(); ++j)
        for (std::size_t r = 0; r < g.precision(); ++r) {
            for (std::size_t c = 0; c < g.log_size(); ++c) {
                if (c) os << ' ';
                os << static_cast<int>(g.matrix(j).at(r, c));
            }
            os << '\n';
        }
}

GeneratingMatrices parse_matrix_file(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        while (std::getline(is, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line())
        throw std::invalid_argument("matrix file line 1: missing header 'b s l d'");
    long b = 0, s = 0, l = 0, d = 0;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> b >> s >> l >> d) || (hs >> extra))
            throw std::invalid_argument("matrix file line " + std::to_string(line_no) +
                                        ": header must be 'b s l d'");
    }
    if (b < 2 || b > 255 || s < 1 || l < 1 || d < 1 || d > l)
        throw std::invalid_argument("matrix file line " + std::to_string(line_no) +
                                    ": invalid header values");

    std::vector<MatrixZb> mats;
    for (long j = 0; j < s; ++j) {
        MatrixZb m(static_cast<int>(b), static_cast<std::size_t>(l),
                   static_cast<std::size_t>(d));
        for (long r = 0; r < l; ++r) {
            if (!next_line())
                throw std::invalid_argument("matrix file line " + std::to_string(line_no + 1) +
                                            ": unexpected end of file");
            std::istringstream rs(line);
            for (long c = 0; c < d; ++c) {
                long v;
                if (!(rs >> v) || v < 0 || v >= b)
                    throw std::invalid_argument("matrix file line " + std::to_string(line_no) +
                                                ": expected " + std::to_string(d) +
                                                " digits in [0, " + std::to_string(b) + ")");
                m.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c),
                      static_cast<digit_t>(v));
            }
            std::string extra;
            if (rs >> extra)
                throw std::invalid_argument("matrix file line " + std::to_string(line_no) +
                                            ": trailing tokens");
        }
        mats.push_back(std::move(m));
    }
    if (next_line())
        throw std::invalid_argument("matrix file line " + std::to_string(line_no) +
                                    ": trailing content");
    return GeneratingMatrices(static_cast<int>(b), static_cast<std::size_t>(s),
                              static_cast<std::size_t>(l), static_cast<std::size_t>(d),
                              std::move(mats));
}

void save_matrix_file(const std::string& path, const GeneratingMatrices& g) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix_file(os, g);
    if (!os.good()) throw std::runtime_error("write failed for '" + path + "'");
}

GeneratingMatrices load_matrix_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return parse_matrix_file(is);
}

}  // namespace qmcnets
