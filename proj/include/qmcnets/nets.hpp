#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "qmcnets/basefield.hpp"
#include "qmcnets/rng.hpp"
#include "qmcnets/walsh.hpp"
#include "qmcnets/weights.hpp"

namespace qmcnets {

/// s generating matrices of shape l x d over Z_b; defines a digital net of
/// b^d points at precision l.
class GeneratingMatrices {
public:
    GeneratingMatrices(int base, std::size_t s, std::size_t l, std::size_t d);
    GeneratingMatrices(int base, std::size_t s, std::size_t l, std::size_t d,
                       std::vector<MatrixZb> matrices);

    static GeneratingMatrices random(int base, std::size_t s, std::size_t l, std::size_t d,
                                     SplitMix64& rng);
    /// G_j = identity extended by zero rows (l >= d).
    static GeneratingMatrices identity_net(int base, std::size_t s, std::size_t l,
                                           std::size_t d);

    int base() const { return base_; }
    std::size_t dimension() const { return s_; }
    std::size_t precision() const { return l_; }
    std::size_t log_size() const { return d_; }
    std::uint64_t point_count() const;

    const MatrixZb& matrix(std::size_t j) const { return g_[j]; }  // 0-based
    MatrixZb& matrix(std::size_t j) { return g_[j]; }

    bool operator==(const GeneratingMatrices&) const = default;

private:
    int base_;
    std::size_t s_, l_, d_;
    std::vector<MatrixZb> g_;
};

/// The b^d points of a digital net, in index order k = 0 .. b^d - 1.
/// Kept as a multiset: rank-deficient matrices yield duplicate points.
class DigitalNet {
public:
    explicit DigitalNet(const GeneratingMatrices& g);

    const GeneratingMatrices& generators() const { return *g_; }
    std::size_t size() const { return points_.size(); }
    const PointDigits& point(std::size_t k) const { return points_[k]; }
    std::vector<double> point_values(std::size_t k) const { return points_[k].values(); }

private:
    const GeneratingMatrices* g_;
    std::vector<PointDigits> points_;
};

/// Membership of k in the dual net: G_1^T tr_l(k_1) + ... + G_s^T tr_l(k_s) = 0.
/// Coordinates longer than l are truncated to l digits first.
bool dual_contains(const GeneratingMatrices& g, const MultiIndex& k);

/// Weight floor for indices outside the precision box: any k with some
/// k_j >= b^l has modified Dick weight at least max(1, a_1 + l + 1).
double dual_weight_floor(std::size_t l, const WeightSequence& a);

/// Kernel description of the map k -> sum_j G_j^T tr_l(k_j) over Z_b^{s l};
/// prime bases only.
class DualNetView {
public:
    explicit DualNetView(const GeneratingMatrices& g);

    std::size_t kernel_dimension() const { return basis_.size(); }
    std::size_t rank() const;
    const GeneratingMatrices& generators() const { return *g_; }

    /// Walks all b^kernel_dim dual elements inside the precision box
    /// (including 0). Throws enumeration_cap_error beyond walk_cap.
    void for_each(const std::function<void(const MultiIndex&)>& f,
                  std::uint64_t walk_cap = 20000000ULL) const;

private:
    const GeneratingMatrices* g_;
    std::vector<Digits> basis_;  // vectors of length s*l
};

enum class DualEnumMode {
    Auto,           // kernel walk when prime and small, else support search
    KernelWalk,     // prime base, full b^{kernel_dim} walk
    BoxScan,        // any base, scans all b^{s l} indices
    SupportSearch,  // any base, DFS over low-weight digit supports
};

/// Visits every nonzero dual element k with all k_j < b^l and modified Dick
/// weight <= weight_cap, exactly once, as f(k, weight).
void enumerate_dual(const GeneratingMatrices& g, double weight_cap,
                    const WeightSequence& a,
                    const std::function<void(const MultiIndex&, double)>& f,
                    DualEnumMode mode = DualEnumMode::Auto,
                    std::uint64_t enum_cap = 20000000ULL);

/// Support-search scan over ALL indices of modified weight <= weight_cap in
/// the precision box (not just dual members); f(weight, in_dual) per nonzero
/// index. Lets callers certify remainders of weight-capped dual sums against
/// the exact box mass.
void scan_weighted_box(const GeneratingMatrices& g, const WeightSequence& a,
                       double weight_cap, const std::function<void(double, bool)>& f,
                       std::uint64_t enum_cap = 20000000ULL);

struct DualWeightReport {
    double delta;           // min(delta_in_range, floor): valid for the whole dual
    double delta_in_range;  // +infinity when no nonzero dual element is in the box
    double floor;           // max(1, a_1 + l + 1)
};

DualWeightReport min_dual_weight_report(const GeneratingMatrices& g,
                                        const WeightSequence& a,
                                        std::uint64_t enum_cap = 20000000ULL);

/// Minimal modified Dick weight over the whole dual net (out-of-box region
/// folded in through the floor).
double min_dual_weight(const GeneratingMatrices& g, const WeightSequence& a);

/// True iff some nonzero in-box dual element has weight strictly below m.
bool has_dual_below(const GeneratingMatrices& g, const WeightSequence& a, double m,
                    std::uint64_t enum_cap = 20000000ULL);

/// Text format, bit-exact round trip: header "b s l d", then for each j, l
/// lines of d space-separated digits.
void write_matrix_file(std::ostream& os, const GeneratingMatrices& g);
GeneratingMatrices parse_matrix_file(std::istream& is);
void save_matrix_file(const std::string& path, const GeneratingMatrices& g);
GeneratingMatrices load_matrix_file(const std::string& path);

}  // namespace qmcnets
