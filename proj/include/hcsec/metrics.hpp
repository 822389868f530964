#pragma once

// Clustering comparison: indicator matrices, the co-association distance,
// projection onto a subset of points, and Split/Merge fragmentation measures.

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace hcsec {

/// n x k assignment matrix with rows summing to one. Hard assignments are
/// one-hot rows; soft assignments carry posterior probabilities.
class IndicatorMatrix {
  public:
    static constexpr double row_tolerance = 1e-9;

    IndicatorMatrix() = default;

    /// Validates entries in [0,1] and unit row sums (within row_tolerance),
    /// then renormalizes every row to sum to exactly one.
    explicit IndicatorMatrix(Matrix values)
      : values_{std::move(values)} {
        for (std::size_t i = 0; i < values_.rows(); ++i) {
            double sum = 0.0;
            for (double v : values_.row(i)) {
                if (!(v >= 0.0 && v <= 1.0 + row_tolerance)) {
                    throw invalid_argument{"indicator entry outside [0,1]"};
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > row_tolerance) {
                throw invalid_argument{"indicator row " + std::to_string(i) + " does not sum to one"};
            }
            for (double& v : values_.row(i)) {
                v /= sum;
            }
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return values_.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return values_.cols(); }
    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const { return values_(i, k); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return values_.row(i); }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }

    [[nodiscard]] bool is_hard() const {
        for (double v : values_.data()) {
            if (v != 0.0 && v != 1.0) {
                return false;
            }
        }
        return true;
    }

    /// Row-wise argmax (first maximum wins).
    [[nodiscard]] std::vector<std::size_t> argmax() const {
        std::vector<std::size_t> out(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            const auto r = row(i);
            out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
        }
        return out;
    }

    /// Rows listed in keep, in order.
    [[nodiscard]] IndicatorMatrix restrict_rows(const IndexSet& keep) const {
        if (!keep.within(rows())) {
            throw invalid_argument{"row restriction index out of range"};
        }
        Matrix m(keep.size(), cols());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            std::copy_n(row(keep[r]).begin(), cols(), m.row(r).begin());
        }
        IndicatorMatrix out;
        out.values_ = std::move(m);
        return out;
    }

    friend bool operator==(const IndicatorMatrix&, const IndicatorMatrix&) = default;

  private:
    Matrix values_;
};

/// One-hot encoding of a hard clustering.
[[nodiscard]] inline IndicatorMatrix indicator(const Clustering& c) {
    Matrix m(c.size(), c.k(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        m(i, c[i]) = 1.0;
    }
    return IndicatorMatrix{std::move(m)};
}

namespace detail {

/// Frobenius norm squared of A^T B, computed in O(n * ka * kb).
inline double gram_cross_sq(const IndicatorMatrix& a, const IndicatorMatrix& b) {
    Matrix g(a.cols(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ra = a.row(i);
        const auto rb = b.row(i);
        for (std::size_t p = 0; p < ra.size(); ++p) {
            if (ra[p] == 0.0) {
                continue;
            }
            for (std::size_t q = 0; q < rb.size(); ++q) {
                g(p, q) += ra[p] * rb[q];
            }
        }
    }
    double acc = 0.0;
    for (double v : g.data()) {
        acc += v * v;
    }
    return acc;
}

}  // namespace detail

/// Squared co-association distance ||Y Y^T - Y' Y'^T||_F^2 via the Gram
/// identity ||Y^T Y||^2 + ||Y'^T Y'||^2 - 2 ||Y^T Y'||^2, never forming the
/// n x n matrices.
[[nodiscard]] inline double dc_squared(const IndicatorMatrix& y, const IndicatorMatrix& yp) {
    if (y.rows() != yp.rows()) {
        throw invalid_argument{"dc needs indicator matrices with equal row counts (" + std::to_string(y.rows()) +
                               " vs " + std::to_string(yp.rows()) + ")"};
    }
    const double value =
        detail::gram_cross_sq(y, y) + detail::gram_cross_sq(yp, yp) - 2.0 * detail::gram_cross_sq(y, yp);
    return value > 0.0 ? value : 0.0;
}

[[nodiscard]] inline double dc(const IndicatorMatrix& y, const IndicatorMatrix& yp) {
    return std::sqrt(dc_squared(y, yp));
}

/// Squared co-association distance between hard clusterings from the
/// contingency table; exact integer arithmetic. Equals the number of
/// ordered pairs (i, j) clustered together in exactly one of the two.
[[nodiscard]] inline std::int64_t dc_squared(const Clustering& a, const Clustering& b) {
    if (a.size() != b.size()) {
        throw invalid_argument{"dc needs clusterings over the same number of points"};
    }
    std::vector<std::int64_t> table(a.k() * b.k(), 0);
    std::vector<std::int64_t> size_a(a.k(), 0);
    std::vector<std::int64_t> size_b(b.k(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++table[a[i] * b.k() + b[i]];
        ++size_a[a[i]];
        ++size_b[b[i]];
    }
    std::int64_t acc = 0;
    for (auto s : size_a) {
        acc += s * s;
    }
    for (auto s : size_b) {
        acc += s * s;
    }
    for (auto t : table) {
        acc -= 2 * t * t;
    }
    return acc;
}

[[nodiscard]] inline double dc(const Clustering& a, const Clustering& b) {
    return std::sqrt(static_cast<double>(dc_squared(a, b)));
}

/// Restricts a clustering to the points in keep; clusters left empty vanish
/// and ids are recanonicalized.
[[nodiscard]] inline Clustering project(const Clustering& c, const IndexSet& keep) {
    if (keep.empty()) {
        throw invalid_argument{"projection onto an empty index set"};
    }
    if (!keep.within(c.size())) {
        throw invalid_argument{"projection index out of range"};
    }
    std::vector<std::size_t> labels;
    labels.reserve(keep.size());
    for (auto i : keep) {
        labels.push_back(c[i]);
    }
    return Clustering::from_labels(labels);
}

struct SplitMerge {
    double split = 1.0;
    double merge = 1.0;
};

/// Split: mean number of final clusters touched by each initial cluster.
/// Merge: mean number of initial clusters touched by each final cluster.
[[nodiscard]] inline SplitMerge split_merge(const Clustering& initial, const Clustering& final_clustering) {
    if (initial.size() != final_clustering.size()) {
        throw invalid_argument{"split/merge needs clusterings over the same points"};
    }
    const auto k0 = initial.k();
    const auto k1 = final_clustering.k();
    std::vector<char> co(k0 * k1, 0);
    for (std::size_t i = 0; i < initial.size(); ++i) {
        co[initial[i] * k1 + final_clustering[i]] = 1;
    }
    double ones = 0.0;
    for (char c : co) {
        ones += c;
    }
    // Mean of row sums and mean of column sums share the numerator.
    return {ones / static_cast<double>(k0), ones / static_cast<double>(k1)};
}

}  // namespace hcsec
