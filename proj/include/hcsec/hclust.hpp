#pragma once

// Single-linkage hierarchical clustering built from the Euclidean minimum
// spanning tree, dendrogram cuts, and the defender's cut-selection rules.

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"
#include "hcsec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace hcsec {

/// One agglomeration step. Node ids 0..n-1 are leaves; merge t creates node n+t.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    /// Closest pair across the two merged subtrees (point indices, i < j).
    std::size_t witness_i = 0;
    std::size_t witness_j = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

/// Weighted edge of a spanning tree over point indices, u < v.
struct MstEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 0.0;

    /// Strict total order used for every tie: weight, then (u, v).
    friend bool operator<(const MstEdge& a, const MstEdge& b) {
        return std::tie(a.weight, a.u, a.v) < std::tie(b.weight, b.u, b.v);
    }
    friend bool operator==(const MstEdge&, const MstEdge&) = default;
};

namespace detail {

class UnionFind {
  public:
    explicit UnionFind(std::size_t n)
      : parent_(n)
      , rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns the surviving root, or nullopt when already joined.
    std::optional<std::size_t> unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return std::nullopt;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
        return a;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
};

inline MstEdge make_edge(std::size_t a, std::size_t b, double w) {
    return a < b ? MstEdge{a, b, w} : MstEdge{b, a, w};
}

}  // namespace detail

/// Exact Euclidean MST by Prim's algorithm in O(n^2 d). Ties follow the
/// MstEdge total order, so the tree is unique.
[[nodiscard]] inline std::vector<MstEdge> minimum_spanning_tree(const Matrix& points) {
    const std::size_t n = points.rows();
    std::vector<MstEdge> tree;
    if (n < 2) {
        return tree;
    }
    tree.reserve(n - 1);
    std::vector<bool> in_tree(n, false);
    std::vector<MstEdge> best(n);
    std::vector<bool> has_best(n, false);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        const auto from = points.row(current);
        std::size_t next = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) {
                continue;
            }
            const MstEdge e = detail::make_edge(current, v, distance(from, points.row(v)));
            if (!has_best[v] || e < best[v]) {
                best[v] = e;
                has_best[v] = true;
            }
            if (next == n || best[v] < best[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        tree.push_back(best[next]);
        current = next;
    }
    std::sort(tree.begin(), tree.end());
    return tree;
}

/// MST of points[0..n) given the MST of points[0..n-1): the new tree lies
/// within the old edges plus the edges incident to the last point.
[[nodiscard]] inline std::vector<MstEdge> extend_minimum_spanning_tree(const std::vector<MstEdge>& tree,
                                                                      const Matrix& points) {
    const std::size_t n = points.rows();
    if (n == 0 || tree.size() + 2 != n) {
        throw invalid_argument{"extend_minimum_spanning_tree expects a tree over all but the last point"};
    }
    const std::size_t added = n - 1;
    std::vector<MstEdge> pool = tree;
    pool.reserve(tree.size() + added);
    for (std::size_t i = 0; i < added; ++i) {
        pool.push_back(detail::make_edge(i, added, distance(points.row(i), points.row(added))));
    }
    std::sort(pool.begin(), pool.end());
    detail::UnionFind uf{n};
    std::vector<MstEdge> out;
    out.reserve(n - 1);
    for (const auto& e : pool) {
        if (uf.unite(e.u, e.v)) {
            out.push_back(e);
            if (out.size() + 1 == n) {
                break;
            }
        }
    }
    return out;
}

/// The n-1 merges of a single-linkage agglomeration, in nondecreasing height.
class Dendrogram {
  public:
    Dendrogram() = default;

    /// Validates a merge table: nondecreasing heights, and every node used
    /// as a child exactly once before its creation.
    Dendrogram(std::size_t leaves, std::vector<Merge> merges)
      : leaves_{leaves}
      , merges_{std::move(merges)} {
        if (leaves_ < 1 || merges_.size() + 1 != leaves_) {
            throw invalid_argument{"dendrogram over n leaves needs n-1 merges"};
        }
        std::vector<bool> used(2 * leaves_ - 1, false);
        for (std::size_t t = 0; t < merges_.size(); ++t) {
            const auto& m = merges_[t];
            const std::size_t limit = leaves_ + t;
            if (m.left >= limit || m.right >= limit || m.left == m.right || used[m.left] || used[m.right]) {
                throw invalid_argument{"malformed dendrogram at merge " + std::to_string(t)};
            }
            if (!(m.height >= 0.0) || (t > 0 && m.height < merges_[t - 1].height)) {
                throw invalid_argument{"dendrogram heights must be nonnegative and nondecreasing"};
            }
            if (m.witness_i >= leaves_ || m.witness_j >= leaves_) {
                throw invalid_argument{"dendrogram witness out of range"};
            }
            used[m.left] = used[m.right] = true;
        }
    }

    [[nodiscard]] std::size_t leaves() const noexcept { return leaves_; }
    [[nodiscard]] const std::vector<Merge>& merges() const noexcept { return merges_; }

    [[nodiscard]] std::vector<double> heights() const {
        std::vector<double> h;
        h.reserve(merges_.size());
        for (const auto& m : merges_) {
            h.push_back(m.height);
        }
        return h;
    }

    /// Plain-text merge table: one "left right height witness_i witness_j"
    /// line per merge, preceded by a "leaves <n>" line.
    void write_text(std::ostream& out) const {
        std::ostringstream line;
        line.precision(17);
        out << "leaves " << leaves_ << '\n';
        for (const auto& m : merges_) {
            line.str({});
            line << m.left << ' ' << m.right << ' ' << m.height << ' ' << m.witness_i << ' ' << m.witness_j;
            out << line.str() << '\n';
        }
    }

    static Dendrogram read_text(std::istream& in) {
        std::string tag;
        std::size_t leaves = 0;
        if (!(in >> tag >> leaves) || tag != "leaves") {
            throw invalid_argument{"merge table must start with 'leaves <n>'"};
        }
        std::vector<Merge> merges;
        Merge m;
        while (in >> m.left >> m.right >> m.height >> m.witness_i >> m.witness_j) {
            merges.push_back(m);
        }
        return Dendrogram{leaves, std::move(merges)};
    }

    friend bool operator==(const Dendrogram&, const Dendrogram&) = default;

  private:
    std::size_t leaves_ = 0;
    std::vector<Merge> merges_;
};

/// Builds the dendrogram from spanning-tree edges processed in MstEdge order.
[[nodiscard]] inline Dendrogram dendrogram_from_mst(std::size_t n, std::vector<MstEdge> edges) {
    if (edges.size() + 1 != n) {
        throw invalid_argument{"spanning tree over n points needs n-1 edges"};
    }
    std::sort(edges.begin(), edges.end());
    detail::UnionFind uf{n};
    std::vector<std::size_t> node_of_root(n);
    std::iota(node_of_root.begin(), node_of_root.end(), std::size_t{0});
    std::vector<Merge> merges;
    merges.reserve(n - 1);
    for (const auto& e : edges) {
        const auto ra = uf.find(e.u);
        const auto rb = uf.find(e.v);
        const auto na = node_of_root[ra];
        const auto nb = node_of_root[rb];
        const auto root = uf.unite(ra, rb);
        if (!root) {
            throw invalid_argument{"edge list contains a cycle"};
        }
        node_of_root[*root] = n + merges.size();
        merges.push_back(Merge{std::min(na, nb), std::max(na, nb), e.weight, e.u, e.v});
    }
    return Dendrogram{n, std::move(merges)};
}

[[nodiscard]] inline Dendrogram single_linkage(const Matrix& points) {
    if (points.rows() < 2) {
        throw invalid_argument{"single linkage needs at least two points"};
    }
    return dendrogram_from_mst(points.rows(), minimum_spanning_tree(points));
}

[[nodiscard]] inline Dendrogram single_linkage(const Dataset& ds) { return single_linkage(ds.points()); }

/// Removes the k-1 highest merges; connected leaf groups become clusters,
/// numbered by smallest member index.
[[nodiscard]] inline Clustering cut(const Dendrogram& dend, std::size_t k) {
    const std::size_t n = dend.leaves();
    if (k < 1 || k > n) {
        throw invalid_argument{"cut needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")"};
    }
    detail::UnionFind uf{n};
    for (std::size_t t = 0; t + k < n; ++t) {
        uf.unite(dend.merges()[t].witness_i, dend.merges()[t].witness_j);
    }
    std::vector<std::size_t> roots(n);
    for (std::size_t i = 0; i < n; ++i) {
        roots[i] = uf.find(i);
    }
    return Clustering::from_labels(roots);
}

/// Davies-Bouldin index: mean over clusters of max_{j != i} (s_i + s_j) / m_ij.
/// A pair with coincident centroids contributes +infinity.
[[nodiscard]] inline double davies_bouldin(const Dataset& ds, const Clustering& c) {
    if (c.size() != ds.size()) {
        throw invalid_argument{"clustering and dataset sizes differ"};
    }
    if (c.k() < 2) {
        throw invalid_argument{"Davies-Bouldin index needs at least two clusters"};
    }
    const std::size_t k = c.k();
    const std::size_t d = ds.dim();
    Matrix centroids(k, d, 0.0);
    const auto sizes = c.sizes();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto row = centroids.row(c[i]);
        const auto x = ds.point(i);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] += x[j];
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (double& v : centroids.row(a)) {
            v /= static_cast<double>(sizes[a]);
        }
    }
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        scatter[c[i]] += distance(ds.point(i), centroids.row(c[i]));
    }
    for (std::size_t a = 0; a < k; ++a) {
        scatter[a] /= static_cast<double>(sizes[a]);
    }
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        double worst = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) {
                continue;
            }
            const double sep = distance(centroids.row(a), centroids.row(b));
            const double ratio = sep > 0.0 ? (scatter[a] + scatter[b]) / sep : std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

struct FixedK {
    std::size_t k = 2;
};

/// Defender rule: the cut closest (in dc) to a reference clustering,
/// optionally after restricting the cut to a subset of points.
struct MinDistanceToReference {
    Clustering reference;
    std::size_t k_min = 2;
    std::size_t k_max = 2;
};

struct MinDbi {
    std::size_t k_min = 2;
    std::size_t k_max = 2;
};

using CutCriterion = std::variant<FixedK, MinDistanceToReference, MinDbi>;

struct CutSelection {
    Clustering clustering;
    std::size_t k = 0;
    /// dc for MinDistanceToReference, the index for MinDbi, 0 for FixedK.
    double score = 0.0;
};

namespace detail {

inline void check_range(std::size_t k_min, std::size_t k_max, std::size_t n) {
    if (k_min < 1 || k_min > k_max || k_max > n) {
        throw invalid_argument{"cut range needs 1 <= k_min <= k_max <= n (got [" + std::to_string(k_min) + ", " +
                               std::to_string(k_max) + "], n=" + std::to_string(n) + ")"};
    }
}

}  // namespace detail

/// Squared dc between the reference and every cut k in [k_min, k_max],
/// restricted to `keep`. One pass over the merges: when two components P
/// and Q fuse, the pair-count terms grow by 2|P||Q| and 2 sum_a P_a Q_a,
/// where P_a counts members of P lying in reference cluster a.
/// Entry i of the result corresponds to k = k_min + i.
[[nodiscard]] inline std::vector<std::int64_t> reference_distance_profile(const Dendrogram& dend,
                                                                         const Clustering& reference,
                                                                         const IndexSet& keep, std::size_t k_min,
                                                                         std::size_t k_max) {
    const std::size_t n = dend.leaves();
    detail::check_range(k_min, k_max, n);
    if (keep.size() != reference.size() || !keep.within(n)) {
        throw invalid_argument{"reference clustering covers " + std::to_string(reference.size()) +
                               " points but the restriction has " + std::to_string(keep.size())};
    }
    const std::size_t kr = reference.k();
    // Per-leaf reference label, or kr when the leaf lies outside `keep`.
    std::vector<std::size_t> ref_of(n, kr);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        ref_of[keep[r]] = reference[r];
    }
    std::int64_t ref_sq = 0;
    for (auto s : reference.sizes()) {
        ref_sq += static_cast<std::int64_t>(s) * static_cast<std::int64_t>(s);
    }
    const auto m = static_cast<std::int64_t>(keep.size());
    std::int64_t cut_sq = m;    // sum of squared restricted cluster sizes
    std::int64_t cross_sq = m;  // sum of squared contingency entries

    std::vector<std::vector<std::int64_t>> counts(n);
    std::vector<std::int64_t> restricted_size(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (ref_of[i] < kr) {
            counts[i].assign(kr, 0);
            counts[i][ref_of[i]] = 1;
            restricted_size[i] = 1;
        }
    }
    detail::UnionFind uf{n};
    std::vector<std::int64_t> profile(k_max - k_min + 1, 0);
    auto record = [&](std::size_t k) {
        if (k >= k_min && k <= k_max) {
            profile[k - k_min] = ref_sq + cut_sq - 2 * cross_sq;
        }
    };
    record(n);
    for (std::size_t t = 0; t + k_min < n; ++t) {
        const auto& mg = dend.merges()[t];
        auto ra = uf.find(mg.witness_i);
        auto rb = uf.find(mg.witness_j);
        cut_sq += 2 * restricted_size[ra] * restricted_size[rb];
        if (!counts[ra].empty() && !counts[rb].empty()) {
            for (std::size_t a = 0; a < kr; ++a) {
                cross_sq += 2 * counts[ra][a] * counts[rb][a];
            }
        }
        const auto root = *uf.unite(ra, rb);
        const auto other = root == ra ? rb : ra;
        if (counts[root].empty()) {
            counts[root] = std::move(counts[other]);
        } else if (!counts[other].empty()) {
            for (std::size_t a = 0; a < kr; ++a) {
                counts[root][a] += counts[other][a];
            }
        }
        counts[other] = {};
        restricted_size[root] += restricted_size[other];
        record(n - t - 1);
    }
    return profile;
}

/// Picks the cut by criterion. Ties between equal scores go to the smallest k.
[[nodiscard]] inline CutSelection select_cut(const Dendrogram& dend, const CutCriterion& criterion,
                                             const Dataset* ds = nullptr,
                                             const std::optional<IndexSet>& restrict_to = std::nullopt) {
    const std::size_t n = dend.leaves();
    return std::visit(
        [&](const auto& rule) -> CutSelection {
            using Rule = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<Rule, FixedK>) {
                detail::check_range(rule.k, rule.k, n);
                return {cut(dend, rule.k), rule.k, 0.0};
            } else if constexpr (std::is_same_v<Rule, MinDistanceToReference>) {
                const IndexSet keep = restrict_to ? *restrict_to : IndexSet::prefix(n);
                const auto profile = reference_distance_profile(dend, rule.reference, keep, rule.k_min, rule.k_max);
                const auto best = std::min_element(profile.begin(), profile.end()) - profile.begin();
                const std::size_t k = rule.k_min + static_cast<std::size_t>(best);
                return {cut(dend, k), k, std::sqrt(static_cast<double>(profile[static_cast<std::size_t>(best)]))};
            } else {
                detail::check_range(rule.k_min, rule.k_max, n);
                if (ds == nullptr || ds->size() != n) {
                    throw invalid_argument{"Davies-Bouldin cut selection needs the clustered dataset"};
                }
                if (rule.k_min < 2) {
                    throw invalid_argument{"Davies-Bouldin cut selection needs k_min >= 2"};
                }
                std::optional<CutSelection> best;
                for (std::size_t k = rule.k_min; k <= rule.k_max; ++k) {
                    auto c = cut(dend, k);
                    const double score = davies_bouldin(*ds, c);
                    if (!best || score < best->score) {
                        best = CutSelection{std::move(c), k, score};
                    }
                }
                return *best;
            }
        },
        criterion);
}

}  // namespace hcsec
