#pragma once

// Soft cluster assignments from a Gaussian kernel density estimate of each
// cluster, and the mean-pairwise-distance bandwidth heuristic.

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"
#include "hcsec/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hcsec {

inline constexpr std::size_t exact_bandwidth_limit = 2000;
inline constexpr std::size_t sampled_bandwidth_pairs = 200000;

/// Mean Euclidean distance over all unordered pairs; above
/// exact_bandwidth_limit points, over a seeded uniform sample of pairs.
[[nodiscard]] inline double auto_bandwidth(const Matrix& points, std::uint64_t seed = 0) {
    const std::size_t n = points.rows();
    if (n < 2) {
        throw invalid_argument{"bandwidth heuristic needs at least two points"};
    }
    double total = 0.0;
    if (n <= exact_bandwidth_limit) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                total += distance(points.row(i), points.row(j));
            }
        }
        return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
    }
    Rng rng{derive_seed(seed, "bandwidth-pairs")};
    for (std::size_t s = 0; s < sampled_bandwidth_pairs; ++s) {
        const auto i = static_cast<std::size_t>(rng.below(n));
        auto j = static_cast<std::size_t>(rng.below(n - 1));
        if (j >= i) {
            ++j;
        }
        total += distance(points.row(i), points.row(j));
    }
    return total / static_cast<double>(sampled_bandwidth_pairs);
}

[[nodiscard]] inline double auto_bandwidth(const Dataset& ds, std::uint64_t seed = 0) {
    return auto_bandwidth(ds.points(), seed);
}

/// Posterior p(c_k | x_i) with prior |c_k|/n and a per-cluster kernel
/// density likelihood (1/|c_k|) sum_{x_j in c_k} exp(-h ||x_i - x_j||^2).
/// The prior cancels the 1/|c_k| factor, so row i is the share of its
/// total kernel mass that falls in each cluster.
///
/// h acts as the kernel sharpness: as h grows every point keeps its own
/// cluster (rows become the hard assignment); as h shrinks all kernels
/// flatten and every row tends to the prior vector.
[[nodiscard]] inline IndicatorMatrix soft_posterior(const Matrix& points, const Clustering& c, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw invalid_argument{"KDE bandwidth must be positive and finite"};
    }
    if (c.size() != points.rows()) {
        throw invalid_argument{"clustering and point counts differ"};
    }
    const std::size_t n = points.rows();
    const std::size_t k = c.k();
    Matrix post(n, k, 0.0);
    // Kernel matrix is symmetric; fill both halves in one pass.
    for (std::size_t i = 0; i < n; ++i) {
        post(i, c[i]) += 1.0;  // self term, exp(0)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double kij = std::exp(-h * squared_distance(points.row(i), points.row(j)));
            post(i, c[j]) += kij;
            post(j, c[i]) += kij;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto row = post.row(i);
        double evidence = 0.0;
        for (double v : row) {
            evidence += v;
        }
        if (!(evidence > 0.0) || !std::isfinite(evidence)) {
            // Documented fallback: the hard assignment.
            std::fill(row.begin(), row.end(), 0.0);
            row[c[i]] = 1.0;
            continue;
        }
        for (double& v : row) {
            v /= evidence;
        }
    }
    return IndicatorMatrix{std::move(post)};
}

[[nodiscard]] inline IndicatorMatrix soft_posterior(const Dataset& ds, const Clustering& c, double h) {
    return soft_posterior(ds.points(), c, h);
}

/// Cluster priors |c_k| / n.
[[nodiscard]] inline std::vector<double> cluster_priors(const Clustering& c) {
    std::vector<double> p;
    for (auto s : c.sizes()) {
        p.push_back(static_cast<double>(s) / static_cast<double>(c.size()));
    }
    return p;
}

}  // namespace hcsec
