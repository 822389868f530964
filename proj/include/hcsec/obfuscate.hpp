#pragma once

// Obfuscation attack: move each attack sample toward its nearest member of a
// chosen existing cluster, by at most d_max, so that the tainted data
// clusters like a target partition; the defender answers with the cut that
// stays closest to the clustering of the unmanipulated data.

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"
#include "hcsec/hclust.hpp"
#include "hcsec/metrics.hpp"
#include "hcsec/poison.hpp"

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace hcsec {

/// Rule for the defender's clustering of the unmanipulated data D u A.
using InitialCut = std::variant<FixedK, MinDbi>;

struct ObfuscationConfig {
    double d_max = 0.0;
    /// Cluster id (in the clustering of D) each attack sample should join.
    std::vector<std::size_t> target_cluster_map;
    KRange k_range{};
    InitialCut initial_cut = MinDbi{2, 25};
};

struct ObfuscationResult {
    double d_max = 0.0;
    Matrix manipulated;
    /// max_i ||a_i - a'_i||
    double divergence = 0.0;
    /// dc(C^t, f(D u A'))
    double attacker_objective = 0.0;
    /// dc(C*, f(D u A'))
    double defender_objective = 0.0;
    std::size_t k = 0;
};

/// Target clustering over D u A: D keeps its labels, attack sample i joins
/// cluster map[i].
[[nodiscard]] inline Clustering build_target_clustering(const Clustering& c, std::size_t attack_count,
                                                        const std::vector<std::size_t>& map) {
    if (map.size() != attack_count) {
        throw invalid_argument{"target map covers " + std::to_string(map.size()) + " of " +
                               std::to_string(attack_count) + " attack samples"};
    }
    std::vector<std::size_t> labels = c.labels();
    for (auto target : map) {
        if (target >= c.k()) {
            throw invalid_argument{"target cluster " + std::to_string(target) + " does not exist"};
        }
        labels.push_back(target);
    }
    return Clustering{std::move(labels), c.k()};
}

/// Largest Euclidean displacement between index-aligned samples.
[[nodiscard]] inline double ds_divergence(const Matrix& a, const Matrix& ap) {
    if (a.rows() != ap.rows() || a.cols() != ap.cols()) {
        throw invalid_argument{"sample sets must have equal shapes"};
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        worst = std::max(worst, distance(a.row(i), ap.row(i)));
    }
    return worst;
}

/// Nearest member of D (Euclidean) inside cluster `target`, for each attack sample.
[[nodiscard]] inline std::vector<std::size_t> nearest_target_members(const Dataset& clean, const Clustering& c,
                                                                     const Matrix& attack,
                                                                     const std::vector<std::size_t>& map) {
    if (c.size() != clean.size()) {
        throw invalid_argument{"clustering must cover the clean dataset"};
    }
    if (map.size() != attack.rows()) {
        throw invalid_argument{"target map must cover every attack sample"};
    }
    std::vector<std::size_t> nearest(attack.rows());
    for (std::size_t i = 0; i < attack.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = clean.size();
        for (std::size_t j = 0; j < clean.size(); ++j) {
            if (c[j] != map[i]) {
                continue;
            }
            const double d2 = squared_distance(attack.row(i), clean.point(j));
            if (d2 < best) {
                best = d2;
                arg = j;
            }
        }
        if (arg == clean.size()) {
            throw invalid_argument{"target cluster " + std::to_string(map[i]) + " is empty"};
        }
        nearest[i] = arg;
    }
    return nearest;
}

/// a'_i = a_i + alpha (d_i - a_i), alpha = min(1, d_max / ||d_i - a_i||),
/// with d_i the nearest clean member of the mapped cluster.
[[nodiscard]] inline Matrix obfuscate_samples(const Dataset& clean, const Clustering& c, const Matrix& attack,
                                              const std::vector<std::size_t>& map, double d_max) {
    if (!(d_max >= 0.0)) {
        throw invalid_argument{"d_max must be nonnegative"};
    }
    const auto nearest = nearest_target_members(clean, c, attack, map);
    Matrix out = attack;
    for (std::size_t i = 0; i < attack.rows(); ++i) {
        const auto a = attack.row(i);
        const auto d = clean.point(nearest[i]);
        const double gap = distance(a, d);
        if (gap == 0.0) {
            continue;
        }
        double alpha = std::min(1.0, d_max / gap);
        auto row = out.row(i);
        auto place = [&] {
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = alpha == 1.0 ? d[j] : a[j] + alpha * (d[j] - a[j]);
            }
        };
        place();
        // Rounding can overshoot the budget by an ulp; back off until it holds.
        while (distance(a, row) > d_max && alpha > 0.0) {
            alpha = std::nextafter(alpha, 0.0);
            place();
        }
    }
    return out;
}

namespace detail {

inline Matrix stack(const Matrix& top, const Matrix& bottom) {
    Matrix out = top;
    for (std::size_t i = 0; i < bottom.rows(); ++i) {
        out.append_row(bottom.row(i));
    }
    return out;
}

inline CutCriterion as_criterion(const InitialCut& rule) {
    return std::visit([](const auto& r) -> CutCriterion { return r; }, rule);
}

}  // namespace detail

/// C* = f(D u A) under the initial-cut rule.
[[nodiscard]] inline Clustering unmanipulated_clustering(const Dataset& clean, const Matrix& attack,
                                                         const InitialCut& rule) {
    const Dataset all = clean.concat(Dataset{attack});
    return select_cut(single_linkage(all), detail::as_criterion(rule), &all).clustering;
}

struct DefenderResponse {
    Clustering clustering;
    std::size_t k = 0;
    double objective = 0.0;
};

/// The defender clusters D u A' and keeps the cut closest to C* over all
/// n + |A| points (attack samples aligned by index).
[[nodiscard]] inline DefenderResponse defender_respond(const Dataset& clean, const Matrix& manipulated,
                                                       const Clustering& reference_star, KRange k_range) {
    const Matrix all = detail::stack(clean.points(), manipulated);
    if (reference_star.size() != all.rows()) {
        throw invalid_argument{"C* must cover D u A"};
    }
    const auto range = k_range.clipped(all.rows());
    auto sel = select_cut(single_linkage(all), MinDistanceToReference{reference_star, range.k_min, range.k_max});
    return {std::move(sel.clustering), sel.k, sel.score};
}

[[nodiscard]] inline DefenderResponse defender_respond(const Dataset& clean, const Matrix& attack,
                                                       const Matrix& manipulated, KRange k_range,
                                                       const InitialCut& rule) {
    return defender_respond(clean, manipulated, unmanipulated_clustering(clean, attack, rule), k_range);
}

/// One result per d_max, each computed from the original samples.
[[nodiscard]] inline std::vector<ObfuscationResult> obfuscation_sweep(const Dataset& clean, const Clustering& c,
                                                                      const Matrix& attack,
                                                                      const std::vector<std::size_t>& map,
                                                                      const std::vector<double>& d_max_values,
                                                                      KRange k_range, const InitialCut& rule) {
    const Clustering target = build_target_clustering(c, attack.rows(), map);
    const Clustering reference_star = unmanipulated_clustering(clean, attack, rule);
    std::vector<ObfuscationResult> out;
    out.reserve(d_max_values.size());
    for (double d_max : d_max_values) {
        ObfuscationResult r;
        r.d_max = d_max;
        r.manipulated = obfuscate_samples(clean, c, attack, map, d_max);
        r.divergence = ds_divergence(attack, r.manipulated);
        const auto response = defender_respond(clean, r.manipulated, reference_star, k_range);
        r.defender_objective = response.objective;
        r.k = response.k;
        r.attacker_objective = dc(target, response.clustering);
        out.push_back(std::move(r));
    }
    return out;
}

[[nodiscard]] inline std::vector<ObfuscationResult> obfuscation_sweep(const Dataset& clean, const Clustering& c,
                                                                      const Matrix& attack,
                                                                      const ObfuscationConfig& cfg,
                                                                      const std::vector<double>& d_max_values) {
    return obfuscation_sweep(clean, c, attack, cfg.target_cluster_map, d_max_values, cfg.k_range, cfg.initial_cut);
}

}  // namespace hcsec
