#pragma once

// Greedy poisoning of single-linkage clustering. The attacker injects one
// point per iteration inside the data bounding box; after every insertion
// the defender re-selects the cut closest to the no-attack clustering, and
// the attacker's objective is the remaining distance dc(C, pi_D(f(D u A'))).

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"
#include "hcsec/hclust.hpp"
#include "hcsec/kde.hpp"
#include "hcsec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hcsec {

enum class Strategy {
    random,
    random_best,
    bridge_best,
    bridge_hard,
    bridge_soft,
};

inline constexpr Strategy all_strategies[] = {Strategy::random, Strategy::random_best, Strategy::bridge_best,
                                              Strategy::bridge_hard, Strategy::bridge_soft};

[[nodiscard]] inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::random_best: return "random-best";
        case Strategy::bridge_best: return "bridge-best";
        case Strategy::bridge_hard: return "bridge-hard";
        case Strategy::bridge_soft: return "bridge-soft";
    }
    return "unknown";
}

[[nodiscard]] inline Strategy parse_strategy(std::string_view name) {
    for (auto s : all_strategies) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw invalid_argument{"unknown strategy '" + std::string{name} +
                           "' (expected random, random-best, bridge-best, bridge-hard or bridge-soft)"};
}

struct KRange {
    std::size_t k_min = 2;
    std::size_t k_max = 50;

    /// Upper end clipped to the number of points being clustered.
    [[nodiscard]] KRange clipped(std::size_t n) const {
        const KRange r{k_min, std::min(k_max, n)};
        if (r.k_min < 1 || r.k_min > r.k_max) {
            throw invalid_argument{"defender k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                                   "] is empty for " + std::to_string(n) + " points"};
        }
        return r;
    }
};

struct PoisonConfig {
    std::size_t m = 0;
    KRange k_range{};
    Strategy strategy = Strategy::bridge_hard;
    /// nullopt selects the mean pairwise distance of D.
    std::optional<double> kde_bandwidth;
    std::uint64_t seed = 0;
};

/// Where a candidate attack point came from.
struct BridgeOrigin {
    std::size_t merge_index = 0;
    std::size_t cluster_a = 0;
    std::size_t cluster_b = 0;
    /// |a| + |b| over the clustered points.
    std::size_t combined_size = 0;
};

struct Candidate {
    std::vector<double> point;
    std::optional<BridgeOrigin> bridge;
};

/// Midpoints of the witness pairs of the k-1 highest merges (the links the
/// cut at k removes), clamped to the box. Highest merge first.
[[nodiscard]] inline std::vector<Candidate> bridge_candidates(const Dendrogram& dend, const Matrix& points,
                                                              std::size_t k,
                                                              const std::vector<FeatureBounds>& box) {
    const std::size_t n = dend.leaves();
    if (k < 2 || k > n) {
        throw invalid_argument{"bridge candidates need 2 <= k <= n"};
    }
    if (points.rows() != n || box.size() != points.cols()) {
        throw invalid_argument{"bridge candidates: points/box do not match the dendrogram"};
    }
    const Clustering clusters = cut(dend, k);
    const auto sizes = clusters.sizes();
    std::vector<Candidate> out;
    out.reserve(k - 1);
    for (std::size_t t = n - 1; t-- > n - k;) {
        const auto& mg = dend.merges()[t];
        const auto a = points.row(mg.witness_i);
        const auto b = points.row(mg.witness_j);
        Candidate c;
        c.point.resize(points.cols());
        for (std::size_t j = 0; j < points.cols(); ++j) {
            c.point[j] = box[j].clamp(0.5 * (a[j] + b[j]));
        }
        const auto ca = clusters[mg.witness_i];
        const auto cb = clusters[mg.witness_j];
        c.bridge = BridgeOrigin{t, std::min(ca, cb), std::max(ca, cb), sizes[ca] + sizes[cb]};
        out.push_back(std::move(c));
    }
    return out;
}

/// i.i.d. uniform points in the box.
[[nodiscard]] inline std::vector<Candidate> random_candidates(const std::vector<FeatureBounds>& box,
                                                              std::size_t count, Rng& rng) {
    std::vector<Candidate> out(count);
    for (auto& c : out) {
        c.point.resize(box.size());
        for (std::size_t j = 0; j < box.size(); ++j) {
            c.point[j] = box[j].lower == box[j].upper ? box[j].lower : box[j].clamp(rng.uniform(box[j].lower, box[j].upper));
        }
    }
    return out;
}

/// Hard prediction of the effect of a bridge: members of cluster b join
/// cluster a and column b is dropped.
[[nodiscard]] inline IndicatorMatrix predict_merge_hard(const IndicatorMatrix& y, std::size_t a, std::size_t b) {
    if (a == b) {
        throw invalid_argument{"bridge must connect two distinct clusters"};
    }
    if (a >= y.cols() || b >= y.cols()) {
        throw invalid_argument{"bridge cluster id out of range"};
    }
    Matrix out(y.rows(), y.cols() - 1, 0.0);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t c = 0, o = 0; c < y.cols(); ++c) {
            if (c == b) {
                out(i, a < b ? a : a - 1) += y(i, c);
                continue;
            }
            out(i, o++) += y(i, c);
        }
    }
    return IndicatorMatrix{std::move(out)};
}

/// Soft counterpart: the fused column is the sum of the two posterior
/// columns (posterior mass of the union), rows renormalized.
[[nodiscard]] inline IndicatorMatrix predict_merge_soft(const IndicatorMatrix& s, std::size_t a, std::size_t b) {
    return predict_merge_hard(s, a, b);
}

/// Scores cluster fusions against a reference without materializing the
/// fused matrices: with Gram blocks G = S_D^T S_D and X = Y_ref^T S_D over
/// the reference rows, fusing columns a and b merges rows/columns of G and
/// columns of X, so each score costs O(k^2).
class FusionScorer {
  public:
    FusionScorer(const Clustering& reference, const IndicatorMatrix& current, const IndexSet& reference_rows)
      : k_{current.cols()}
      , gram_(current.cols(), current.cols(), 0.0)
      , cross_(reference.k(), current.cols(), 0.0) {
        if (reference_rows.size() != reference.size() || !reference_rows.within(current.rows())) {
            throw invalid_argument{"fusion scorer: reference rows do not match the reference clustering"};
        }
        for (auto s : reference.sizes()) {
            ref_sq_ += static_cast<double>(s) * static_cast<double>(s);
        }
        for (std::size_t r = 0; r < reference_rows.size(); ++r) {
            const auto row = current.row(reference_rows[r]);
            for (std::size_t p = 0; p < k_; ++p) {
                if (row[p] == 0.0) {
                    continue;
                }
                cross_(reference[r], p) += row[p];
                for (std::size_t q = 0; q < k_; ++q) {
                    gram_(p, q) += row[p] * row[q];
                }
            }
        }
    }

    /// dc between the reference and the current assignment with a and b fused.
    [[nodiscard]] double score(std::size_t a, std::size_t b) const {
        if (a == b || a >= k_ || b >= k_) {
            throw invalid_argument{"fusion scorer: invalid cluster pair"};
        }
        auto fold = [&](std::size_t c) { return c == b ? a : c; };
        // Fused Gram: entries accumulate into folded coordinates.
        double gram_sq = 0.0;
        for (std::size_t p = 0; p < k_; ++p) {
            if (p == b) {
                continue;
            }
            for (std::size_t q = 0; q < k_; ++q) {
                if (q == b) {
                    continue;
                }
                double v = gram_(p, q);
                if (p == a) {
                    v += gram_(b, q);
                }
                if (q == a) {
                    v += gram_(p, b);
                }
                if (p == a && q == a) {
                    v += gram_(b, b);
                }
                gram_sq += v * v;
            }
        }
        double cross_sq = 0.0;
        for (std::size_t r = 0; r < cross_.rows(); ++r) {
            for (std::size_t q = 0; q < k_; ++q) {
                if (fold(q) != q) {
                    continue;
                }
                const double v = cross_(r, q) + (q == a ? cross_(r, b) : 0.0);
                cross_sq += v * v;
            }
        }
        const double sq = ref_sq_ + gram_sq - 2.0 * cross_sq;
        return std::sqrt(std::max(sq, 0.0));
    }

  private:
    std::size_t k_;
    Matrix gram_;
    Matrix cross_;
    double ref_sq_ = 0.0;
};

/// Outcome of letting the defender respond to a tainted dataset.
struct TrueEvaluation {
    double objective = 0.0;
    std::size_t k = 0;
};

/// D u A' together with its minimum spanning tree, so that scoring a
/// candidate only extends the tree by one point.
class PoisonState {
  public:
    PoisonState(const Dataset& clean, Clustering reference, KRange k_range)
      : clean_size_{clean.size()}
      , points_{clean.points()}
      , box_{clean.bounds()}
      , reference_{std::move(reference)}
      , k_range_{k_range}
      , keep_{IndexSet::prefix(clean.size())} {
        if (reference_.size() != clean.size()) {
            throw invalid_argument{"reference clustering must cover the clean dataset"};
        }
        if (clean.size() < 2) {
            throw invalid_argument{"poisoning needs at least two clean points"};
        }
        tree_ = minimum_spanning_tree(points_);
        refresh();
    }

    [[nodiscard]] std::size_t clean_size() const noexcept { return clean_size_; }
    [[nodiscard]] std::size_t attack_size() const noexcept { return points_.rows() - clean_size_; }
    [[nodiscard]] const Matrix& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<FeatureBounds>& box() const noexcept { return box_; }
    [[nodiscard]] const Clustering& reference() const noexcept { return reference_; }
    [[nodiscard]] const IndexSet& clean_rows() const noexcept { return keep_; }
    [[nodiscard]] const Dendrogram& dendrogram() const noexcept { return dendrogram_; }
    [[nodiscard]] const CutSelection& defender() const noexcept { return defender_; }

    [[nodiscard]] Matrix attack_points() const {
        Matrix a(attack_size(), points_.cols());
        for (std::size_t i = 0; i < attack_size(); ++i) {
            std::copy_n(points_.row(clean_size_ + i).begin(), points_.cols(), a.row(i).begin());
        }
        return a;
    }

    /// Defender's best achievable distance if `candidate` were added.
    [[nodiscard]] TrueEvaluation evaluate(std::span<const double> candidate) const {
        Matrix extended = points_;
        extended.append_row(candidate);
        const auto tree = extend_minimum_spanning_tree(tree_, extended);
        const auto dend = dendrogram_from_mst(extended.rows(), tree);
        const auto range = k_range_.clipped(extended.rows());
        const auto profile = reference_distance_profile(dend, reference_, keep_, range.k_min, range.k_max);
        const auto best = std::min_element(profile.begin(), profile.end()) - profile.begin();
        return {std::sqrt(static_cast<double>(profile[static_cast<std::size_t>(best)])),
                range.k_min + static_cast<std::size_t>(best)};
    }

    void add(std::span<const double> point) {
        points_.append_row(point);
        tree_ = extend_minimum_spanning_tree(tree_, points_);
        refresh();
    }

  private:
    void refresh() {
        dendrogram_ = dendrogram_from_mst(points_.rows(), tree_);
        const auto range = k_range_.clipped(points_.rows());
        defender_ =
            select_cut(dendrogram_, MinDistanceToReference{reference_, range.k_min, range.k_max}, nullptr, keep_);
    }

    std::size_t clean_size_;
    Matrix points_;
    std::vector<FeatureBounds> box_;
    Clustering reference_;
    KRange k_range_;
    IndexSet keep_;
    std::vector<MstEdge> tree_;
    Dendrogram dendrogram_;
    CutSelection defender_;
};

/// Ground-truth objective: re-clusters D u A' u {candidate} from scratch and
/// lets the defender pick the cut closest to the reference on D.
[[nodiscard]] inline TrueEvaluation evaluate_true(const Dataset& clean, const Matrix& attack,
                                                  std::optional<std::span<const double>> candidate,
                                                  const Clustering& reference, KRange k_range) {
    Matrix all = clean.points();
    for (std::size_t i = 0; i < attack.rows(); ++i) {
        all.append_row(attack.row(i));
    }
    if (candidate) {
        all.append_row(*candidate);
    }
    const auto range = k_range.clipped(all.rows());
    const auto dend = single_linkage(all);
    const auto sel = select_cut(dend, MinDistanceToReference{reference, range.k_min, range.k_max}, nullptr,
                                IndexSet::prefix(clean.size()));
    return {sel.score, sel.k};
}

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    std::vector<double> point;
    /// Recomputed by re-clustering after the insertion.
    double objective = 0.0;
    std::size_t k = 0;
    /// Strategy-internal score of the chosen candidate (NaN for Random).
    double estimate = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> candidate_scores;
    std::size_t chosen = 0;
    bool bridge = false;
    /// Bridge strategy had no cut link (k = 1) and drew a random point.
    bool fallback_random = false;
};

struct AttackTrace {
    Strategy strategy = Strategy::random;
    double bandwidth = 0.0;
    double initial_objective = 0.0;
    std::size_t initial_k = 0;
    std::vector<IterationRecord> records;
    /// Injected points, in insertion order (|A'| x d).
    Matrix attack_points;
    /// The defender's last cut of D u A' (rows of D first).
    Clustering defender_clustering;

    /// The final defender state (objective, k), or the initial one if empty.
    [[nodiscard]] TrueEvaluation final_state() const {
        if (records.empty()) {
            return {initial_objective, initial_k};
        }
        return {records.back().objective, records.back().k};
    }
};

namespace detail {

/// Argmax with ties broken by larger bridged-cluster size, then by the
/// lexicographically smallest candidate point.
inline std::size_t pick_best(const std::vector<Candidate>& cands, const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
            continue;
        }
        if (scores[i] < scores[best]) {
            continue;
        }
        const auto size_i = cands[i].bridge ? cands[i].bridge->combined_size : 0;
        const auto size_b = cands[best].bridge ? cands[best].bridge->combined_size : 0;
        if (size_i != size_b) {
            if (size_i > size_b) {
                best = i;
            }
            continue;
        }
        if (cands[i].point < cands[best].point) {
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Greedy m-step attack. Each iteration reads the defender's current cut of
/// D u A', proposes candidates by strategy, appends the best one, and
/// records the true objective after the defender re-selects its cut.
[[nodiscard]] inline AttackTrace poison_attack(const Dataset& clean, const Clustering& reference,
                                               const PoisonConfig& cfg) {
    PoisonState state{clean, reference, cfg.k_range};
    Rng rng{derive_seed(cfg.seed, "poison-candidates")};
    AttackTrace trace;
    trace.strategy = cfg.strategy;
    trace.initial_objective = state.defender().score;
    trace.initial_k = state.defender().k;
    if (cfg.kde_bandwidth && !(*cfg.kde_bandwidth > 0.0)) {
        throw invalid_argument{"KDE bandwidth must be positive"};
    }
    trace.bandwidth = cfg.kde_bandwidth ? *cfg.kde_bandwidth : auto_bandwidth(clean, cfg.seed);

    for (std::size_t it = 1; it <= cfg.m; ++it) {
        const auto& defender = state.defender();
        const std::size_t k = defender.k;
        IterationRecord rec;
        rec.iteration = it;

        Strategy effective = cfg.strategy;
        const bool bridge_strategy = effective == Strategy::bridge_best || effective == Strategy::bridge_hard ||
                                     effective == Strategy::bridge_soft;
        if (bridge_strategy && k < 2) {
            effective = Strategy::random;
            rec.fallback_random = true;
        }

        std::vector<Candidate> cands;
        std::vector<double> scores;
        switch (effective) {
            case Strategy::random:
                cands = random_candidates(state.box(), 1, rng);
                scores.assign(1, std::numeric_limits<double>::quiet_NaN());
                break;
            case Strategy::random_best:
                cands = random_candidates(state.box(), std::max<std::size_t>(k, 2) - 1, rng);
                for (const auto& c : cands) {
                    scores.push_back(state.evaluate(c.point).objective);
                }
                break;
            case Strategy::bridge_best:
                cands = bridge_candidates(state.dendrogram(), state.points(), k, state.box());
                for (const auto& c : cands) {
                    scores.push_back(state.evaluate(c.point).objective);
                }
                break;
            case Strategy::bridge_hard:
            case Strategy::bridge_soft: {
                cands = bridge_candidates(state.dendrogram(), state.points(), k, state.box());
                const auto assignment = effective == Strategy::bridge_hard
                                            ? indicator(defender.clustering)
                                            : soft_posterior(state.points(), defender.clustering, trace.bandwidth);
                const FusionScorer scorer{state.reference(), assignment, state.clean_rows()};
                for (const auto& c : cands) {
                    scores.push_back(scorer.score(c.bridge->cluster_a, c.bridge->cluster_b));
                }
                break;
            }
        }

        rec.chosen = effective == Strategy::random ? 0 : detail::pick_best(cands, scores);
        rec.candidate_scores = scores;
        rec.estimate = scores[rec.chosen];
        rec.point = cands[rec.chosen].point;
        rec.bridge = cands[rec.chosen].bridge.has_value();

        state.add(rec.point);
        rec.objective = state.defender().score;
        rec.k = state.defender().k;
        trace.records.push_back(std::move(rec));
    }
    trace.attack_points = state.attack_points();
    trace.defender_clustering = state.defender().clustering;
    return trace;
}

}  // namespace hcsec
