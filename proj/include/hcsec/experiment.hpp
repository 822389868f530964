#pragma once

// Seeded multi-run campaigns. Every run draws its own data from the run seed,
// computes the no-attack clustering, runs each requested attack on that
// shared data, and the report aggregates mean and std across runs.

#include "hcsec/clustering.hpp"
#include "hcsec/core.hpp"
#include "hcsec/dataset.hpp"
#include "hcsec/hclust.hpp"
#include "hcsec/metrics.hpp"
#include "hcsec/obfuscate.hpp"
#include "hcsec/poison.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace hcsec {

struct BananaSource {
    std::size_t n_per_class = 40;
    double noise = 0.3;
    BananaShape shape{};
};

struct BlobSource {
    BlobSpec spec{};
};

struct CsvSource {
    std::string path;
    bool normalize = true;
    /// Uniform subsample drawn per run.
    std::optional<std::size_t> sample;
};

struct IdxSource {
    std::string images;
    std::string labels;
    IdxSelection selection;
};

using DataSource = std::variant<BananaSource, BlobSource, CsvSource, IdxSource>;

struct PoisonPlan {
    std::vector<Strategy> strategies{std::begin(all_strategies), std::end(all_strategies)};
    std::size_t m = 20;
    /// nullopt: mean pairwise distance of each run's data.
    std::optional<double> bandwidth;
};

/// Attack samples are the points of attack_class; the attacker wants them in
/// the cluster holding most points of target_class.
struct ObfuscationPlan {
    int attack_class = 1;
    int target_class = 0;
    std::vector<double> d_max{0.0};
    /// Rule for C* = f(D u A).
    InitialCut reference_cut = MinDbi{2, 25};
};

using AttackPlan = std::variant<PoisonPlan, ObfuscationPlan>;

struct ExperimentSpec {
    std::string name = "campaign";
    DataSource data = BananaSource{};
    /// Rule for the no-attack clustering of D.
    InitialCut initial_cut = FixedK{4};
    KRange k_range{};
    AttackPlan attack = PoisonPlan{};
    /// One run per seed, used verbatim.
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";

    void validate() const {
        if (seeds.empty()) {
            throw invalid_argument{"campaign needs at least one seed"};
        }
        if (std::set<std::uint64_t>{seeds.begin(), seeds.end()}.size() != seeds.size()) {
            throw invalid_argument{"campaign seeds must be distinct"};
        }
        if (k_range.k_min < 1 || k_range.k_min > k_range.k_max) {
            throw invalid_argument{"k range needs 1 <= k_min <= k_max"};
        }
        if (const auto* p = std::get_if<PoisonPlan>(&attack)) {
            if (p->strategies.empty()) {
                throw invalid_argument{"poisoning campaign needs at least one strategy"};
            }
            if (std::set<Strategy>{p->strategies.begin(), p->strategies.end()}.size() != p->strategies.size()) {
                throw invalid_argument{"strategy listed twice"};
            }
            if (p->bandwidth && !(*p->bandwidth > 0.0)) {
                throw invalid_argument{"KDE bandwidth must be positive"};
            }
        } else {
            const auto& o = std::get<ObfuscationPlan>(attack);
            if (o.attack_class == o.target_class) {
                throw invalid_argument{"attack and target classes must differ"};
            }
            if (o.d_max.empty()) {
                throw invalid_argument{"obfuscation sweep needs at least one d_max"};
            }
            for (double d : o.d_max) {
                if (!(d >= 0.0) || !std::isfinite(d)) {
                    throw invalid_argument{"d_max values must be finite and nonnegative"};
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Injected coordinates are kept in reports only up to this dimension.
inline constexpr std::size_t point_dim_limit = 10;

struct StrategyRun {
    std::uint64_t seed = 0;
    double bandwidth = 0.0;
    /// Entry t is the objective after t insertions; entry 0 is the clean state.
    std::vector<double> objective;
    std::vector<std::size_t> k;
    /// Strategy score of each chosen candidate (NaN for Random).
    std::vector<double> estimate;
    std::vector<std::vector<double>> points;
    SplitMerge split_merge;

    friend bool operator==(const StrategyRun& a, const StrategyRun& b) {
        auto same_nan = [](const std::vector<double>& x, const std::vector<double>& y) {
            return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](double p, double q) {
                return p == q || (std::isnan(p) && std::isnan(q));
            });
        };
        return a.seed == b.seed && a.bandwidth == b.bandwidth && a.objective == b.objective && a.k == b.k &&
               same_nan(a.estimate, b.estimate) && a.points == b.points &&
               a.split_merge.split == b.split_merge.split && a.split_merge.merge == b.split_merge.merge;
    }
};

struct StrategyResult {
    Strategy strategy = Strategy::random;
    std::vector<StrategyRun> runs;

    friend bool operator==(const StrategyResult&, const StrategyResult&) = default;
};

struct SweepRun {
    std::uint64_t seed = 0;
    std::size_t clean_size = 0;
    std::size_t attack_size = 0;
    /// max_i ||a_i - d_i||: beyond it every sample reaches its target member.
    double max_gap = 0.0;
    std::vector<double> divergence;
    std::vector<double> attacker;
    std::vector<double> defender;
    std::vector<std::size_t> k;

    friend bool operator==(const SweepRun&, const SweepRun&) = default;
};

enum class CampaignKind { poison, obfuscation };

struct CampaignReport {
    std::string name;
    CampaignKind kind = CampaignKind::poison;
    std::vector<std::uint64_t> seeds;
    std::size_t dim = 0;
    std::vector<StrategyResult> strategies;
    std::vector<double> d_max;
    std::vector<SweepRun> sweep;

    friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Mean and population standard deviation over runs.
struct Stat {
    double mean = 0.0;
    double std = 0.0;

    friend bool operator==(const Stat&, const Stat&) = default;
};

[[nodiscard]] inline Stat summarize(const std::vector<double>& values) {
    if (values.empty()) {
        throw invalid_argument{"cannot summarize zero runs"};
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        sq += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

struct StrategySummary {
    Strategy strategy = Strategy::random;
    std::size_t runs = 0;
    /// Indexed by insertion count, 0..m.
    std::vector<Stat> objective;
    std::vector<Stat> k;
    Stat split;
    Stat merge;
};

[[nodiscard]] inline std::vector<StrategySummary> summarize_poison(const CampaignReport& report) {
    std::vector<StrategySummary> out;
    for (const auto& res : report.strategies) {
        if (res.runs.empty()) {
            throw invalid_argument{"strategy " + std::string{to_string(res.strategy)} + " has no runs"};
        }
        StrategySummary s;
        s.strategy = res.strategy;
        s.runs = res.runs.size();
        const std::size_t steps = res.runs.front().objective.size();
        for (const auto& r : res.runs) {
            if (r.objective.size() != steps || r.k.size() != steps) {
                throw invalid_argument{"runs of one strategy have different lengths"};
            }
        }
        for (std::size_t t = 0; t < steps; ++t) {
            std::vector<double> obj;
            std::vector<double> ks;
            for (const auto& r : res.runs) {
                obj.push_back(r.objective[t]);
                ks.push_back(static_cast<double>(r.k[t]));
            }
            s.objective.push_back(summarize(obj));
            s.k.push_back(summarize(ks));
        }
        std::vector<double> split;
        std::vector<double> merge;
        for (const auto& r : res.runs) {
            split.push_back(r.split_merge.split);
            merge.push_back(r.split_merge.merge);
        }
        s.split = summarize(split);
        s.merge = summarize(merge);
        out.push_back(std::move(s));
    }
    return out;
}

struct SweepSummary {
    std::vector<double> d_max;
    std::vector<Stat> attacker;
    std::vector<Stat> defender;
    std::vector<Stat> k;
    /// Largest achieved divergence over runs, per d_max.
    std::vector<double> max_divergence;
};

[[nodiscard]] inline SweepSummary summarize_sweep(const CampaignReport& report) {
    if (report.sweep.empty()) {
        throw invalid_argument{"obfuscation report has no runs"};
    }
    SweepSummary s;
    s.d_max = report.d_max;
    for (std::size_t j = 0; j < report.d_max.size(); ++j) {
        std::vector<double> att;
        std::vector<double> def;
        std::vector<double> ks;
        double worst = 0.0;
        for (const auto& r : report.sweep) {
            if (r.attacker.size() != report.d_max.size()) {
                throw invalid_argument{"sweep run does not cover the d_max grid"};
            }
            att.push_back(r.attacker[j]);
            def.push_back(r.defender[j]);
            ks.push_back(static_cast<double>(r.k[j]));
            worst = std::max(worst, r.divergence[j]);
        }
        s.attacker.push_back(summarize(att));
        s.defender.push_back(summarize(def));
        s.k.push_back(summarize(ks));
        s.max_divergence.push_back(worst);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Data for one run. Class labels are used here and in reporting only.
[[nodiscard]] inline LabeledDataset build_dataset(const DataSource& source, std::uint64_t seed) {
    return std::visit(
        [&](const auto& src) -> LabeledDataset {
            using Src = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<Src, BananaSource>) {
                return generate_banana(src.n_per_class, src.noise, derive_seed(seed, "data"), src.shape);
            } else if constexpr (std::is_same_v<Src, BlobSource>) {
                return generate_blobs(src.spec, derive_seed(seed, "data"));
            } else if constexpr (std::is_same_v<Src, CsvSource>) {
                LabeledDataset all{load_csv(src.path, src.normalize)};
                return src.sample ? subsample(all, *src.sample, derive_seed(seed, "subsample")) : all;
            } else {
                return load_idx_images(src.images, src.labels, src.selection, derive_seed(seed, "subsample"));
            }
        },
        source);
}

[[nodiscard]] inline Clustering initial_clustering(const Dataset& clean, const InitialCut& rule) {
    return select_cut(single_linkage(clean), detail::as_criterion(rule), &clean).clustering;
}

[[nodiscard]] inline std::vector<StrategyRun> run_poison(const ExperimentSpec& spec, const PoisonPlan& plan,
                                                         const LabeledDataset& data, std::uint64_t seed) {
    const Dataset& clean = data.data;
    const Clustering reference = initial_clustering(clean, spec.initial_cut);
    const IndexSet clean_rows = IndexSet::prefix(clean.size());
    std::vector<StrategyRun> out;
    for (auto strategy : plan.strategies) {
        PoisonConfig cfg;
        cfg.m = plan.m;
        cfg.k_range = spec.k_range;
        cfg.strategy = strategy;
        cfg.kde_bandwidth = plan.bandwidth;
        cfg.seed = derive_seed(seed, "attack");
        const auto trace = poison_attack(clean, reference, cfg);

        StrategyRun run;
        run.seed = seed;
        run.bandwidth = trace.bandwidth;
        run.objective.push_back(trace.initial_objective);
        run.k.push_back(trace.initial_k);
        for (const auto& rec : trace.records) {
            run.objective.push_back(rec.objective);
            run.k.push_back(rec.k);
            run.estimate.push_back(rec.estimate);
            if (clean.dim() <= point_dim_limit) {
                run.points.push_back(rec.point);
            }
        }
        run.split_merge = split_merge(reference, project(trace.defender_clustering, clean_rows));
        out.push_back(std::move(run));
    }
    return out;
}

/// Cluster id of C holding the most points of class `cls` (smallest id on ties).
[[nodiscard]] inline std::size_t majority_cluster(const Clustering& c, const std::vector<int>& labels, int cls) {
    std::vector<std::size_t> votes(c.k(), 0);
    bool any = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (labels[i] == cls) {
            ++votes[c[i]];
            any = true;
        }
    }
    if (!any) {
        throw invalid_argument{"target class " + std::to_string(cls) + " has no clean points"};
    }
    return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

[[nodiscard]] inline SweepRun run_obfuscation(const ExperimentSpec& spec, const ObfuscationPlan& plan,
                                              const LabeledDataset& data, std::uint64_t seed) {
    if (!data.labels) {
        throw invalid_argument{"obfuscation needs a labelled dataset to pick attack samples"};
    }
    const IndexSet attack_rows = data.members_of(plan.attack_class);
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!attack_rows.contains(i)) {
            rest.push_back(i);
        }
    }
    if (attack_rows.empty()) {
        throw invalid_argument{"attack class " + std::to_string(plan.attack_class) + " has no points"};
    }
    const auto clean_part = data.subset(IndexSet{std::move(rest)});
    const Dataset& clean = clean_part.data;
    const Matrix attack = data.data.subset(attack_rows).points();
    const Clustering c = initial_clustering(clean, spec.initial_cut);
    const std::vector<std::size_t> map(attack.rows(), majority_cluster(c, *clean_part.labels, plan.target_class));

    SweepRun run;
    run.seed = seed;
    run.clean_size = clean.size();
    run.attack_size = attack.rows();
    const auto nearest = nearest_target_members(clean, c, attack, map);
    for (std::size_t i = 0; i < attack.rows(); ++i) {
        run.max_gap = std::max(run.max_gap, distance(attack.row(i), clean.point(nearest[i])));
    }
    for (const auto& r : obfuscation_sweep(clean, c, attack, map, plan.d_max, spec.k_range, plan.reference_cut)) {
        run.divergence.push_back(r.divergence);
        run.attacker.push_back(r.attacker_objective);
        run.defender.push_back(r.defender_objective);
        run.k.push_back(r.k);
    }
    return run;
}

struct CampaignOptions {
    /// Worker threads over runs; 1 runs everything on the calling thread.
    unsigned threads = 1;
};

/// Runs every seed (optionally in parallel; results land in seed order) and
/// assembles the report. A failing run aborts with its seed in the message.
[[nodiscard]] inline CampaignReport run_campaign(const ExperimentSpec& spec, CampaignOptions options = {}) {
    spec.validate();
    const std::size_t runs = spec.seeds.size();
    using Outcome = std::variant<std::vector<StrategyRun>, SweepRun>;
    std::vector<std::optional<Outcome>> slots(runs);
    std::vector<std::size_t> dims(runs, 0);
    std::vector<std::exception_ptr> failures(runs);

    auto work = [&](std::size_t i) {
        try {
            const auto data = build_dataset(spec.data, spec.seeds[i]);
            dims[i] = data.data.dim();
            if (const auto* p = std::get_if<PoisonPlan>(&spec.attack)) {
                slots[i] = run_poison(spec, *p, data, spec.seeds[i]);
            } else {
                slots[i] = run_obfuscation(spec, std::get<ObfuscationPlan>(spec.attack), data, spec.seeds[i]);
            }
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };
    const unsigned threads = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(runs)));
    if (threads == 1) {
        for (std::size_t i = 0; i < runs; ++i) {
            work(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < runs; i = next++) {
                    work(i);
                }
            });
        }
    }
    for (std::size_t i = 0; i < runs; ++i) {
        if (failures[i]) {
            try {
                std::rethrow_exception(failures[i]);
            } catch (const std::exception& e) {
                throw error{"run with seed " + std::to_string(spec.seeds[i]) + " failed: " + e.what()};
            }
        }
    }

    CampaignReport report;
    report.name = spec.name;
    report.seeds = spec.seeds;
    report.dim = dims.front();
    if (const auto* p = std::get_if<PoisonPlan>(&spec.attack)) {
        report.kind = CampaignKind::poison;
        for (std::size_t s = 0; s < p->strategies.size(); ++s) {
            StrategyResult res;
            res.strategy = p->strategies[s];
            for (std::size_t i = 0; i < runs; ++i) {
                res.runs.push_back(std::get<0>(*slots[i])[s]);
            }
            report.strategies.push_back(std::move(res));
        }
    } else {
        report.kind = CampaignKind::obfuscation;
        report.d_max = std::get<ObfuscationPlan>(spec.attack).d_max;
        for (std::size_t i = 0; i < runs; ++i) {
            report.sweep.push_back(std::get<1>(*slots[i]));
        }
    }
    return report;
}

}  // namespace hcsec
