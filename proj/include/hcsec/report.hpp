#pragma once

// Campaign output: plot-ready CSV tables (6 significant digits, fixed column
// order, a versioned comment line on top) and a full-precision JSON report
// that reads back into an equal CampaignReport.

#include "hcsec/core.hpp"
#include "hcsec/experiment.hpp"
#include "hcsec/poison.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hcsec {

inline constexpr int report_format_version = 1;

/// printf "%.6g"; NaN prints as "nan".
[[nodiscard]] inline std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace detail {

inline std::string version_line(const std::string& table) {
    return "# hcsec " + table + " v" + std::to_string(report_format_version) + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary};
    if (!out) {
        throw error{"cannot write " + path.string()};
    }
    out << text;
    if (!out) {
        throw error{"write failed for " + path.string()};
    }
}

inline std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        line += (i ? "," : "") + cells[i];
    }
    return line + "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

/// Per-run, per-insertion trace of one strategy. Coordinates are included
/// when the report kept them (dimension up to point_dim_limit).
[[nodiscard]] inline std::string trace_table(const CampaignReport& report, const StrategyResult& res) {
    std::string out = detail::version_line("trace");
    const bool with_points = report.dim <= point_dim_limit;
    std::vector<std::string> head{"run", "seed", "iteration", "objective", "k", "estimate"};
    if (with_points) {
        for (std::size_t j = 0; j < report.dim; ++j) {
            head.push_back("x" + std::to_string(j));
        }
    }
    out += detail::join(head);
    for (std::size_t r = 0; r < res.runs.size(); ++r) {
        const auto& run = res.runs[r];
        for (std::size_t t = 1; t < run.objective.size(); ++t) {
            std::vector<std::string> row{std::to_string(r), std::to_string(run.seed), std::to_string(t),
                                         format_number(run.objective[t]), std::to_string(run.k[t]),
                                         format_number(run.estimate[t - 1])};
            if (with_points) {
                for (double v : run.points[t - 1]) {
                    row.push_back(format_number(v));
                }
            }
            out += detail::join(row);
        }
    }
    return out;
}

/// Mean/std curves: one row per (strategy, insertion), insertions 1..m.
[[nodiscard]] inline std::string curves_table(const std::vector<StrategySummary>& summary) {
    std::string out = detail::version_line("curves");
    out += detail::join({"strategy", "iteration", "objective_mean", "objective_std", "k_mean", "k_std"});
    for (const auto& s : summary) {
        for (std::size_t t = 1; t < s.objective.size(); ++t) {
            out += detail::join({std::string{to_string(s.strategy)}, std::to_string(t),
                                 format_number(s.objective[t].mean), format_number(s.objective[t].std),
                                 format_number(s.k[t].mean), format_number(s.k[t].std)});
        }
    }
    return out;
}

/// Final-level table: objective, k and Split/Merge per strategy.
[[nodiscard]] inline std::string poison_summary_table(const std::vector<StrategySummary>& summary) {
    std::string out = detail::version_line("poison-summary");
    out += detail::join({"strategy", "runs", "objective_mean", "objective_std", "k_mean", "k_std", "split_mean",
                         "split_std", "merge_mean", "merge_std"});
    for (const auto& s : summary) {
        const auto& obj = s.objective.back();
        const auto& k = s.k.back();
        out += detail::join({std::string{to_string(s.strategy)}, std::to_string(s.runs), format_number(obj.mean),
                             format_number(obj.std), format_number(k.mean), format_number(k.std),
                             format_number(s.split.mean), format_number(s.split.std), format_number(s.merge.mean),
                             format_number(s.merge.std)});
    }
    return out;
}

[[nodiscard]] inline std::string sweep_trace_table(const CampaignReport& report) {
    std::string out = detail::version_line("obfuscation-trace");
    out += detail::join({"run", "seed", "d_max", "divergence", "attacker_obj", "defender_obj", "k"});
    for (std::size_t r = 0; r < report.sweep.size(); ++r) {
        const auto& run = report.sweep[r];
        for (std::size_t j = 0; j < report.d_max.size(); ++j) {
            out += detail::join({std::to_string(r), std::to_string(run.seed), format_number(report.d_max[j]),
                                 format_number(run.divergence[j]), format_number(run.attacker[j]),
                                 format_number(run.defender[j]), std::to_string(run.k[j])});
        }
    }
    return out;
}

/// One row per d_max: the three curves of the sweep plot, then their stds.
[[nodiscard]] inline std::string sweep_table(const SweepSummary& s) {
    std::string out = detail::version_line("obfuscation-sweep");
    out += detail::join({"d_max", "attacker_obj", "defender_obj", "k", "attacker_std", "defender_std", "k_std",
                         "max_divergence"});
    for (std::size_t j = 0; j < s.d_max.size(); ++j) {
        out += detail::join({format_number(s.d_max[j]), format_number(s.attacker[j].mean),
                             format_number(s.defender[j].mean), format_number(s.k[j].mean),
                             format_number(s.attacker[j].std), format_number(s.defender[j].std),
                             format_number(s.k[j].std), format_number(s.max_divergence[j])});
    }
    return out;
}

/// Per run: baseline (first grid entry), best attacker objective and where.
[[nodiscard]] inline std::string sweep_summary_table(const CampaignReport& report) {
    std::string out = detail::version_line("obfuscation-summary");
    out += detail::join({"run", "seed", "clean_size", "attack_size", "max_gap", "baseline_obj", "best_obj",
                         "best_d_max", "best_k"});
    for (std::size_t r = 0; r < report.sweep.size(); ++r) {
        const auto& run = report.sweep[r];
        const auto best =
            static_cast<std::size_t>(std::min_element(run.attacker.begin(), run.attacker.end()) - run.attacker.begin());
        out += detail::join({std::to_string(r), std::to_string(run.seed), std::to_string(run.clean_size),
                             std::to_string(run.attack_size), format_number(run.max_gap),
                             format_number(run.attacker.front()), format_number(run.attacker[best]),
                             format_number(report.d_max[best]), std::to_string(run.k[best])});
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline double number_from(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const CampaignReport& report) {
    using nlohmann::json;
    json j;
    j["format"] = "hcsec-report";
    j["version"] = report_format_version;
    j["name"] = report.name;
    j["kind"] = report.kind == CampaignKind::poison ? "poison" : "obfuscation";
    j["seeds"] = report.seeds;
    j["dim"] = report.dim;
    if (report.kind == CampaignKind::poison) {
        json strategies = json::array();
        for (const auto& res : report.strategies) {
            json runs = json::array();
            for (const auto& r : res.runs) {
                json est = json::array();
                for (double v : r.estimate) {
                    est.push_back(detail::number_or_null(v));
                }
                runs.push_back({{"seed", r.seed},
                                {"bandwidth", r.bandwidth},
                                {"objective", r.objective},
                                {"k", r.k},
                                {"estimate", est},
                                {"points", r.points},
                                {"split", r.split_merge.split},
                                {"merge", r.split_merge.merge}});
            }
            strategies.push_back({{"strategy", std::string{to_string(res.strategy)}}, {"runs", runs}});
        }
        j["strategies"] = strategies;
    } else {
        j["d_max"] = report.d_max;
        json runs = json::array();
        for (const auto& r : report.sweep) {
            runs.push_back({{"seed", r.seed},
                            {"clean_size", r.clean_size},
                            {"attack_size", r.attack_size},
                            {"max_gap", r.max_gap},
                            {"divergence", r.divergence},
                            {"attacker", r.attacker},
                            {"defender", r.defender},
                            {"k", r.k}});
        }
        j["runs"] = runs;
    }
    return j;
}

[[nodiscard]] inline CampaignReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "hcsec-report") {
            throw invalid_argument{"not an hcsec report"};
        }
        if (j.at("version").get<int>() != report_format_version) {
            throw invalid_argument{"unsupported report version " + j.at("version").dump()};
        }
        CampaignReport report;
        report.name = j.at("name").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind != "poison" && kind != "obfuscation") {
            throw invalid_argument{"unknown report kind '" + kind + "'"};
        }
        report.kind = kind == "poison" ? CampaignKind::poison : CampaignKind::obfuscation;
        report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        report.dim = j.at("dim").get<std::size_t>();
        if (report.kind == CampaignKind::poison) {
            for (const auto& s : j.at("strategies")) {
                StrategyResult res;
                res.strategy = parse_strategy(s.at("strategy").get<std::string>());
                for (const auto& r : s.at("runs")) {
                    StrategyRun run;
                    run.seed = r.at("seed").get<std::uint64_t>();
                    run.bandwidth = r.at("bandwidth").get<double>();
                    run.objective = r.at("objective").get<std::vector<double>>();
                    run.k = r.at("k").get<std::vector<std::size_t>>();
                    for (const auto& e : r.at("estimate")) {
                        run.estimate.push_back(detail::number_from(e));
                    }
                    run.points = r.at("points").get<std::vector<std::vector<double>>>();
                    run.split_merge = {r.at("split").get<double>(), r.at("merge").get<double>()};
                    res.runs.push_back(std::move(run));
                }
                report.strategies.push_back(std::move(res));
            }
        } else {
            report.d_max = j.at("d_max").get<std::vector<double>>();
            for (const auto& r : j.at("runs")) {
                SweepRun run;
                run.seed = r.at("seed").get<std::uint64_t>();
                run.clean_size = r.at("clean_size").get<std::size_t>();
                run.attack_size = r.at("attack_size").get<std::size_t>();
                run.max_gap = r.at("max_gap").get<double>();
                run.divergence = r.at("divergence").get<std::vector<double>>();
                run.attacker = r.at("attacker").get<std::vector<double>>();
                run.defender = r.at("defender").get<std::vector<double>>();
                run.k = r.at("k").get<std::vector<std::size_t>>();
                report.sweep.push_back(std::move(run));
            }
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw invalid_argument{std::string{"malformed report: "} + e.what()};
    }
}

[[nodiscard]] inline CampaignReport load_report(const std::filesystem::path& path) {
    std::ifstream in{path};
    if (!in) {
        throw load_error{load_error::kind::io, "cannot open " + path.string()};
    }
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_argument{path.string() + ": " + e.what()};
    }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

enum class ReportFormat { csv, json, both };

/// Writes the report into dir and returns the written file names in order.
/// Poisoning: trace_<strategy>.csv, curves.csv, summary.csv. Obfuscation:
/// trace_obfuscation.csv, sweep.csv, summary.csv. JSON: report.json.
inline std::vector<std::string> emit_report(const CampaignReport& report, const std::filesystem::path& dir,
                                            ReportFormat format = ReportFormat::both) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        detail::write_file(dir / name, text);
        written.push_back(name);
    };
    if (format != ReportFormat::json) {
        if (report.kind == CampaignKind::poison) {
            for (const auto& res : report.strategies) {
                put("trace_" + std::string{to_string(res.strategy)} + ".csv", trace_table(report, res));
            }
            const auto summary = summarize_poison(report);
            put("curves.csv", curves_table(summary));
            put("summary.csv", poison_summary_table(summary));
        } else {
            put("trace_obfuscation.csv", sweep_trace_table(report));
            put("sweep.csv", sweep_table(summarize_sweep(report)));
            put("summary.csv", sweep_summary_table(report));
        }
    }
    if (format != ReportFormat::csv) {
        put("report.json", to_json(report).dump(1) + "\n");
    }
    return written;
}

}  // namespace hcsec
