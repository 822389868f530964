#include "catch_amalgamated.hpp"

#include "hcsec/experiment.hpp"
#include "hcsec/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hcsec;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

ExperimentSpec small_poison(std::vector<std::uint64_t> seeds) {
    ExperimentSpec spec;
    spec.name = "small";
    spec.data = BananaSource{12, 0.3, {}};
    spec.initial_cut = FixedK{3};
    spec.k_range = {2, 20};
    PoisonPlan plan;
    plan.m = 3;
    spec.attack = plan;
    spec.seeds = std::move(seeds);
    return spec;
}

ExperimentSpec small_obfuscation(std::vector<std::uint64_t> seeds) {
    ExperimentSpec spec;
    spec.name = "small-obf";
    BlobSpec blobs;
    blobs.n_per_class = 8;
    blobs.classes = 3;
    blobs.dim = 3;
    blobs.separation = 3.0;
    blobs.sigma = 0.1;
    spec.data = BlobSource{blobs};
    spec.initial_cut = FixedK{2};
    spec.k_range = {2, 10};
    ObfuscationPlan plan;
    plan.attack_class = 2;
    plan.target_class = 0;
    plan.d_max = {0.0, 1.0, 10.0};
    plan.reference_cut = FixedK{3};
    spec.attack = plan;
    spec.seeds = std::move(seeds);
    return spec;
}

std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t data_rows(const std::string& table) {
    std::size_t lines = 0;
    for (char c : table) {
        lines += c == '\n' ? 1 : 0;
    }
    return lines - 2;  // version line and header
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hcsec_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("population statistics") {
    CHECK(summarize({3.0}) == Stat{3.0, 0.0});
    const auto s = summarize({1.0, 3.0});
    CHECK(s.mean == 2.0);
    CHECK(s.std == 1.0);
    CHECK_THROWS_AS(summarize({}), invalid_argument);
}

TEST_CASE("a single run summarizes to itself") {
    const auto report = run_campaign(small_poison({4}));
    const auto summary = summarize_poison(report);
    REQUIRE(summary.size() == report.strategies.size());
    for (std::size_t s = 0; s < summary.size(); ++s) {
        const auto& run = report.strategies[s].runs.front();
        CHECK(summary[s].runs == 1);
        REQUIRE(summary[s].objective.size() == 4);
        for (std::size_t t = 0; t < 4; ++t) {
            CHECK(summary[s].objective[t] == Stat{run.objective[t], 0.0});
            CHECK(summary[s].k[t] == Stat{static_cast<double>(run.k[t]), 0.0});
        }
        CHECK(summary[s].split.std == 0.0);
    }
}

TEST_CASE("campaign runs match direct attacks") {
    const auto spec = small_poison({2, 3});
    const auto report = run_campaign(spec);
    CHECK(report.kind == CampaignKind::poison);
    CHECK(report.dim == 2);
    const auto data = build_dataset(spec.data, 3);
    const auto reference = initial_clustering(data.data, spec.initial_cut);
    PoisonConfig cfg;
    cfg.m = 3;
    cfg.k_range = spec.k_range;
    cfg.strategy = Strategy::bridge_soft;
    cfg.seed = derive_seed(3, "attack");
    const auto trace = poison_attack(data.data, reference, cfg);
    const auto& run = report.strategies[4].runs[1];
    REQUIRE(report.strategies[4].strategy == Strategy::bridge_soft);
    CHECK(run.seed == 3);
    CHECK(run.objective.front() == trace.initial_objective);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(run.objective[t + 1] == trace.records[t].objective);
        CHECK(run.k[t + 1] == trace.records[t].k);
        CHECK(run.points[t] == trace.records[t].point);
    }
}

TEST_CASE("aggregation matches recomputation over runs") {
    const auto report = run_campaign(small_poison({1, 2, 3}));
    const auto summary = summarize_poison(report);
    for (std::size_t s = 0; s < summary.size(); ++s) {
        const auto& runs = report.strategies[s].runs;
        const double mean = (runs[0].objective.back() + runs[1].objective.back() + runs[2].objective.back()) / 3.0;
        double var = 0.0;
        for (const auto& r : runs) {
            var += (r.objective.back() - mean) * (r.objective.back() - mean) / 3.0;
        }
        CHECK(summary[s].objective.back().mean == Catch::Approx(mean));
        CHECK(summary[s].objective.back().std == Catch::Approx(std::sqrt(var)).margin(1e-12));
    }
}

TEST_CASE("parallel runs give the same report") {
    const auto spec = small_poison({1, 2, 3});
    CHECK(run_campaign(spec, {3}) == run_campaign(spec, {1}));
}

TEST_CASE("report JSON round trip") {
    const auto poison = run_campaign(small_poison({1, 2}));
    CHECK(report_from_json(to_json(poison)) == poison);
    const auto obf = run_campaign(small_obfuscation({1, 2}));
    CHECK(obf.kind == CampaignKind::obfuscation);
    CHECK(report_from_json(to_json(obf)) == obf);
    CHECK_THROWS_AS(report_from_json(nlohmann::json::object()), invalid_argument);
    CHECK_THROWS_AS(report_from_json(nlohmann::json{{"format", "other"}}), invalid_argument);
}

TEST_CASE("emitted tables have one row per iteration") {
    const auto report = run_campaign(small_poison({1, 2}));
    const auto dir = scratch("tables");
    const auto files = emit_report(report, dir);
    CHECK(files.size() == report.strategies.size() + 3);
    CHECK(data_rows(slurp(dir / "curves.csv")) == 3 * report.strategies.size());
    CHECK(data_rows(slurp(dir / "trace_bridge-hard.csv")) == 3 * 2);
    CHECK(data_rows(slurp(dir / "summary.csv")) == report.strategies.size());
    CHECK(slurp(dir / "curves.csv").rfind("# hcsec curves v1\n", 0) == 0);
    CHECK(load_report(dir / "report.json") == report);
    fs::remove_all(dir);
}

TEST_CASE("reruns emit byte-identical files") {
    for (const auto& spec : {small_poison({5, 6}), small_obfuscation({5, 6})}) {
        const auto a = scratch("rerun_a");
        const auto b = scratch("rerun_b");
        const auto files = emit_report(run_campaign(spec), a);
        REQUIRE(emit_report(run_campaign(spec), b) == files);
        for (const auto& f : files) {
            CHECK(slurp(a / f) == slurp(b / f));
        }
        fs::remove_all(a);
        fs::remove_all(b);
    }
}

TEST_CASE("obfuscation campaign honours the budget") {
    const auto report = run_campaign(small_obfuscation({1, 2, 3}));
    REQUIRE(report.sweep.size() == 3);
    for (const auto& run : report.sweep) {
        CHECK(run.clean_size == 16);
        CHECK(run.attack_size == 8);
        for (std::size_t j = 0; j < report.d_max.size(); ++j) {
            CHECK(run.divergence[j] <= report.d_max[j]);
        }
        CHECK(run.defender.front() == 0.0);
    }
    const auto s = summarize_sweep(report);
    CHECK(s.attacker.size() == 3);
    const auto dir = scratch("obf");
    CHECK(emit_report(report, dir, ReportFormat::csv) ==
          std::vector<std::string>{"trace_obfuscation.csv", "sweep.csv", "summary.csv"});
    CHECK(data_rows(slurp(dir / "sweep.csv")) == 3);
    CHECK(data_rows(slurp(dir / "trace_obfuscation.csv")) == 9);
    fs::remove_all(dir);
}

TEST_CASE("majority cluster of a class") {
    const auto c = Clustering::from_labels(std::vector<int>{0, 0, 1, 1, 1});
    CHECK(majority_cluster(c, {7, 7, 7, 9, 9}, 7) == 0);
    CHECK(majority_cluster(c, {7, 9, 7, 9, 9}, 9) == 1);
    CHECK_THROWS_AS(majority_cluster(c, {7, 7, 7, 7, 7}, 9), invalid_argument);
}

TEST_CASE("spec validation") {
    auto spec = small_poison({});
    CHECK_THROWS_AS(spec.validate(), invalid_argument);
    spec.seeds = {1, 1};
    CHECK_THROWS_AS(spec.validate(), invalid_argument);
    spec.seeds = {1};
    spec.k_range = {5, 2};
    CHECK_THROWS_AS(spec.validate(), invalid_argument);
    spec.k_range = {2, 5};
    spec.attack = PoisonPlan{{}, 3, std::nullopt};
    CHECK_THROWS_AS(spec.validate(), invalid_argument);
    spec.attack = PoisonPlan{{Strategy::random, Strategy::random}, 3, std::nullopt};
    CHECK_THROWS_AS(spec.validate(), invalid_argument);
    spec.attack = PoisonPlan{{Strategy::random}, 3, -1.0};
    CHECK_THROWS_AS(spec.validate(), invalid_argument);

    auto obf = small_obfuscation({1});
    CHECK_NOTHROW(obf.validate());
    std::get<ObfuscationPlan>(obf.attack).target_class = 2;
    CHECK_THROWS_AS(obf.validate(), invalid_argument);
    std::get<ObfuscationPlan>(obf.attack).target_class = 0;
    std::get<ObfuscationPlan>(obf.attack).d_max = {};
    CHECK_THROWS_AS(obf.validate(), invalid_argument);
    std::get<ObfuscationPlan>(obf.attack).d_max = {1.0, -0.5};
    CHECK_THROWS_AS(obf.validate(), invalid_argument);
}

TEST_CASE("a failing run names its seed") {
    ExperimentSpec spec = small_poison({42});
    spec.data = CsvSource{"/nonexistent/data.csv", true, std::nullopt};
    CHECK_THROWS_WITH(run_campaign(spec), ContainsSubstring("seed 42") && ContainsSubstring("cannot open"));
}

TEST_CASE("points are kept only in low dimension") {
    auto spec = small_poison({1});
    BlobSpec blobs;
    blobs.n_per_class = 6;
    blobs.classes = 3;
    blobs.dim = 12;
    spec.data = BlobSource{blobs};
    std::get<PoisonPlan>(spec.attack).strategies = {Strategy::random};
    const auto report = run_campaign(spec);
    CHECK(report.dim == 12);
    CHECK(report.strategies[0].runs[0].points.empty());
    const auto table = trace_table(report, report.strategies[0]);
    CHECK(table.find("x0") == std::string::npos);
    const auto low = run_campaign(small_poison({1}));
    CHECK(trace_table(low, low.strategies[0]).find(",x1") != std::string::npos);
}

TEST_CASE("numbers are formatted compactly") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(1234567.0) == "1.23457e+06");
}
