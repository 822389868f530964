// Command-line front end: data generation, clustering, poisoning and
// obfuscation campaigns, and re-aggregation of saved reports.

#include "hcsec/experiment.hpp"
#include "hcsec/report.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct DataOptions {
    std::string dataset = "banana";
    std::size_t n_per_class = 40;
    double noise = 0.3;
    double radius = 1.5;
    std::size_t classes = 3;
    std::size_t dim = 2;
    double separation = 1.0;
    double sigma = 0.1;
    double base = 0.5;
    std::vector<double> clip;
    std::string input;
    bool raw = false;
    std::optional<std::size_t> sample;
    std::string images;
    std::string labels;
    std::vector<int> digits;
    std::size_t preselect = 0;
    std::vector<std::size_t> per_class;
};

struct RunOptions {
    std::uint64_t seed = 1;
    std::size_t runs = 1;
    std::size_t k_min = 2;
    std::size_t k_max = 50;
    std::optional<std::size_t> k;
    bool dbi = false;
    std::size_t dbi_k_max = 25;
    unsigned threads = 1;
    std::string out;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--dataset", d.dataset, "banana, blobs, csv or idx")
        ->check(CLI::IsMember({"banana", "blobs", "csv", "idx"}))
        ->capture_default_str();
    cmd->add_option("--n-per-class", d.n_per_class, "points per class (banana, blobs)")->capture_default_str();
    cmd->add_option("--noise", d.noise, "banana noise std")->capture_default_str();
    cmd->add_option("--radius", d.radius, "banana arc radius")->capture_default_str();
    cmd->add_option("--classes", d.classes, "blob count")->capture_default_str();
    cmd->add_option("--dim", d.dim, "blob dimension")->capture_default_str();
    cmd->add_option("--separation", d.separation, "distance between blob centers")->capture_default_str();
    cmd->add_option("--sigma", d.sigma, "blob std")->capture_default_str();
    cmd->add_option("--base", d.base, "blob base value per feature")->capture_default_str();
    cmd->add_option("--clip", d.clip, "feature domain lo hi for blobs")->expected(2);
    cmd->add_option("--input", d.input, "CSV file (dataset csv)");
    cmd->add_flag("--raw", d.raw, "skip min-max normalization of CSV input");
    cmd->add_option("--sample", d.sample, "uniform subsample of CSV rows per run");
    cmd->add_option("--images", d.images, "IDX image file (dataset idx)");
    cmd->add_option("--labels", d.labels, "IDX label file (dataset idx)");
    cmd->add_option("--digits", d.digits, "classes kept from IDX input");
    cmd->add_option("--preselect", d.preselect, "IDX images per class kept nearest to the class mean");
    cmd->add_option("--per-class", d.per_class, "IDX images sampled per run from each preselection (one count, or one per digit)");
}

void add_run_options(CLI::App* cmd, RunOptions& r, bool campaign) {
    cmd->add_option("--seed", r.seed, "first run seed")->capture_default_str();
    if (campaign) {
        cmd->add_option("--runs", r.runs, "number of runs (seeds seed..seed+runs-1)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--k-min", r.k_min, "smallest cut the defender may pick")->capture_default_str();
        cmd->add_option("--k-max", r.k_max, "largest cut the defender may pick")->capture_default_str();
        cmd->add_option("--threads", r.threads, "parallel runs")->capture_default_str();
    }
    auto* k = cmd->add_option("--k", r.k, "fixed number of clusters for the clean data");
    auto* dbi = cmd->add_flag("--dbi", r.dbi, "cut the clean data at the minimum Davies-Bouldin index");
    cmd->add_option("--dbi-k-max", r.dbi_k_max, "upper k for the Davies-Bouldin search")->capture_default_str();
    k->excludes(dbi);
}

hcsec::DataSource make_source(const DataOptions& d) {
    if (d.dataset != "csv" && (!d.input.empty() || d.sample)) {
        throw hcsec::invalid_argument{"--input/--sample need --dataset csv"};
    }
    if (d.dataset != "idx" && (!d.images.empty() || !d.labels.empty())) {
        throw hcsec::invalid_argument{"--images/--labels need --dataset idx"};
    }
    if (d.dataset == "banana") {
        hcsec::BananaSource s;
        s.n_per_class = d.n_per_class;
        s.noise = d.noise;
        s.shape.radius = d.radius;
        return s;
    }
    if (d.dataset == "blobs") {
        hcsec::BlobSource s;
        s.spec.n_per_class = d.n_per_class;
        s.spec.classes = d.classes;
        s.spec.dim = d.dim;
        s.spec.separation = d.separation;
        s.spec.sigma = d.sigma;
        s.spec.base = d.base;
        if (!d.clip.empty()) {
            s.spec.clip = hcsec::FeatureBounds{d.clip[0], d.clip[1]};
        }
        return s;
    }
    if (d.dataset == "csv") {
        if (d.input.empty()) {
            throw hcsec::invalid_argument{"--dataset csv needs --input"};
        }
        return hcsec::CsvSource{d.input, !d.raw, d.sample};
    }
    if (d.images.empty() || d.labels.empty()) {
        throw hcsec::invalid_argument{"--dataset idx needs --images and --labels"};
    }
    if (d.digits.empty() || d.preselect == 0) {
        throw hcsec::invalid_argument{"--dataset idx needs --digits and --preselect"};
    }
    return hcsec::IdxSource{d.images, d.labels, hcsec::IdxSelection{d.digits, d.preselect, d.per_class}};
}

hcsec::InitialCut make_cut(const RunOptions& r, std::size_t default_k) {
    if (r.dbi) {
        return hcsec::MinDbi{2, r.dbi_k_max};
    }
    return hcsec::FixedK{r.k.value_or(default_k)};
}

std::vector<std::uint64_t> make_seeds(const RunOptions& r) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < r.runs; ++i) {
        seeds.push_back(r.seed + i);
    }
    return seeds;
}

std::optional<double> parse_bandwidth(const std::string& text) {
    if (text == "auto") {
        return std::nullopt;
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(value > 0.0)) {
        throw hcsec::invalid_argument{"--bandwidth takes 'auto' or a positive number, got '" + text + "'"};
    }
    return value;
}

void print_files(const std::string& dir, const std::vector<std::string>& files) {
    for (const auto& f : files) {
        std::cout << "wrote " << (std::filesystem::path{dir} / f).string() << '\n';
    }
}

void print_poison(const hcsec::CampaignReport& report) {
    std::cout << "strategy runs objective k split merge\n";
    for (const auto& s : hcsec::summarize_poison(report)) {
        std::cout << hcsec::to_string(s.strategy) << ' ' << s.runs << ' ' << hcsec::format_number(s.objective.back().mean)
                  << "+-" << hcsec::format_number(s.objective.back().std) << ' '
                  << hcsec::format_number(s.k.back().mean) << ' ' << hcsec::format_number(s.split.mean) << ' '
                  << hcsec::format_number(s.merge.mean) << '\n';
    }
}

void print_sweep(const hcsec::CampaignReport& report) {
    const auto s = hcsec::summarize_sweep(report);
    std::cout << "d_max attacker_obj defender_obj k\n";
    for (std::size_t j = 0; j < s.d_max.size(); ++j) {
        std::cout << hcsec::format_number(s.d_max[j]) << ' ' << hcsec::format_number(s.attacker[j].mean) << ' '
                  << hcsec::format_number(s.defender[j].mean) << ' ' << hcsec::format_number(s.k[j].mean) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Security evaluation of single-linkage clustering under poisoning and obfuscation"};
    app.set_config("--config", "", "INI/TOML file with option values; command-line flags take precedence");
    app.require_subcommand(1);

    // gen-data
    DataOptions gen_data;
    RunOptions gen_run;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-data", "write one run's dataset as CSV (label in the last column)");
    add_data_options(gen, gen_data);
    gen->add_option("--seed", gen_run.seed, "data seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV (stdout when omitted)");

    // cluster
    DataOptions cl_data;
    RunOptions cl_run;
    auto* cl = app.add_subcommand("cluster", "single-linkage dendrogram, cut and Davies-Bouldin index");
    add_data_options(cl, cl_data);
    add_run_options(cl, cl_run, false);
    cl->add_option("--out", cl_run.out, "write the merge table here");

    // poison
    DataOptions po_data;
    RunOptions po_run;
    po_run.out = "out/poison";
    std::vector<std::string> po_strategies;
    std::size_t po_m = 20;
    std::string po_bandwidth = "auto";
    auto* po = app.add_subcommand("poison", "greedy poisoning campaign");
    add_data_options(po, po_data);
    add_run_options(po, po_run, true);
    po->add_option("--strategy", po_strategies,
                   "random, random-best, bridge-best, bridge-hard or bridge-soft (repeatable; default all)");
    po->add_option("--m", po_m, "points injected per run")->capture_default_str();
    po->add_option("--bandwidth", po_bandwidth, "KDE bandwidth for bridge-soft: auto or a value")
        ->capture_default_str();
    po->add_option("--out", po_run.out, "output directory")->capture_default_str();

    // obfuscate
    DataOptions ob_data;
    RunOptions ob_run;
    ob_run.out = "out/obfuscate";
    int ob_attack = 1;
    int ob_target = 0;
    std::vector<double> ob_dmax;
    std::optional<std::size_t> ob_ref_k;
    auto* ob = app.add_subcommand("obfuscate", "obfuscation sweep over d_max");
    add_data_options(ob, ob_data);
    add_run_options(ob, ob_run, true);
    ob->add_option("--attack-class", ob_attack, "class whose samples are obfuscated")->capture_default_str();
    ob->add_option("--target-class", ob_target, "class whose cluster they should join")->capture_default_str();
    ob->add_option("--d-max", ob_dmax, "manipulation budget (repeatable)")->required();
    ob->add_option("--reference-k", ob_ref_k,
                   "fixed k for the clustering of clean plus unmanipulated data (default: Davies-Bouldin)");
    ob->add_option("--out", ob_run.out, "output directory")->capture_default_str();

    // report
    std::string rep_in;
    std::string rep_out;
    auto* rep = app.add_subcommand("report", "re-aggregate a saved report.json into CSV tables");
    rep->add_option("--in", rep_in, "report.json written by poison or obfuscate")->required();
    rep->add_option("--out", rep_out, "output directory (default: next to the input)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "hcsec: error: " << e.what() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (gen->parsed()) {
            const auto data = hcsec::build_dataset(make_source(gen_data), gen_run.seed);
            if (gen_out.empty()) {
                hcsec::write_csv(std::cout, data.data, data.labels);
            } else {
                std::ofstream out{gen_out};
                if (!out) {
                    throw hcsec::error{"cannot write " + gen_out};
                }
                hcsec::write_csv(out, data.data, data.labels);
                std::cout << "wrote " << data.size() << " points to " << gen_out << '\n';
            }
        } else if (cl->parsed()) {
            const auto data = hcsec::build_dataset(make_source(cl_data), cl_run.seed);
            const auto dend = hcsec::single_linkage(data.data);
            const auto sel = hcsec::select_cut(dend, hcsec::detail::as_criterion(make_cut(cl_run, 2)), &data.data);
            std::cout << "points " << data.size() << " dim " << data.data.dim() << '\n';
            std::cout << "k " << sel.k << '\n' << "sizes";
            for (auto s : sel.clustering.sizes()) {
                std::cout << ' ' << s;
            }
            std::cout << '\n';
            if (sel.k >= 2) {
                std::cout << "dbi " << hcsec::format_number(hcsec::davies_bouldin(data.data, sel.clustering)) << '\n';
            }
            if (!cl_run.out.empty()) {
                std::ofstream out{cl_run.out};
                if (!out) {
                    throw hcsec::error{"cannot write " + cl_run.out};
                }
                dend.write_text(out);
                std::cout << "wrote " << cl_run.out << '\n';
            }
        } else if (po->parsed()) {
            hcsec::ExperimentSpec spec;
            spec.name = "poison";
            spec.data = make_source(po_data);
            spec.initial_cut = make_cut(po_run, 4);
            spec.k_range = {po_run.k_min, po_run.k_max};
            spec.seeds = make_seeds(po_run);
            spec.output_dir = po_run.out;
            hcsec::PoisonPlan plan;
            if (!po_strategies.empty()) {
                plan.strategies.clear();
                for (const auto& s : po_strategies) {
                    plan.strategies.push_back(hcsec::parse_strategy(s));
                }
            }
            plan.m = po_m;
            plan.bandwidth = parse_bandwidth(po_bandwidth);
            spec.attack = plan;
            const auto report = hcsec::run_campaign(spec, {po_run.threads});
            print_files(spec.output_dir, hcsec::emit_report(report, spec.output_dir));
            print_poison(report);
        } else if (ob->parsed()) {
            hcsec::ExperimentSpec spec;
            spec.name = "obfuscate";
            spec.data = make_source(ob_data);
            spec.initial_cut = make_cut(ob_run, 2);
            spec.k_range = {ob_run.k_min, ob_run.k_max};
            spec.seeds = make_seeds(ob_run);
            spec.output_dir = ob_run.out;
            hcsec::ObfuscationPlan plan;
            plan.attack_class = ob_attack;
            plan.target_class = ob_target;
            plan.d_max = ob_dmax;
            if (ob_ref_k) {
                plan.reference_cut = hcsec::FixedK{*ob_ref_k};
            }
            spec.attack = plan;
            const auto report = hcsec::run_campaign(spec, {ob_run.threads});
            print_files(spec.output_dir, hcsec::emit_report(report, spec.output_dir));
            print_sweep(report);
        } else if (rep->parsed()) {
            const auto report = hcsec::load_report(rep_in);
            const std::string dir =
                rep_out.empty() ? std::filesystem::path{rep_in}.parent_path().string() : rep_out;
            print_files(dir, hcsec::emit_report(report, dir.empty() ? "." : dir, hcsec::ReportFormat::csv));
            if (report.kind == hcsec::CampaignKind::poison) {
                print_poison(report);
            } else {
                print_sweep(report);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "hcsec: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
