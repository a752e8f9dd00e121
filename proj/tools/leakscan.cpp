#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leakscan/corpus.hpp"
#include "leakscan/de.hpp"
#include "leakscan/dedup.hpp"
#include "leakscan/error.hpp"
#include "leakscan/lexer.hpp"
#include "leakscan/metrics.hpp"
#include "leakscan/model.hpp"
#include "leakscan/pipeline.hpp"
#include "leakscan/rng.hpp"
#include "leakscan/splits.hpp"
#include "leakscan/synth.hpp"

using nlohmann::json;

namespace {

using namespace leakscan;

// Loads the stoplist once per command: the built-in list unless the user
// pointed --keywords at a file.
const KeywordSet& resolve_keywords(const std::string& path, KeywordSet& storage) {
    if (path.empty()) return default_keywords();
    storage = load_keywords(path);
    return storage;
}

const Fingerprint& fingerprint_for(const FingerprintMap& fingerprints, const std::string& id) {
    auto it = fingerprints.find(id);
    if (it == fingerprints.end())
        throw ValidationError("no fingerprint for id \"" + id + "\"");
    return it->second;
}

json stats_to_json(const DuplicationStats& stats) {
    return {{"total", stats.total},
            {"unique", {{"count", stats.unique.count}, {"pct", stats.unique.pct}}},
            {"exact", {{"count", stats.exact.count}, {"pct", stats.exact.pct}}},
            {"near", {{"count", stats.near.count}, {"pct", stats.near.pct}}},
            {"r_exact", stats.r_exact},
            {"c_dedup", stats.c_dedup},
            {"secrets_total", stats.secrets_total},
            {"secrets_dedup", stats.secrets_dedup}};
}

json metrics_to_json(const Metrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mcc", m.mcc}};
}

json report_to_json(const MetricsReport& report) {
    json folds = json::array();
    for (const Metrics& m : report.fold_metrics) folds.push_back(metrics_to_json(m));
    return {{"scenario", report.scenario},
            {"folds", std::move(folds)},
            {"mean", metrics_to_json(report.mean)},
            {"stddev", metrics_to_json(report.stddev)},
            {"pooled_cm",
             {{"tp", report.pooled_cm.tp},
              {"fp", report.pooled_cm.fp},
              {"tn", report.pooled_cm.tn},
              {"fn", report.pooled_cm.fn}}},
            {"pooled", metrics_to_json(report.pooled)}};
}

json degradation_to_json(const DegradationReport& report) {
    json rows = json::array();
    for (const DegradationRow& row : report.rows) {
        rows.push_back({{"scenario", row.scenario},
                        {"mcc", row.mcc},
                        {"mcc_drop", row.mcc_drop},
                        {"degradation_pct", row.degradation_pct},
                        {"p_value", row.p_value}});
    }
    return {{"rows", std::move(rows)}};
}

struct IngestOpts {
    std::string in, out;
    uint32_t window = 200;
};

void run_ingest(const IngestOpts& o) {
    const Corpus corpus = ingest(o.in, o.window);
    save_corpus(corpus, o.out);
    size_t secrets = 0;
    for (const Sample& s : corpus.samples) secrets += s.label ? 1 : 0;
    std::cout << "ingested " << corpus.size() << " samples (" << secrets << " secrets) -> "
              << o.out << '\n';
}

struct SynthOpts {
    SynthPlan plan;
    std::string out, truth;
};

void run_synth(const SynthOpts& o) {
    const SynthResult result = generate(o.plan);
    save_corpus(result.corpus, o.out);
    if (!o.truth.empty()) save_truth(result.truth, o.truth);
    std::cout << "generated " << result.corpus.size() << " samples -> " << o.out;
    if (!o.truth.empty()) std::cout << " (truth: " << o.truth << ")";
    std::cout << '\n';
}

struct StatsOpts {
    std::string in, keywords, partition_out, format = "table";
    uint32_t window = 200;
    double t0 = 0.8, t1 = 0.7;
    bool brute_force = false;
};

void run_stats(const StatsOpts& o) {
    const Corpus corpus = ingest(o.in, o.window);
    KeywordSet storage;
    const KeywordSet& keywords = resolve_keywords(o.keywords, storage);
    const FingerprintMap fingerprints = fingerprint_corpus(corpus, keywords);
    const Partition parts = partition(corpus, fingerprints, o.t0, o.t1, o.brute_force);
    if (!o.partition_out.empty()) write_partition_jsonl(parts, o.partition_out);
    const DuplicationStats stats = duplication_stats(parts, corpus);
    if (o.format == "table") {
        std::cout << render_stats_table(stats);
    } else {
        std::cout << stats_to_json(stats).dump(2) << '\n';
    }
}

struct SplitOpts {
    std::string in, out, scenario = "mixed", keywords;
    uint32_t window = 200, folds = 5;
    double t0 = 0.8, t1 = 0.7, val_frac = 0.1;
    uint64_t seed = 0;
    bool brute_force = false;
};

void run_split(const SplitOpts& o) {
    const Corpus corpus = ingest(o.in, o.window);
    const Scenario scenario = scenario_from_string(o.scenario);
    FoldManifest manifest;
    if (scenario == Scenario::Mixed) {
        manifest = build_mixed(corpus, o.folds, o.val_frac, o.seed);
    } else {
        KeywordSet storage;
        const KeywordSet& keywords = resolve_keywords(o.keywords, storage);
        const FingerprintMap fingerprints = fingerprint_corpus(corpus, keywords);
        const Partition parts = partition(corpus, fingerprints, o.t0, o.t1, o.brute_force);
        manifest = scenario == Scenario::Near
                       ? build_near(corpus, parts, o.folds, o.val_frac, o.seed)
                       : build_unique(corpus, parts, o.folds, o.val_frac, o.seed);
    }
    save_manifest(manifest, o.out);
    std::cout << "wrote " << o.out << " (" << manifest.folds.size() << " folds, scenario "
              << to_string(manifest.scenario) << ")\n";
}

struct TrainOpts {
    std::string in, splits, keywords, model_out, predictions;
    uint32_t window = 200;
    int32_t fold = -1; // -1: every fold in the manifest
    uint64_t seed = 0;
    bool tune = false;
    ClassifierParams params;
    uint32_t de_pop = DEConfig{}.population_size;
    uint32_t de_gens = DEConfig{}.generations;
    double de_f = DEConfig{}.mutation_factor;
    double de_cr = DEConfig{}.crossover_rate;
};

std::string model_path_for_fold(const std::string& base, uint32_t fold, bool many) {
    if (!many) return base;
    const std::filesystem::path p(base);
    std::filesystem::path out = p.parent_path() / p.stem();
    return out.string() + "_f" + std::to_string(fold) + p.extension().string();
}

void run_train(const TrainOpts& o) {
    const Corpus corpus = ingest(o.in, o.window);
    KeywordSet storage;
    const KeywordSet& keywords = resolve_keywords(o.keywords, storage);
    const FingerprintMap fingerprints = fingerprint_corpus(corpus, keywords);
    const FoldManifest manifest = load_manifest(o.splits);
    const auto labels = corpus.labels_by_id();
    const std::string scenario_name(to_string(manifest.scenario));

    std::vector<const Fold*> selected;
    for (const Fold& fold : manifest.folds) {
        if (o.fold < 0 || fold.fold_index == static_cast<uint32_t>(o.fold))
            selected.push_back(&fold);
    }
    if (selected.empty())
        throw ValidationError("manifest has no fold " + std::to_string(o.fold));

    std::ofstream pred_out;
    if (!o.predictions.empty()) {
        pred_out.open(o.predictions, std::ios::binary);
        if (!pred_out) throw IoError("cannot write predictions file: " + o.predictions);
    }

    for (const Fold* fold : selected) {
        const auto train_set = gather_labeled(fold->train, fingerprints, labels);
        ClassifierParams params = o.params;
        if (o.tune && !fold->val.empty()) {
            const auto val_set = gather_labeled(fold->val, fingerprints, labels);
            DEConfig de_config;
            de_config.population_size = o.de_pop;
            de_config.generations = o.de_gens;
            de_config.mutation_factor = o.de_f;
            de_config.crossover_rate = o.de_cr;
            de_config.seed = derive_seed(
                o.seed, "de/" + scenario_name + "/" + std::to_string(fold->fold_index));
            const TuneResult tuned = tune_classifier(train_set, val_set, de_config);
            params.smoothing = tuned.params.smoothing;
            params.min_df = tuned.params.min_df;
            std::cout << "fold " << fold->fold_index << ": tuned smoothing=" << params.smoothing
                      << " min_df=" << params.min_df << " (val F1 " << tuned.best_fitness
                      << ")\n";
        }
        const TrainedModel model = train(train_set, params);
        if (!o.model_out.empty())
            save_model(model, model_path_for_fold(o.model_out, fold->fold_index, o.fold < 0));
        size_t predicted_secrets = 0;
        for (const std::string& id : fold->test) {
            const Prediction p = predict(model, fingerprint_for(fingerprints, id));
            predicted_secrets += p.label ? 1 : 0;
            if (pred_out.is_open()) {
                pred_out << json{{"id", id}, {"label", p.label}, {"score", p.score}}.dump()
                         << '\n';
            }
        }
        std::cout << "fold " << fold->fold_index << ": trained on " << fold->train.size()
                  << ", flagged " << predicted_secrets << "/" << fold->test.size()
                  << " test samples\n";
    }
    if (pred_out.is_open()) {
        pred_out.close();
        if (!pred_out) throw IoError("failed writing predictions file: " + o.predictions);
    }
}

struct EvaluateOpts {
    std::string in, splits, predictions, out, format = "table";
    uint32_t window = 200;
};

void run_evaluate(const EvaluateOpts& o) {
    const Corpus corpus = ingest(o.in, o.window);
    const FoldManifest manifest = load_manifest(o.splits);
    const auto labels = corpus.labels_by_id();

    std::ifstream in(o.predictions, std::ios::binary);
    if (!in) throw IoError("cannot open predictions file: " + o.predictions);
    std::unordered_map<std::string, bool> predictions;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json record = json::parse(line);
            predictions[record.at("id").get<std::string>()] = record.at("label").get<bool>();
        } catch (const json::exception& e) {
            throw ValidationError(o.predictions + ":" + std::to_string(line_no) +
                                  ": bad prediction record: " + e.what());
        }
    }

    std::vector<ConfusionMatrix> fold_cms;
    for (const Fold& fold : manifest.folds) {
        std::vector<bool> truth, predicted;
        for (const std::string& id : fold.test) {
            auto lit = labels.find(id);
            if (lit == labels.end()) throw ValidationError("no label for id \"" + id + "\"");
            auto pit = predictions.find(id);
            if (pit == predictions.end())
                throw ValidationError("no prediction for id \"" + id + "\" (fold " +
                                      std::to_string(fold.fold_index) + ")");
            truth.push_back(lit->second);
            predicted.push_back(pit->second);
        }
        fold_cms.push_back(confusion(truth, predicted));
    }
    const MetricsReport report =
        summarize_folds(std::string(to_string(manifest.scenario)), fold_cms);
    if (!o.out.empty()) {
        std::ofstream report_out(o.out, std::ios::binary);
        if (!report_out) throw IoError("cannot write report file: " + o.out);
        report_out << report_to_json(report).dump(2) << '\n';
    }
    if (o.format == "table") {
        std::cout << render_metrics_table(report);
    } else {
        std::cout << report_to_json(report).dump(2) << '\n';
    }
}

struct PipelineOpts {
    RunConfig config;
    std::vector<std::string> scenarios = {"mixed", "near", "unique"};
    std::string format = "table";
};

void run_pipeline_cmd(PipelineOpts& o) {
    o.config.scenarios.clear();
    for (const std::string& name : o.scenarios)
        o.config.scenarios.push_back(scenario_from_string(name));
    const PipelineResult result = run_pipeline(o.config);
    if (o.format == "table") {
        for (const MetricsReport& report : result.reports)
            std::cout << render_metrics_table(report) << '\n';
        std::cout << render_degradation_table(result.degradation);
        std::cout << "manifest: " << result.manifest_path << '\n';
    } else {
        json scenarios = json::array();
        for (const MetricsReport& report : result.reports)
            scenarios.push_back(report_to_json(report));
        std::cout << json{{"scenarios", std::move(scenarios)},
                          {"degradation", degradation_to_json(result.degradation)},
                          {"manifest", result.manifest_path}}
                         .dump(2)
                  << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus duplication audit and leakage-controlled evaluation"};
    app.require_subcommand(1);

    IngestOpts ingest_opts;
    CLI::App* cmd = app.add_subcommand("ingest", "validate a corpus and write its canonical form");
    cmd->add_option("--in,-i", ingest_opts.in, "input corpus (JSONL)")->required();
    cmd->add_option("--out,-o", ingest_opts.out, "output corpus (JSONL)")->required();
    cmd->add_option("--window", ingest_opts.window, "context half-width in scalars");
    cmd->callback([&] { run_ingest(ingest_opts); });

    SynthOpts synth_opts;
    cmd = app.add_subcommand("synth", "generate a corpus with a controlled duplication profile");
    cmd->add_option("--n", synth_opts.plan.n_total, "number of samples")->required();
    cmd->add_option("--seed", synth_opts.plan.seed, "generator seed");
    cmd->add_option("--frac-exact", synth_opts.plan.frac_exact, "exact-duplicate fraction");
    cmd->add_option("--frac-near", synth_opts.plan.frac_near, "near-duplicate fraction");
    cmd->add_option("--frac-unique", synth_opts.plan.frac_unique, "unique fraction");
    cmd->add_option("--positive-rate", synth_opts.plan.positive_rate, "secret-label fraction");
    cmd->add_option("--edit-rate", synth_opts.plan.near_edit_rate,
                    "token fraction replaced per near copy");
    cmd->add_option("--out,-o", synth_opts.out, "corpus output (JSONL)")->required();
    cmd->add_option("--truth", synth_opts.truth, "ground-truth category output (JSONL)");
    cmd->callback([&] { run_synth(synth_opts); });

    StatsOpts stats_opts;
    cmd = app.add_subcommand("stats", "report duplication statistics for a corpus");
    cmd->add_option("--in,-i", stats_opts.in, "input corpus (JSONL)")->required();
    cmd->add_option("--window", stats_opts.window, "context half-width in scalars");
    cmd->add_option("--t0", stats_opts.t0, "token-set similarity threshold");
    cmd->add_option("--t1", stats_opts.t1, "token-multiset similarity threshold");
    cmd->add_option("--keywords", stats_opts.keywords, "stoplist file (default: built-in)");
    cmd->add_flag("--brute-force", stats_opts.brute_force,
                  "score all candidate pairs without the index");
    cmd->add_option("--partition-out", stats_opts.partition_out,
                    "also write the per-sample partition (JSONL)");
    cmd->add_option("--format", stats_opts.format, "output format")
        ->check(CLI::IsMember({"json", "table"}));
    cmd->callback([&] { run_stats(stats_opts); });

    SplitOpts split_opts;
    cmd = app.add_subcommand("split", "build a leakage-controlled fold manifest");
    cmd->add_option("--in,-i", split_opts.in, "input corpus (JSONL)")->required();
    cmd->add_option("--scenario", split_opts.scenario, "evaluation scenario")
        ->check(CLI::IsMember({"mixed", "near", "unique"}));
    cmd->add_option("--folds", split_opts.folds, "fold count k");
    cmd->add_option("--val-frac", split_opts.val_frac, "validation share of the training pool");
    cmd->add_option("--seed", split_opts.seed, "shuffle seed");
    cmd->add_option("--window", split_opts.window, "context half-width in scalars");
    cmd->add_option("--t0", split_opts.t0, "token-set similarity threshold");
    cmd->add_option("--t1", split_opts.t1, "token-multiset similarity threshold");
    cmd->add_option("--keywords", split_opts.keywords, "stoplist file (default: built-in)");
    cmd->add_flag("--brute-force", split_opts.brute_force,
                  "score all candidate pairs without the index");
    cmd->add_option("--out,-o", split_opts.out, "manifest output (JSON)")->required();
    cmd->callback([&] { run_split(split_opts); });

    TrainOpts train_opts;
    cmd = app.add_subcommand("train", "train per-fold classifiers and predict their test sets");
    cmd->add_option("--in,-i", train_opts.in, "input corpus (JSONL)")->required();
    cmd->add_option("--splits", train_opts.splits, "fold manifest (JSON)")->required();
    cmd->add_option("--fold", train_opts.fold, "fold index (default: every fold)");
    cmd->add_option("--seed", train_opts.seed, "base seed for tuning");
    cmd->add_flag("--tune,!--no-tune", train_opts.tune, "tune hyperparameters on validation");
    cmd->add_option("--smoothing", train_opts.params.smoothing, "Laplace alpha");
    cmd->add_option("--min-df", train_opts.params.min_df, "vocabulary document-frequency floor");
    cmd->add_option("--threshold", train_opts.params.threshold, "posterior cutoff");
    cmd->add_option("--de-pop", train_opts.de_pop, "DE population size");
    cmd->add_option("--de-gens", train_opts.de_gens, "DE generations");
    cmd->add_option("--de-F", train_opts.de_f, "DE mutation factor");
    cmd->add_option("--de-CR", train_opts.de_cr, "DE crossover rate");
    cmd->add_option("--window", train_opts.window, "context half-width in scalars");
    cmd->add_option("--keywords", train_opts.keywords, "stoplist file (default: built-in)");
    cmd->add_option("--model-out", train_opts.model_out,
                    "model output (JSON; _f<k> appended per fold when training all)");
    cmd->add_option("--predictions", train_opts.predictions,
                    "merged test predictions output (JSONL)");
    cmd->callback([&] { run_train(train_opts); });

    EvaluateOpts evaluate_opts;
    cmd = app.add_subcommand("evaluate", "score predictions against a fold manifest");
    cmd->add_option("--in,-i", evaluate_opts.in, "input corpus (JSONL, for labels)")->required();
    cmd->add_option("--splits", evaluate_opts.splits, "fold manifest (JSON)")->required();
    cmd->add_option("--predictions", evaluate_opts.predictions, "predictions (JSONL)")
        ->required();
    cmd->add_option("--window", evaluate_opts.window, "context half-width in scalars");
    cmd->add_option("--out,-o", evaluate_opts.out, "also write the JSON report here");
    cmd->add_option("--format", evaluate_opts.format, "output format")
        ->check(CLI::IsMember({"json", "table"}));
    cmd->callback([&] { run_evaluate(evaluate_opts); });

    PipelineOpts pipeline_opts;
    cmd = app.add_subcommand("pipeline", "run the full audit end to end");
    cmd->add_option("--in,-i", pipeline_opts.config.input_path, "input corpus (JSONL)")
        ->required();
    cmd->add_option("--out,-o", pipeline_opts.config.out_dir, "artifact output directory")
        ->required();
    cmd->add_option("--window", pipeline_opts.config.window, "context half-width in scalars");
    cmd->add_option("--t0", pipeline_opts.config.t0, "token-set similarity threshold");
    cmd->add_option("--t1", pipeline_opts.config.t1, "token-multiset similarity threshold");
    cmd->add_option("--folds", pipeline_opts.config.folds, "fold count k");
    cmd->add_option("--val-frac", pipeline_opts.config.val_frac,
                    "validation share of the training pool");
    cmd->add_option("--seed", pipeline_opts.config.seed, "base seed for all randomized stages");
    cmd->add_option("--scenarios", pipeline_opts.scenarios, "scenarios to evaluate")
        ->delimiter(',')
        ->check(CLI::IsMember({"mixed", "near", "unique"}));
    cmd->add_option("--keywords", pipeline_opts.config.keywords_path,
                    "stoplist file (default: built-in)");
    cmd->add_flag("--brute-force", pipeline_opts.config.brute_force,
                  "score all candidate pairs without the index");
    cmd->add_flag("--tune,!--no-tune", pipeline_opts.config.tune,
                  "tune hyperparameters per fold (default: on)");
    cmd->add_option("--format", pipeline_opts.format, "output format")
        ->check(CLI::IsMember({"json", "table"}));
    cmd->callback([&] { run_pipeline_cmd(pipeline_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage errors share the I/O exit code
    } catch (const leakscan::ValidationError& e) {
        std::cerr << "leakscan: " << e.what() << '\n';
        return 1;
    } catch (const leakscan::IoError& e) {
        std::cerr << "leakscan: " << e.what() << '\n';
        return 2;
    } catch (const leakscan::Error& e) {
        std::cerr << "leakscan: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "leakscan: internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
