#include "leakscan/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <utility>

#include <json.hpp>
#include <openssl/evp.h>

#include "leakscan/de.hpp"
#include "leakscan/dedup.hpp"
#include "leakscan/error.hpp"
#include "leakscan/lexer.hpp"
#include "leakscan/model.hpp"
#include "leakscan/rng.hpp"

namespace leakscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Re-raises module errors with the owning module's name so a pipeline
// failure reads "dedup: ..." instead of a bare message.
template <typename F>
auto stage(const char* module, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(module) + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(std::string(module) + ": " + e.what());
    }
}

std::string to_hex(const unsigned char* digest, unsigned int len) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

json metrics_to_json(const Metrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mcc", m.mcc}};
}

json cm_to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

// Tracks every artifact written below; the run manifest lists them with
// their digests (the manifest itself is excluded, since it cannot contain
// its own digest).
class ArtifactLog {
public:
    explicit ArtifactLog(fs::path dir) : dir_(std::move(dir)) {}

    fs::path path(const std::string& name) const { return dir_ / name; }

    void record(const std::string& name) {
        entries_.push_back({{"path", name}, {"sha256", sha256_file((dir_ / name).string())}});
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw IoError("cannot write artifact: " + (dir_ / name).string());
        out << text;
        out.close();
        if (!out) throw IoError("failed writing artifact: " + (dir_ / name).string());
        record(name);
    }

    void write_json(const std::string& name, const json& doc) {
        write_text(name, doc.dump(2) + "\n");
    }

    const json& entries() const { return entries_; }

private:
    fs::path dir_;
    json entries_ = json::array();
};

} // namespace

std::string sha256_bytes(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    return to_hex(digest, len);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 digest failed");
    }
    char buffer[1 << 16];
    while (in.good()) {
        in.read(buffer, sizeof buffer);
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx, buffer, static_cast<size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw Error("SHA-256 digest failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    const int ok = EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    if (ok != 1) throw Error("SHA-256 digest failed");
    return to_hex(digest, len);
}

PipelineResult run_pipeline(const RunConfig& config) {
    if (config.out_dir.empty()) throw ValidationError("cli: output directory not set");
    if (config.scenarios.empty()) throw ValidationError("cli: no scenarios requested");
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cli: cannot create output directory " + config.out_dir);
    ArtifactLog artifacts{fs::path(config.out_dir)};

    const Corpus corpus =
        stage("corpus", [&] { return ingest(config.input_path, config.window); });
    stage("corpus", [&] {
        save_corpus(corpus, artifacts.path("ingested.jsonl"));
        artifacts.record("ingested.jsonl");
    });

    const KeywordSet* keywords = &default_keywords();
    KeywordSet loaded_keywords;
    if (!config.keywords_path.empty()) {
        loaded_keywords = stage("lexer", [&] { return load_keywords(config.keywords_path); });
        keywords = &loaded_keywords;
    }
    const FingerprintMap fingerprints =
        stage("lexer", [&] { return fingerprint_corpus(corpus, *keywords); });
    {
        std::string lines;
        for (const Sample& s : corpus.samples) {
            json tokens = json::object();
            for (const auto& [token, count] : fingerprints.at(s.id).counts)
                tokens[token] = count;
            lines += json{{"id", s.id}, {"tokens", std::move(tokens)}}.dump();
            lines += '\n';
        }
        artifacts.write_text("fingerprints.jsonl", lines);
    }

    const Partition parts = stage("dedup", [&] {
        return partition(corpus, fingerprints, config.t0, config.t1, config.brute_force);
    });
    stage("dedup", [&] {
        write_partition_jsonl(parts, artifacts.path("partition.jsonl"));
        artifacts.record("partition.jsonl");
    });
    const DuplicationStats stats =
        stage("dedup", [&] { return duplication_stats(parts, corpus); });
    artifacts.write_json(
        "stats.json",
        json{{"total", stats.total},
             {"unique", {{"count", stats.unique.count}, {"pct", stats.unique.pct}}},
             {"exact", {{"count", stats.exact.count}, {"pct", stats.exact.pct}}},
             {"near", {{"count", stats.near.count}, {"pct", stats.near.pct}}},
             {"r_exact", stats.r_exact},
             {"c_dedup", stats.c_dedup},
             {"secrets_total", stats.secrets_total},
             {"secrets_dedup", stats.secrets_dedup}});

    const auto labels = corpus.labels_by_id();
    PipelineResult result;
    std::vector<MetricsReport> reports;

    for (Scenario scenario : config.scenarios) {
        const std::string name(to_string(scenario));
        const FoldManifest manifest = stage("splits", [&] {
            switch (scenario) {
            case Scenario::Mixed:
                return build_mixed(corpus, config.folds, config.val_frac, config.seed);
            case Scenario::Near:
                return build_near(corpus, parts, config.folds, config.val_frac, config.seed);
            default:
                return build_unique(corpus, parts, config.folds, config.val_frac, config.seed);
            }
        });
        stage("splits", [&] {
            save_manifest(manifest, artifacts.path("splits_" + name + ".json"));
            artifacts.record("splits_" + name + ".json");
        });

        std::vector<ConfusionMatrix> fold_cms;
        json tuning_rows = json::array();
        for (const Fold& fold : manifest.folds) {
            const auto train_set = stage("model", [&] {
                return gather_labeled(fold.train, fingerprints, labels);
            });

            ClassifierParams params;
            if (config.tune && !fold.val.empty()) {
                const auto val_set = stage("model", [&] {
                    return gather_labeled(fold.val, fingerprints, labels);
                });
                DEConfig de_config;
                de_config.seed = derive_seed(config.seed,
                                             "de/" + name + "/" + std::to_string(fold.fold_index));
                const TuneResult tuned = stage("tune", [&] {
                    return tune_classifier(train_set, val_set, de_config);
                });
                params = tuned.params;
                tuning_rows.push_back({{"fold", fold.fold_index},
                                       {"smoothing", tuned.params.smoothing},
                                       {"min_df", tuned.params.min_df},
                                       {"val_f1", tuned.best_fitness},
                                       {"history", tuned.history}});
            }

            const TrainedModel model = stage("model", [&] { return train(train_set, params); });
            const std::string model_name =
                "model_" + name + "_f" + std::to_string(fold.fold_index) + ".json";
            stage("model", [&] {
                save_model(model, artifacts.path(model_name));
                artifacts.record(model_name);
            });

            std::vector<bool> truth, predicted;
            std::string lines;
            for (const std::string& id : fold.test) {
                auto it = fingerprints.find(id);
                if (it == fingerprints.end())
                    throw ValidationError("model: no fingerprint for id \"" + id + "\"");
                const Prediction p = predict(model, it->second);
                truth.push_back(labels.at(id));
                predicted.push_back(p.label);
                lines += json{{"id", id}, {"label", p.label}, {"score", p.score}}.dump();
                lines += '\n';
            }
            artifacts.write_text(
                "predictions_" + name + "_f" + std::to_string(fold.fold_index) + ".jsonl", lines);
            fold_cms.push_back(stage("eval", [&] { return confusion(truth, predicted); }));
        }

        if (config.tune) artifacts.write_json("tuning_" + name + ".json", tuning_rows);

        MetricsReport report = stage("eval", [&] { return summarize_folds(name, fold_cms); });
        json folds_json = json::array();
        for (size_t f = 0; f < fold_cms.size(); ++f) {
            json row = cm_to_json(fold_cms[f]);
            row["fold"] = f;
            row["metrics"] = metrics_to_json(report.fold_metrics[f]);
            folds_json.push_back(std::move(row));
        }
        artifacts.write_json("metrics_" + name + ".json",
                             json{{"scenario", name},
                                  {"folds", std::move(folds_json)},
                                  {"mean", metrics_to_json(report.mean)},
                                  {"stddev", metrics_to_json(report.stddev)},
                                  {"pooled_cm", cm_to_json(report.pooled_cm)},
                                  {"pooled", metrics_to_json(report.pooled)}});
        reports.push_back(std::move(report));
    }

    result.degradation = stage("eval", [&] { return degradation_report(reports); });
    json degradation_rows = json::array();
    for (const DegradationRow& row : result.degradation.rows) {
        degradation_rows.push_back({{"scenario", row.scenario},
                                    {"mcc", row.mcc},
                                    {"mcc_drop", row.mcc_drop},
                                    {"degradation_pct", row.degradation_pct},
                                    {"p_value", row.p_value}});
    }
    artifacts.write_json("degradation.json", json{{"rows", std::move(degradation_rows)}});

    json scenario_names = json::array();
    for (Scenario s : config.scenarios) scenario_names.push_back(std::string(to_string(s)));
    const json manifest_doc{
        {"config",
         {{"input_path", config.input_path},
          {"out_dir", config.out_dir},
          {"window", config.window},
          {"t0", config.t0},
          {"t1", config.t1},
          {"folds", config.folds},
          {"val_frac", config.val_frac},
          {"seed", config.seed},
          {"scenarios", std::move(scenario_names)},
          {"keywords_path", config.keywords_path},
          {"brute_force", config.brute_force},
          {"tune", config.tune}}},
        {"input_sha256", sha256_file(config.input_path)},
        {"artifacts", artifacts.entries()}};
    const fs::path manifest_path = artifacts.path("run_manifest.json");
    {
        std::ofstream out(manifest_path, std::ios::binary);
        if (!out) throw IoError("cli: cannot write manifest " + manifest_path.string());
        out << manifest_doc.dump(2) << '\n';
        if (!out) throw IoError("cli: failed writing manifest " + manifest_path.string());
    }

    result.reports = std::move(reports);
    result.manifest_path = manifest_path.string();
    return result;
}

} // namespace leakscan
