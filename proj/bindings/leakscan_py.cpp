#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "leakscan/corpus.hpp"
#include "leakscan/dedup.hpp"
#include "leakscan/error.hpp"
#include "leakscan/lexer.hpp"
#include "leakscan/pipeline.hpp"
#include "leakscan/synth.hpp"

namespace py = pybind11;

namespace {

leakscan::Fingerprint to_fingerprint(const py::dict& counts) {
    leakscan::Fingerprint fp;
    for (const auto& item : counts) {
        fp.counts[item.first.cast<std::string>()] = item.second.cast<uint32_t>();
    }
    return fp;
}

py::dict from_fingerprint(const leakscan::Fingerprint& fp) {
    py::dict out;
    for (const auto& [token, count] : fp.counts) out[py::str(token)] = count;
    return out;
}

py::dict stats_to_dict(const leakscan::DuplicationStats& stats) {
    py::dict out;
    out["total"] = stats.total;
    auto cat = [](const leakscan::CategoryStat& s) {
        py::dict d;
        d["count"] = s.count;
        d["pct"] = s.pct;
        return d;
    };
    out["unique"] = cat(stats.unique);
    out["exact"] = cat(stats.exact);
    out["near"] = cat(stats.near);
    out["r_exact"] = stats.r_exact;
    out["c_dedup"] = stats.c_dedup;
    out["secrets_total"] = stats.secrets_total;
    out["secrets_dedup"] = stats.secrets_dedup;
    return out;
}

py::dict metrics_to_dict(const leakscan::Metrics& m) {
    py::dict out;
    out["precision"] = m.precision;
    out["recall"] = m.recall;
    out["f1"] = m.f1;
    out["mcc"] = m.mcc;
    return out;
}

} // namespace

PYBIND11_MODULE(_leakscan, m) {
    m.doc() = "corpus duplication audit and leakage-controlled evaluation";
    m.attr("__version__") = "0.1.0";

    py::register_exception<leakscan::ValidationError>(m, "ValidationError");
    py::register_exception<leakscan::IoError>(m, "IoError");

    m.def(
        "tokenize",
        [](const std::string& context, std::optional<std::vector<std::string>> keywords) {
            if (!keywords) return from_fingerprint(
                leakscan::tokenize(context, leakscan::default_keywords()));
            leakscan::KeywordSet set(keywords->begin(), keywords->end());
            return from_fingerprint(leakscan::tokenize(context, set));
        },
        py::arg("context"), py::arg("keywords") = py::none(),
        "Token fingerprint of a context as a {token: count} dict; keywords "
        "defaults to the built-in stoplist.");

    m.def(
        "jaccard_set",
        [](const py::dict& a, const py::dict& b) {
            return leakscan::jaccard_set(to_fingerprint(a), to_fingerprint(b));
        },
        py::arg("a"), py::arg("b"), "Jaccard similarity of two fingerprints' token sets.");

    m.def(
        "jaccard_multiset",
        [](const py::dict& a, const py::dict& b) {
            return leakscan::jaccard_multiset(to_fingerprint(a), to_fingerprint(b));
        },
        py::arg("a"), py::arg("b"), "Multiset Jaccard similarity of two fingerprints.");

    m.def("extract_context", &leakscan::extract_context, py::arg("content"),
          py::arg("secret_start"), py::arg("secret_end"), py::arg("window") = 200,
          "Window of scalars around (excluding) the secret span.");

    m.def("sha256_file", &leakscan::sha256_file, py::arg("path"),
          "Hex SHA-256 of a file's bytes.");

    m.def(
        "audit",
        [](const std::string& corpus_path, uint32_t window, double t0, double t1,
           bool brute_force, const std::string& keywords_path) {
            const leakscan::Corpus corpus = leakscan::ingest(corpus_path, window);
            const leakscan::KeywordSet* keywords = &leakscan::default_keywords();
            leakscan::KeywordSet loaded;
            if (!keywords_path.empty()) {
                loaded = leakscan::load_keywords(keywords_path);
                keywords = &loaded;
            }
            const auto fingerprints = leakscan::fingerprint_corpus(corpus, *keywords);
            const auto parts =
                leakscan::partition(corpus, fingerprints, t0, t1, brute_force);
            return stats_to_dict(leakscan::duplication_stats(parts, corpus));
        },
        py::arg("corpus_path"), py::arg("window") = 200, py::arg("t0") = 0.8,
        py::arg("t1") = 0.7, py::arg("brute_force") = false, py::arg("keywords_path") = "",
        "Duplication statistics of a corpus file.");

    m.def(
        "synth",
        [](uint32_t n, uint64_t seed, const std::string& out, const std::string& truth) {
            leakscan::SynthPlan plan;
            plan.n_total = n;
            plan.seed = seed;
            const leakscan::SynthResult result = leakscan::generate(plan);
            leakscan::save_corpus(result.corpus, out);
            if (!truth.empty()) leakscan::save_truth(result.truth, truth);
            return result.corpus.size();
        },
        py::arg("n"), py::arg("seed"), py::arg("out"), py::arg("truth") = "",
        "Generate a synthetic corpus (default duplication profile); returns "
        "the sample count.");

    m.def(
        "run_pipeline",
        [](const std::string& input_path, const std::string& out_dir, uint64_t seed,
           uint32_t folds, double val_frac, uint32_t window, double t0, double t1, bool tune,
           bool brute_force, const std::vector<std::string>& scenarios,
           const std::string& keywords_path) {
            leakscan::RunConfig config;
            config.input_path = input_path;
            config.out_dir = out_dir;
            config.seed = seed;
            config.folds = folds;
            config.val_frac = val_frac;
            config.window = window;
            config.t0 = t0;
            config.t1 = t1;
            config.tune = tune;
            config.brute_force = brute_force;
            config.keywords_path = keywords_path;
            config.scenarios.clear();
            for (const std::string& name : scenarios)
                config.scenarios.push_back(leakscan::scenario_from_string(name));
            const leakscan::PipelineResult result = leakscan::run_pipeline(config);

            py::dict out;
            py::dict per_scenario;
            for (const leakscan::MetricsReport& report : result.reports) {
                py::dict entry;
                entry["mean"] = metrics_to_dict(report.mean);
                entry["stddev"] = metrics_to_dict(report.stddev);
                entry["pooled"] = metrics_to_dict(report.pooled);
                per_scenario[py::str(report.scenario)] = entry;
            }
            out["scenarios"] = per_scenario;
            py::list rows;
            for (const leakscan::DegradationRow& row : result.degradation.rows) {
                py::dict r;
                r["scenario"] = row.scenario;
                r["mcc"] = row.mcc;
                r["mcc_drop"] = row.mcc_drop;
                r["degradation_pct"] = row.degradation_pct;
                r["p_value"] = row.p_value;
                rows.append(r);
            }
            out["degradation"] = rows;
            out["manifest"] = result.manifest_path;
            return out;
        },
        py::arg("input_path"), py::arg("out_dir"), py::arg("seed") = 0, py::arg("folds") = 5,
        py::arg("val_frac") = 0.1, py::arg("window") = 200, py::arg("t0") = 0.8,
        py::arg("t1") = 0.7, py::arg("tune") = true, py::arg("brute_force") = false,
        py::arg("scenarios") = std::vector<std::string>{"mixed", "near", "unique"},
        py::arg("keywords_path") = "", "Full audit pipeline; returns a summary dict.");
}
