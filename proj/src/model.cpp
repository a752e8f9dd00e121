#include "leakscan/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "leakscan/error.hpp"

namespace leakscan {

using nlohmann::json;

namespace {

void check_params(const ClassifierParams& params) {
    if (!(params.smoothing > 0.0)) throw ValidationError("smoothing must be > 0");
    if (params.min_df < 1) throw ValidationError("min_df must be >= 1");
    if (!(params.threshold > 0.0 && params.threshold < 1.0))
        throw ValidationError("threshold must lie in (0, 1)");
}

} // namespace

TrainedModel train(const std::vector<LabeledFingerprint>& samples,
                   const ClassifierParams& params) {
    check_params(params);
    if (samples.empty()) throw ValidationError("training set is empty");

    std::array<uint64_t, 2> class_sizes{};
    for (const LabeledFingerprint& s : samples) {
        if (s.fingerprint == nullptr)
            throw ValidationError("training sample has no fingerprint");
        ++class_sizes[s.label ? 1 : 0];
    }
    if (class_sizes[0] == 0 || class_sizes[1] == 0)
        throw ValidationError("training set must contain both classes");

    // Document frequency decides vocabulary membership; each sample counts a
    // token once no matter its multiplicity.
    std::unordered_map<std::string_view, uint32_t> df;
    for (const LabeledFingerprint& s : samples) {
        for (const auto& [token, count] : s.fingerprint->counts) {
            (void)count;
            ++df[token];
        }
    }

    TrainedModel model;
    model.params = params;
    for (const auto& [token, freq] : df) {
        if (freq >= params.min_df) model.vocabulary.emplace_back(token);
    }
    std::sort(model.vocabulary.begin(), model.vocabulary.end());
    model.vocab_index.reserve(model.vocabulary.size());
    for (uint32_t i = 0; i < model.vocabulary.size(); ++i)
        model.vocab_index.emplace(model.vocabulary[i], i);

    model.counts[0].assign(model.vocabulary.size(), 0);
    model.counts[1].assign(model.vocabulary.size(), 0);
    for (const LabeledFingerprint& s : samples) {
        const size_t c = s.label ? 1 : 0;
        for (const auto& [token, count] : s.fingerprint->counts) {
            auto it = model.vocab_index.find(token);
            if (it == model.vocab_index.end()) continue;
            model.counts[c][it->second] += count;
            model.class_totals[c] += count;
        }
    }
    const double n = static_cast<double>(samples.size());
    model.priors[0] = static_cast<double>(class_sizes[0]) / n;
    model.priors[1] = static_cast<double>(class_sizes[1]) / n;
    return model;
}

Prediction predict(const TrainedModel& model, const Fingerprint& fingerprint) {
    const double alpha = model.params.smoothing;
    const double v = static_cast<double>(model.vocabulary.size());
    const double denom0 = static_cast<double>(model.class_totals[0]) + alpha * v;
    const double denom1 = static_cast<double>(model.class_totals[1]) + alpha * v;

    // Work with the log odds of class 1 over class 0; a plain product of
    // likelihoods underflows long before realistic fingerprint sizes.
    double log_odds = std::log(model.priors[1]) - std::log(model.priors[0]);
    bool any_known = false;
    for (const auto& [token, count] : fingerprint.counts) {
        auto it = model.vocab_index.find(token);
        if (it == model.vocab_index.end()) continue;
        any_known = true;
        const double c0 = static_cast<double>(model.counts[0][it->second]);
        const double c1 = static_cast<double>(model.counts[1][it->second]);
        log_odds += static_cast<double>(count) *
                    (std::log((c1 + alpha) / denom1) - std::log((c0 + alpha) / denom0));
    }
    if (!any_known) log_odds = std::log(model.priors[1]) - std::log(model.priors[0]);

    Prediction out;
    // Logistic form of p1 / (p0 + p1); stable for large |log_odds|.
    if (log_odds >= 0.0) {
        out.score = 1.0 / (1.0 + std::exp(-log_odds));
    } else {
        const double e = std::exp(log_odds);
        out.score = e / (1.0 + e);
    }
    out.label = out.score > model.params.threshold;
    return out;
}

std::vector<LabeledFingerprint> gather_labeled(
    const std::vector<std::string>& ids, const FingerprintMap& fingerprints,
    const std::unordered_map<std::string, bool>& labels) {
    std::vector<LabeledFingerprint> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) {
        auto fit = fingerprints.find(id);
        if (fit == fingerprints.end())
            throw ValidationError("no fingerprint for id \"" + id + "\"");
        auto lit = labels.find(id);
        if (lit == labels.end())
            throw ValidationError("no label for id \"" + id + "\"");
        out.push_back({&fit->second, lit->second});
    }
    return out;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path.string());
    const json doc{{"format", "leakscan-model/1"},
                   {"vocabulary", model.vocabulary},
                   {"counts", {model.counts[0], model.counts[1]}},
                   {"class_totals", {model.class_totals[0], model.class_totals[1]}},
                   {"priors", {model.priors[0], model.priors[1]}},
                   {"params",
                    {{"smoothing", model.params.smoothing},
                     {"min_df", model.params.min_df},
                     {"threshold", model.params.threshold}}}};
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing model file: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    TrainedModel model;
    try {
        const json doc = json::parse(in);
        if (doc.at("format").get<std::string>() != "leakscan-model/1")
            throw ValidationError("unsupported model format in " + path.string());
        model.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
        model.counts[0] = doc.at("counts").at(0).get<std::vector<uint64_t>>();
        model.counts[1] = doc.at("counts").at(1).get<std::vector<uint64_t>>();
        model.class_totals[0] = doc.at("class_totals").at(0).get<uint64_t>();
        model.class_totals[1] = doc.at("class_totals").at(1).get<uint64_t>();
        model.priors[0] = doc.at("priors").at(0).get<double>();
        model.priors[1] = doc.at("priors").at(1).get<double>();
        const json& p = doc.at("params");
        model.params.smoothing = p.at("smoothing").get<double>();
        model.params.min_df = p.at("min_df").get<uint32_t>();
        model.params.threshold = p.at("threshold").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError("bad model file " + path.string() + ": " + e.what());
    }
    if (model.counts[0].size() != model.vocabulary.size() ||
        model.counts[1].size() != model.vocabulary.size())
        throw ValidationError("bad model file " + path.string() + ": count/vocabulary size mismatch");
    check_params(model.params);
    model.vocab_index.reserve(model.vocabulary.size());
    for (uint32_t i = 0; i < model.vocabulary.size(); ++i)
        model.vocab_index.emplace(model.vocabulary[i], i);
    return model;
}

} // namespace leakscan
