#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakscan/lexer.hpp"

namespace leakscan {

/// Hyperparameters of the bag-of-tokens classifier; the tuner searches
/// smoothing and min_df.
struct ClassifierParams {
    double smoothing = 1.0;   // Laplace alpha, > 0
    uint32_t min_df = 1;      // document-frequency floor, >= 1
    double threshold = 0.5;   // posterior cutoff in (0, 1)
};

struct LabeledFingerprint {
    const Fingerprint* fingerprint = nullptr;
    bool label = false;
};

/// Multinomial naive Bayes over token fingerprints. Class 1 is "secret".
struct TrainedModel {
    std::vector<std::string> vocabulary; // sorted; index = position
    std::unordered_map<std::string, uint32_t> vocab_index;
    std::array<std::vector<uint64_t>, 2> counts; // [class][token index]
    std::array<uint64_t, 2> class_totals{};      // sum of counts per class
    std::array<double, 2> priors{};
    ClassifierParams params;
};

/// One-pass training: vocabulary = tokens with document frequency >= min_df,
/// per-class token totals accumulated from the t1 multisets, priors from
/// class sample counts. Throws ValidationError on invalid params or a
/// single-class training set.
TrainedModel train(const std::vector<LabeledFingerprint>& samples, const ClassifierParams& params);

struct Prediction {
    bool label = false;
    double score = 0.0; // posterior probability of the secret class
};

/// Log-space multinomial scoring with Laplace smoothing. Out-of-vocabulary
/// tokens are ignored; an empty effective fingerprint falls back to the
/// priors. label = (score > threshold).
Prediction predict(const TrainedModel& model, const Fingerprint& fingerprint);

/// Pairs up fingerprints with labels for the given ids. Throws
/// ValidationError if an id is missing from either map.
std::vector<LabeledFingerprint> gather_labeled(const std::vector<std::string>& ids,
                                               const FingerprintMap& fingerprints,
                                               const std::unordered_map<std::string, bool>& labels);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace leakscan
