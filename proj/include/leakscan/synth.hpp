#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakscan/corpus.hpp"
#include "leakscan/dedup.hpp"

namespace leakscan {

/// Recipe for a generated corpus with a controlled duplication profile.
/// Default fractions and positive rate mirror what audits of real
/// secret-detection corpora find (59% exact members, 9.4% near, 31.6%
/// unique, 13.4% positives).
struct SynthPlan {
    uint32_t n_total = 0;
    double frac_exact = 0.59;
    double frac_near = 0.094;
    double frac_unique = 0.316;
    double positive_rate = 0.134;
    double near_edit_rate = 0.1; // fraction of fingerprint tokens swapped per near copy
    uint64_t seed = 0;
};

/// Intended category per generated sample. `group` numbers exact groups and
/// near clusters independently within their category; unique samples get
/// group 0.
struct TruthEntry {
    std::string id;
    DupCategory category = DupCategory::Unique;
    uint32_t group = 0;
};

struct SynthResult {
    Corpus corpus;
    std::vector<TruthEntry> truth; // corpus order
};

/// Generates a labeled corpus matching `plan`. Exact groups are verbatim
/// copies; near clusters share a skeleton and differ in `near_edit_rate` of
/// their fingerprint tokens (always enough to stay above the (0.8, 0.7)
/// thresholds); uniques are fresh draws. Labels are constant within any
/// group or cluster. Deterministic for a given plan.
SynthResult generate(const SynthPlan& plan);

void save_truth(const std::vector<TruthEntry>& truth, const std::string& path);
std::vector<TruthEntry> load_truth(const std::string& path);

} // namespace leakscan
