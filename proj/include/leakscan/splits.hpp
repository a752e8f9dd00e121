#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "leakscan/corpus.hpp"
#include "leakscan/dedup.hpp"

namespace leakscan {

enum class Scenario { Mixed, Near, Unique };

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view s);

struct Fold {
    uint32_t fold_index = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Seeded, label-stratified k-fold assignment for one scenario. Within a
/// fold train/val/test are pairwise disjoint and test sets are disjoint
/// across folds; id lists are sorted.
struct FoldManifest {
    Scenario scenario = Scenario::Mixed;
    uint64_t seed = 0;
    uint32_t k = 5;
    double val_frac = 0.1;
    std::vector<Fold> folds;
};

/// Mixed scenario: the full corpus is dealt into k stratified test folds;
/// per fold the remainder splits (1 - val_frac)/val_frac into train/val,
/// stratified by label.
FoldManifest build_mixed(const Corpus& corpus, uint32_t k, double val_frac, uint64_t seed);

/// Near-duplicate scenario: identical construction, restricted to the
/// deduplicated view. Non-representative exact duplicates never appear;
/// near-duplicate cluster members may land on both sides of a fold.
FoldManifest build_near(const Corpus& corpus, const Partition& partition,
                        uint32_t k, double val_frac, uint64_t seed);

/// Unique scenario: the unique samples are dealt into k stratified test
/// folds; everything else (all exact and near duplicates plus the remaining
/// uniques) trains, with val_frac of the training pool carved out as the
/// validation set.
FoldManifest build_unique(const Corpus& corpus, const Partition& partition,
                          uint32_t k, double val_frac, uint64_t seed);

void save_manifest(const FoldManifest& manifest, const std::filesystem::path& path);
FoldManifest load_manifest(const std::filesystem::path& path);

} // namespace leakscan
