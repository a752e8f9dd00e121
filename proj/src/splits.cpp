#include "leakscan/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "leakscan/error.hpp"
#include "leakscan/rng.hpp"

namespace leakscan {

using nlohmann::json;

std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::Mixed: return "mixed";
    case Scenario::Near: return "near";
    case Scenario::Unique: return "unique";
    }
    return "mixed";
}

Scenario scenario_from_string(std::string_view s) {
    if (s == "mixed") return Scenario::Mixed;
    if (s == "near") return Scenario::Near;
    if (s == "unique") return Scenario::Unique;
    throw ValidationError("unknown scenario \"" + std::string(s) + "\"");
}

namespace {

using Labels = std::unordered_map<std::string, bool>;

void split_by_label(const std::vector<std::string>& pool, const Labels& labels,
                    std::vector<std::string>& pos, std::vector<std::string>& neg) {
    for (const std::string& id : pool) (labels.at(id) ? pos : neg).push_back(id);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
}

// Deals the pool into k label-stratified folds: per class, sorted ids are
// shuffled and dealt round-robin, so fold sizes per class differ by at most 1.
std::vector<std::vector<std::string>> deal_folds(const std::vector<std::string>& pool,
                                                 const Labels& labels, uint32_t k, Rng& rng,
                                                 bool require_full_strata) {
    std::vector<std::string> pos, neg;
    split_by_label(pool, labels, pos, neg);
    if (require_full_strata && (pos.size() < k || neg.size() < k)) {
        throw ValidationError("cannot stratify: fold count " + std::to_string(k) +
                              " exceeds a class count (positives " + std::to_string(pos.size()) +
                              ", negatives " + std::to_string(neg.size()) + ")");
    }
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::vector<std::string>> folds(k);
    for (size_t i = 0; i < pos.size(); ++i) folds[i % k].push_back(pos[i]);
    for (size_t i = 0; i < neg.size(); ++i) folds[i % k].push_back(neg[i]);
    return folds;
}

// Carves the stratified validation share out of the training allocation.
// Per class, val gets floor(val_frac * n + 0.5) samples, capped so at least
// one training sample of each present class survives.
void carve_val(const std::vector<std::string>& pool, const Labels& labels, double val_frac,
               Rng& rng, std::vector<std::string>& train, std::vector<std::string>& val) {
    std::vector<std::string> pos, neg;
    split_by_label(pool, labels, pos, neg);
    rng.shuffle(pos);
    rng.shuffle(neg);
    auto take = [&](std::vector<std::string>& ids) {
        size_t n_val = static_cast<size_t>(
            std::floor(val_frac * static_cast<double>(ids.size()) + 0.5));
        if (!ids.empty() && n_val >= ids.size()) n_val = ids.size() - 1;
        val.insert(val.end(), ids.begin(), ids.begin() + static_cast<ptrdiff_t>(n_val));
        train.insert(train.end(), ids.begin() + static_cast<ptrdiff_t>(n_val), ids.end());
    };
    take(pos);
    take(neg);
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
}

FoldManifest build_manifest(Scenario scenario, const std::vector<std::string>& test_pool,
                            const std::vector<std::string>& train_extra, const Labels& labels,
                            uint32_t k, double val_frac, uint64_t seed,
                            bool require_full_strata) {
    if (k < 2) throw ValidationError("fold count must be at least 2");
    if (!(val_frac >= 0.0 && val_frac < 1.0))
        throw ValidationError("val_frac must lie in [0, 1)");

    const std::string name(to_string(scenario));
    Rng deal_rng(derive_seed(seed, "deal/" + name));
    auto test_folds = deal_folds(test_pool, labels, k, deal_rng, require_full_strata);

    FoldManifest manifest;
    manifest.scenario = scenario;
    manifest.seed = seed;
    manifest.k = k;
    manifest.val_frac = val_frac;
    for (uint32_t f = 0; f < k; ++f) {
        std::unordered_set<std::string_view> in_test;
        for (const std::string& id : test_folds[f]) in_test.insert(id);
        std::vector<std::string> train_pool;
        train_pool.reserve(test_pool.size() + train_extra.size());
        for (const std::string& id : test_pool) {
            if (in_test.count(id) == 0) train_pool.push_back(id);
        }
        train_pool.insert(train_pool.end(), train_extra.begin(), train_extra.end());

        Fold fold;
        fold.fold_index = f;
        Rng val_rng(derive_seed(seed, "val/" + name + "/" + std::to_string(f)));
        carve_val(train_pool, labels, val_frac, val_rng, fold.train, fold.val);
        fold.test = test_folds[f];
        std::sort(fold.test.begin(), fold.test.end());
        manifest.folds.push_back(std::move(fold));
    }
    return manifest;
}

} // namespace

FoldManifest build_mixed(const Corpus& corpus, uint32_t k, double val_frac, uint64_t seed) {
    if (corpus.size() == 0) throw ValidationError("cannot split an empty corpus");
    std::vector<std::string> pool;
    pool.reserve(corpus.size());
    for (const Sample& s : corpus.samples) pool.push_back(s.id);
    return build_manifest(Scenario::Mixed, pool, {}, corpus.labels_by_id(), k, val_frac, seed,
                          /*require_full_strata=*/true);
}

FoldManifest build_near(const Corpus& corpus, const Partition& partition, uint32_t k,
                        double val_frac, uint64_t seed) {
    if (corpus.size() == 0) throw ValidationError("cannot split an empty corpus");
    return build_manifest(Scenario::Near, dedup_view(partition), {}, corpus.labels_by_id(), k,
                          val_frac, seed, /*require_full_strata=*/true);
}

FoldManifest build_unique(const Corpus& corpus, const Partition& partition, uint32_t k,
                          double val_frac, uint64_t seed) {
    if (corpus.size() == 0) throw ValidationError("cannot split an empty corpus");
    std::vector<std::string> uniques;
    std::vector<std::string> duplicates;
    for (const PartitionEntry& e : partition.entries) {
        (e.category == DupCategory::Unique ? uniques : duplicates).push_back(e.id);
    }
    if (uniques.size() < k) {
        throw ValidationError("too few unique samples (" + std::to_string(uniques.size()) +
                              ") to form " + std::to_string(k) + " folds");
    }
    std::sort(duplicates.begin(), duplicates.end());
    return build_manifest(Scenario::Unique, uniques, duplicates, corpus.labels_by_id(), k,
                          val_frac, seed, /*require_full_strata=*/false);
}

void save_manifest(const FoldManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest file: " + path.string());
    json folds = json::array();
    for (const Fold& f : manifest.folds) {
        folds.push_back({{"fold", f.fold_index},
                         {"train", f.train},
                         {"val", f.val},
                         {"test", f.test}});
    }
    const json doc{{"scenario", std::string(to_string(manifest.scenario))},
                   {"seed", manifest.seed},
                   {"k", manifest.k},
                   {"val_frac", manifest.val_frac},
                   {"folds", std::move(folds)}};
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing manifest file: " + path.string());
}

FoldManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest file: " + path.string());
    FoldManifest manifest;
    try {
        const json doc = json::parse(in);
        manifest.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
        manifest.seed = doc.at("seed").get<uint64_t>();
        manifest.k = doc.at("k").get<uint32_t>();
        manifest.val_frac = doc.at("val_frac").get<double>();
        for (const json& f : doc.at("folds")) {
            Fold fold;
            fold.fold_index = f.at("fold").get<uint32_t>();
            fold.train = f.at("train").get<std::vector<std::string>>();
            fold.val = f.at("val").get<std::vector<std::string>>();
            fold.test = f.at("test").get<std::vector<std::string>>();
            manifest.folds.push_back(std::move(fold));
        }
    } catch (const json::exception& e) {
        throw ValidationError("bad manifest " + path.string() + ": " + e.what());
    }
    return manifest;
}

} // namespace leakscan
