#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "leakscan/corpus.hpp"
#include "leakscan/lexer.hpp"

namespace leakscan {

/// Jaccard similarity of the token sets: |T0_a ∩ T0_b| / |T0_a ∪ T0_b|.
/// Two empty fingerprints score 1.0; empty vs non-empty scores 0.0.
double jaccard_set(const Fingerprint& a, const Fingerprint& b);

/// Multiset Jaccard: sum_t min(count_a, count_b) / sum_t max(count_a, count_b).
/// Same empty-fingerprint conventions as jaccard_set.
double jaccard_multiset(const Fingerprint& a, const Fingerprint& b);

enum class DupCategory { Exact, Near, Unique };

std::string_view to_string(DupCategory c);
DupCategory category_from_string(std::string_view s);

struct PartitionEntry {
    std::string id;
    DupCategory category = DupCategory::Unique;
    std::optional<uint32_t> exact_group;
    std::optional<uint32_t> near_cluster;
    bool is_representative = false;
};

/// Per-sample duplication verdicts plus the thresholds that produced them.
/// Categories are mutually exclusive and jointly exhaustive; every exact
/// group has >= 2 byte-identical members and exactly one representative.
struct Partition {
    double t0 = 0.8;
    double t1 = 0.7;
    std::vector<PartitionEntry> entries; // corpus order
    uint32_t exact_group_count = 0;
    uint32_t near_cluster_count = 0;

    std::unordered_map<std::string_view, const PartitionEntry*> by_id() const;
};

struct ExactGroups {
    /// Byte-identical context groups, every group size >= 2. Members are
    /// sorted by id; groups are ordered by their smallest member id.
    std::vector<std::vector<std::string>> groups;
    /// All remaining ids, sorted.
    std::vector<std::string> singletons;
};

ExactGroups group_exact(const Corpus& corpus);

/// Connected components of the near-duplicate pair relation
///   jaccard_set > t0  AND  jaccard_multiset > t1   (both strict).
/// Every returned cluster has >= 2 members; clusters and members are sorted
/// by id so the result is independent of candidate ordering. The default
/// path prunes candidate pairs through an inverted token index (sound for
/// any t0 > 0 since qualifying pairs share at least one token);
/// brute_force scores all pairs and is kept as the oracle.
std::vector<std::vector<std::string>> detect_near(const std::vector<std::string>& candidates,
                                                  const FingerprintMap& fingerprints,
                                                  double t0, double t1,
                                                  bool brute_force = false);

/// Exact groups first; near detection over the exact singletons only; the
/// lexicographically smallest id of each exact group is its representative.
Partition partition(const Corpus& corpus, const FingerprintMap& fingerprints,
                    double t0, double t1, bool brute_force = false);

/// The deduplicated view: all unique ids + all near ids + one representative
/// per exact group, sorted by id.
std::vector<std::string> dedup_view(const Partition& partition);

struct CategoryStat {
    uint64_t count = 0;
    double pct = 0.0;
};

struct DuplicationStats {
    uint64_t total = 0;
    CategoryStat unique, exact, near;
    uint64_t r_exact = 0;
    uint64_t c_dedup = 0;
    uint64_t secrets_total = 0;
    uint64_t secrets_dedup = 0;
};

DuplicationStats duplication_stats(const Partition& partition, const Corpus& corpus);

/// Text table in the duplication-statistics layout:
/// category rows with "count (pct%)", then a Total row.
std::string render_stats_table(const DuplicationStats& stats);

void write_partition_jsonl(const Partition& partition, const std::filesystem::path& path);
Partition load_partition_jsonl(const std::filesystem::path& path);

} // namespace leakscan
