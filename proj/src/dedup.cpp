#include "leakscan/dedup.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "leakscan/error.hpp"

namespace leakscan {

using nlohmann::json;

double jaccard_set(const Fingerprint& a, const Fingerprint& b) {
    if (a.counts.empty() && b.counts.empty()) return 1.0;
    if (a.counts.empty() || b.counts.empty()) return 0.0;
    size_t inter = 0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() && ib != b.counts.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else { ++inter; ++ia; ++ib; }
    }
    const size_t uni = a.counts.size() + b.counts.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_multiset(const Fingerprint& a, const Fingerprint& b) {
    if (a.counts.empty() && b.counts.empty()) return 1.0;
    if (a.counts.empty() || b.counts.empty()) return 0.0;
    uint64_t sum_min = 0;
    uint64_t sum_max = 0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() || ib != b.counts.end()) {
        if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
            sum_max += ia->second;
            ++ia;
        } else if (ia == a.counts.end() || ib->first < ia->first) {
            sum_max += ib->second;
            ++ib;
        } else {
            sum_min += std::min(ia->second, ib->second);
            sum_max += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(sum_min) / static_cast<double>(sum_max);
}

std::string_view to_string(DupCategory c) {
    switch (c) {
    case DupCategory::Exact: return "exact";
    case DupCategory::Near: return "near";
    case DupCategory::Unique: return "unique";
    }
    return "unique";
}

DupCategory category_from_string(std::string_view s) {
    if (s == "exact") return DupCategory::Exact;
    if (s == "near") return DupCategory::Near;
    if (s == "unique") return DupCategory::Unique;
    throw ValidationError("unknown duplication category \"" + std::string(s) + "\"");
}

std::unordered_map<std::string_view, const PartitionEntry*> Partition::by_id() const {
    std::unordered_map<std::string_view, const PartitionEntry*> index;
    index.reserve(entries.size());
    for (const PartitionEntry& e : entries) index.emplace(e.id, &e);
    return index;
}

ExactGroups group_exact(const Corpus& corpus) {
    std::unordered_map<std::string_view, std::vector<std::string>> by_context;
    for (const Sample& s : corpus.samples) by_context[s.context].push_back(s.id);
    ExactGroups result;
    for (auto& [context, ids] : by_context) {
        std::sort(ids.begin(), ids.end());
        if (ids.size() >= 2) result.groups.push_back(std::move(ids));
        else result.singletons.push_back(std::move(ids.front()));
    }
    std::sort(result.groups.begin(), result.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::sort(result.singletons.begin(), result.singletons.end());
    return result;
}

namespace {

void check_thresholds(double t0, double t1) {
    if (!(t0 > 0.0 && t0 <= 1.0)) throw ValidationError("t0 must lie in (0, 1]");
    if (!(t1 > 0.0 && t1 <= 1.0)) throw ValidationError("t1 must lie in (0, 1]");
}

} // namespace

std::vector<std::vector<std::string>> detect_near(const std::vector<std::string>& candidates,
                                                  const FingerprintMap& fingerprints,
                                                  double t0, double t1, bool brute_force) {
    check_thresholds(t0, t1);
    std::vector<std::string> ids = candidates;
    std::sort(ids.begin(), ids.end());
    const size_t n = ids.size();
    std::vector<const Fingerprint*> fps(n);
    for (size_t i = 0; i < n; ++i) {
        auto it = fingerprints.find(ids[i]);
        if (it == fingerprints.end())
            throw ValidationError("no fingerprint for id \"" + ids[i] + "\"");
        fps[i] = &it->second;
    }

    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    if (brute_force) {
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                if (jaccard_set(*fps[i], *fps[j]) > t0 &&
                    jaccard_multiset(*fps[i], *fps[j]) > t1) {
                    unite(i, j);
                }
            }
        }
    } else {
        // Inverted token index. Sound for any t0 > 0: a qualifying pair shares
        // at least one token — except pairs of empty fingerprints, which score
        // (1.0, 1.0) by convention and are handled separately below.
        std::unordered_map<std::string_view, std::vector<uint32_t>> postings;
        for (size_t i = 0; i < n; ++i) {
            for (const auto& [token, count] : fps[i]->counts) {
                postings[token].push_back(static_cast<uint32_t>(i));
            }
        }
        std::vector<uint32_t> shared(n, 0);
        std::vector<uint32_t> touched;
        for (size_t i = 0; i < n; ++i) {
            const Fingerprint& fp = *fps[i];
            for (const auto& [token, count] : fp.counts) {
                for (uint32_t j : postings.find(token)->second) {
                    if (j <= i) continue;
                    if (shared[j]++ == 0) touched.push_back(j);
                }
            }
            const double size_i = static_cast<double>(fp.distinct_count());
            for (uint32_t j : touched) {
                const double inter = shared[j];
                shared[j] = 0;
                const double uni = size_i + static_cast<double>(fps[j]->distinct_count()) - inter;
                if (inter / uni > t0 && jaccard_multiset(fp, *fps[j]) > t1) unite(i, j);
            }
            touched.clear();
        }
        size_t first_empty = n;
        for (size_t i = 0; i < n; ++i) {
            if (!fps[i]->empty()) continue;
            if (first_empty == n) first_empty = i;
            else if (t0 < 1.0 && t1 < 1.0) unite(first_empty, i);
        }
    }

    std::map<size_t, std::vector<std::string>> components;
    for (size_t i = 0; i < n; ++i) components[find(i)].push_back(ids[i]);
    std::vector<std::vector<std::string>> clusters;
    for (auto& [root, members] : components) {
        if (members.size() >= 2) clusters.push_back(std::move(members));
    }
    return clusters;
}

Partition partition(const Corpus& corpus, const FingerprintMap& fingerprints,
                    double t0, double t1, bool brute_force) {
    check_thresholds(t0, t1);
    for (const Sample& s : corpus.samples) {
        if (fingerprints.count(s.id) == 0)
            throw ValidationError("no fingerprint for id \"" + s.id + "\"");
    }

    const ExactGroups eg = group_exact(corpus);
    const auto clusters = detect_near(eg.singletons, fingerprints, t0, t1, brute_force);

    Partition part;
    part.t0 = t0;
    part.t1 = t1;
    part.exact_group_count = static_cast<uint32_t>(eg.groups.size());
    part.near_cluster_count = static_cast<uint32_t>(clusters.size());

    const auto index = corpus.index_by_id();
    std::vector<PartitionEntry> entries(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        entries[i].id = corpus.samples[i].id;
        entries[i].category = DupCategory::Unique;
    }
    for (uint32_t g = 0; g < part.exact_group_count; ++g) {
        const auto& members = eg.groups[g];
        for (size_t m = 0; m < members.size(); ++m) {
            PartitionEntry& e = entries[index.at(members[m])];
            e.category = DupCategory::Exact;
            e.exact_group = g;
            e.is_representative = m == 0; // members sorted: smallest id
        }
    }
    for (uint32_t c = 0; c < part.near_cluster_count; ++c) {
        for (const std::string& id : clusters[c]) {
            PartitionEntry& e = entries[index.at(id)];
            e.category = DupCategory::Near;
            e.near_cluster = c;
        }
    }
    part.entries = std::move(entries);
    return part;
}

std::vector<std::string> dedup_view(const Partition& partition) {
    std::vector<std::string> ids;
    for (const PartitionEntry& e : partition.entries) {
        if (e.category != DupCategory::Exact || e.is_representative) ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

DuplicationStats duplication_stats(const Partition& partition, const Corpus& corpus) {
    const auto labels = corpus.labels_by_id();
    DuplicationStats stats;
    stats.total = partition.entries.size();
    for (const PartitionEntry& e : partition.entries) {
        auto it = labels.find(e.id);
        if (it == labels.end())
            throw ValidationError("partition id \"" + e.id + "\" not in corpus");
        const bool secret = it->second;
        switch (e.category) {
        case DupCategory::Unique: ++stats.unique.count; break;
        case DupCategory::Exact: ++stats.exact.count; break;
        case DupCategory::Near: ++stats.near.count; break;
        }
        if (secret) {
            ++stats.secrets_total;
            if (e.category != DupCategory::Exact || e.is_representative) ++stats.secrets_dedup;
        }
    }
    stats.r_exact = partition.exact_group_count;
    stats.c_dedup = stats.unique.count + stats.near.count + stats.r_exact;
    if (stats.total > 0) {
        const double total = static_cast<double>(stats.total);
        stats.unique.pct = 100.0 * static_cast<double>(stats.unique.count) / total;
        stats.exact.pct = 100.0 * static_cast<double>(stats.exact.count) / total;
        stats.near.pct = 100.0 * static_cast<double>(stats.near.count) / total;
    }
    return stats;
}

namespace {

std::string with_commas(uint64_t v) {
    std::string s = std::to_string(v);
    for (size_t pos = s.size(); pos > 3;) {
        pos -= 3;
        s.insert(pos, ",");
    }
    return s;
}

std::string count_pct(uint64_t count, double pct) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.1f%%)", pct);
    return with_commas(count) + buf;
}

} // namespace

std::string render_stats_table(const DuplicationStats& stats) {
    const double total_pct = stats.total > 0 ? 100.0 : 0.0;
    char line[96];
    std::string out;
    auto row = [&](const char* label, const std::string& value) {
        std::snprintf(line, sizeof line, "%-18s %s\n", label, value.c_str());
        out += line;
    };
    row("Duplication Types", "Count (%)");
    row("C_unique", count_pct(stats.unique.count, stats.unique.pct));
    row("C_exact", count_pct(stats.exact.count, stats.exact.pct));
    row("C_near", count_pct(stats.near.count, stats.near.pct));
    row("Total", count_pct(stats.total, total_pct));
    row("R_exact", with_commas(stats.r_exact));
    row("C_dedup", with_commas(stats.c_dedup));
    row("Secrets", with_commas(stats.secrets_total) + " (" + with_commas(stats.secrets_dedup) +
                       " in C_dedup)");
    return out;
}

void write_partition_jsonl(const Partition& partition, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write partition file: " + path.string());
    for (const PartitionEntry& e : partition.entries) {
        json record{{"id", e.id},
                    {"category", std::string(to_string(e.category))},
                    {"is_representative", e.is_representative}};
        if (e.exact_group) record["exact_group"] = *e.exact_group;
        if (e.near_cluster) record["near_cluster"] = *e.near_cluster;
        out << record.dump() << '\n';
    }
    if (!out) throw IoError("failed writing partition file: " + path.string());
}

Partition load_partition_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open partition file: " + path.string());
    Partition part;
    std::unordered_set<uint32_t> groups;
    std::unordered_set<uint32_t> clusters;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        PartitionEntry e;
        try {
            const json record = json::parse(line);
            e.id = record.at("id").get<std::string>();
            e.category = category_from_string(record.at("category").get<std::string>());
            e.is_representative = record.at("is_representative").get<bool>();
            if (record.contains("exact_group")) e.exact_group = record.at("exact_group").get<uint32_t>();
            if (record.contains("near_cluster")) e.near_cluster = record.at("near_cluster").get<uint32_t>();
        } catch (const json::exception& ex) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": bad partition record: " + ex.what());
        }
        if (e.exact_group) groups.insert(*e.exact_group);
        if (e.near_cluster) clusters.insert(*e.near_cluster);
        part.entries.push_back(std::move(e));
    }
    part.exact_group_count = static_cast<uint32_t>(groups.size());
    part.near_cluster_count = static_cast<uint32_t>(clusters.size());
    return part;
}

} // namespace leakscan
