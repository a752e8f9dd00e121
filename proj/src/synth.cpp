#include "leakscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "leakscan/error.hpp"
#include "leakscan/rng.hpp"

namespace leakscan {

using nlohmann::json;

namespace {

// Every context carries exactly kSlots tokens, all distinct: unit-private
// fresh identifiers (the memorizable part), class-signal vocabulary, and
// shared filler. Distinctness makes the set and multiset similarities of a
// generated pair coincide, so the (t0, t1) margins below hold for both.
constexpr size_t kFreshSlots = 24;
constexpr size_t kSignalSlots = 20;
constexpr size_t kFillerSlots = 16;
constexpr size_t kSlots = kFreshSlots + kSignalSlots + kFillerSlots;
static_assert(kSlots == 60);

// Probability that a signal slot draws from the pool of the sample's own
// class rather than the opposite one. High enough that class membership is
// learnable from signal tokens alone, low enough that a classifier stripped
// of memorized duplicate tokens makes visible mistakes — which is exactly
// the spread the three evaluation scenarios are meant to expose.
constexpr double kOwnPoolRate = 0.65;

constexpr size_t kPoolStems = 16;
constexpr size_t kPoolSuffixes = 4;
constexpr size_t kPoolSize = kPoolStems * kPoolSuffixes;

// Credential-flavored stems for positive samples, neutral stems for
// negatives, and topic-free filler. The three lists are pairwise disjoint
// and avoid every word in the default keyword stoplist.
constexpr const char* kPositiveStems[kPoolStems] = {
    "key",  "token", "password", "secret", "apikey", "credential", "auth", "cert",
    "priv", "sign",  "vault",    "salt",   "oauth",  "bearer",     "hmac", "keystore"};
constexpr const char* kNegativeStems[kPoolStems] = {
    "count", "widget", "render", "layout", "index", "list",  "node",  "queue",
    "stack", "tree",   "graph",  "parse",  "merge", "sort",  "cache", "route"};
constexpr const char* kFillerStems[kPoolStems] = {
    "alpha", "bravo",   "citrus", "dune",   "ember", "fjord",  "grove",  "harbor",
    "iris",  "juniper", "krill",  "lagoon", "maple", "nectar", "orchid", "pebble"};

std::vector<std::string> expand_pool(const char* const (&stems)[kPoolStems]) {
    static const char* suffixes[kPoolSuffixes] = {"_a", "_b", "_c", "_d"};
    std::vector<std::string> pool;
    pool.reserve(kPoolSize);
    for (const char* stem : stems) {
        for (const char* suffix : suffixes) pool.push_back(std::string(stem) + suffix);
    }
    return pool;
}

// Mints identifiers that never repeat across the corpus; the hex counter
// suffix keeps them disjoint from the pool vocabulary and from each other.
struct TokenMint {
    uint64_t counter = 0;
    std::string next() {
        static const char* stems[8] = {"tmp", "buf", "obj", "ptr", "arg", "loc", "mem", "reg"};
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s_%06llx", stems[counter % 8],
                      static_cast<unsigned long long>(counter));
        ++counter;
        return buf;
    }
};

// k distinct indices below n, via a partial Fisher-Yates over 0..n-1.
std::vector<size_t> draw_distinct(size_t n, size_t k, Rng& rng) {
    std::vector<size_t> indices(n);
    std::iota(indices.begin(), indices.end(), size_t{0});
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + static_cast<size_t>(rng.below(n - i));
        std::swap(indices[i], indices[j]);
        out.push_back(indices[i]);
    }
    return out;
}

// Renders 60 tokens as code-flavored text, five per line, cycling through
// assignment/call/definition idioms. All glue words sit in the default
// keyword stoplist and the punctuation is token-free, so the rendered text
// fingerprints back to exactly the input tokens.
std::string render_context(const std::vector<std::string>& tokens) {
    std::string out;
    out.reserve(tokens.size() * 14);
    for (size_t line = 0; line * 5 < tokens.size(); ++line) {
        const std::string& a = tokens[line * 5];
        const std::string& b = tokens[line * 5 + 1];
        const std::string& c = tokens[line * 5 + 2];
        const std::string& d = tokens[line * 5 + 3];
        const std::string& e = tokens[line * 5 + 4];
        switch (line % 5) {
        case 0:
            out += "var " + a + " = " + b + "." + c + "(" + d + ", " + e + ");\n";
            break;
        case 1:
            out += "if (" + a + " in " + b + ") { return " + c + "." + d + "(" + e + "); }\n";
            break;
        case 2:
            out += "def " + a + "(" + b + ", " + c + "): return " + d + " + " + e + "\n";
            break;
        case 3:
            out += a + " := " + b + "." + c + " + " + d + " - " + e + "\n";
            break;
        default:
            out += "let " + a + " = new " + b + "(" + c + ", " + d + ", " + e + ");\n";
            break;
        }
    }
    return out;
}

std::vector<std::string> base_tokens(bool positive, const std::vector<std::string>& pos_pool,
                                     const std::vector<std::string>& neg_pool,
                                     const std::vector<std::string>& filler_pool, TokenMint& mint,
                                     Rng& rng) {
    std::vector<std::string> tokens;
    tokens.reserve(kSlots);
    for (size_t i = 0; i < kFreshSlots; ++i) tokens.push_back(mint.next());

    size_t own = 0;
    for (size_t i = 0; i < kSignalSlots; ++i) {
        if (rng.next_double() < kOwnPoolRate) ++own;
    }
    const auto& own_pool = positive ? pos_pool : neg_pool;
    const auto& other_pool = positive ? neg_pool : pos_pool;
    for (size_t idx : draw_distinct(own_pool.size(), own, rng)) tokens.push_back(own_pool[idx]);
    for (size_t idx : draw_distinct(other_pool.size(), kSignalSlots - own, rng))
        tokens.push_back(other_pool[idx]);
    for (size_t idx : draw_distinct(filler_pool.size(), kFillerSlots, rng))
        tokens.push_back(filler_pool[idx]);

    rng.shuffle(tokens);
    return tokens;
}

// Splits a category quota into group sizes >= 2 drawn from a small fixed
// distribution (`sizes` has one more entry than `cdf`; the last is the tail
// size); a would-be leftover of 1 is absorbed into its group.
std::vector<uint32_t> draw_group_sizes(uint32_t quota, const double* cdf, const uint32_t* sizes,
                                       size_t n_cdf, Rng& rng) {
    std::vector<uint32_t> groups;
    uint32_t remaining = quota;
    while (remaining >= 2) {
        const double u = rng.next_double();
        uint32_t s = sizes[n_cdf];
        for (size_t i = 0; i < n_cdf; ++i) {
            if (u < cdf[i]) {
                s = sizes[i];
                break;
            }
        }
        if (s > remaining) s = remaining;
        if (remaining - s == 1) s = remaining;
        groups.push_back(s);
        remaining -= s;
    }
    return groups;
}

struct PendingSample {
    std::string context;
    bool label = false;
    DupCategory category = DupCategory::Unique;
    uint32_t group = 0;
    std::string language;
};

} // namespace

SynthResult generate(const SynthPlan& plan) {
    if (plan.n_total == 0) throw ValidationError("n_total must be positive");
    if (plan.n_total > 1000000) throw ValidationError("n_total too large (limit 1000000)");
    for (double f : {plan.frac_exact, plan.frac_near, plan.frac_unique}) {
        if (!(f >= 0.0 && f <= 1.0))
            throw ValidationError("category fractions must lie in [0, 1]");
    }
    if (std::fabs(plan.frac_exact + plan.frac_near + plan.frac_unique - 1.0) > 1e-9)
        throw ValidationError("category fractions must sum to 1");
    if (!(plan.positive_rate >= 0.0 && plan.positive_rate <= 1.0))
        throw ValidationError("positive_rate must lie in [0, 1]");
    if (!(plan.near_edit_rate > 0.0 && plan.near_edit_rate < 1.0))
        throw ValidationError("near_edit_rate must lie in (0, 1)");

    const size_t edits = std::max<size_t>(
        1, static_cast<size_t>(std::floor(plan.near_edit_rate * static_cast<double>(kSlots))));
    // An edited copy shares kSlots - edits of kSlots + edits distinct tokens
    // with its base; that ratio is both its set and multiset similarity.
    const double pair_similarity = static_cast<double>(kSlots - edits) /
                                   static_cast<double>(kSlots + edits);
    if (!(pair_similarity > 0.8 && pair_similarity > 0.7)) {
        throw ValidationError("near_edit_rate " + std::to_string(plan.near_edit_rate) +
                              " pushes edited copies below the near-duplicate thresholds");
    }

    const double n = static_cast<double>(plan.n_total);
    uint32_t n_exact = static_cast<uint32_t>(std::llround(plan.frac_exact * n));
    uint32_t n_near = static_cast<uint32_t>(std::llround(plan.frac_near * n));
    while (n_exact + n_near > plan.n_total) {
        (n_exact >= n_near ? n_exact : n_near) -= 1;
    }
    const uint32_t n_unique = plan.n_total - n_exact - n_near;
    if (n_exact == 1)
        throw ValidationError("infeasible plan: one exact-category sample cannot form a group");
    if (n_near == 1)
        throw ValidationError("infeasible plan: one near-category sample cannot form a cluster");

    Rng rng(derive_seed(plan.seed, "synth"));
    TokenMint mint;
    const std::vector<std::string> pos_pool = expand_pool(kPositiveStems);
    const std::vector<std::string> neg_pool = expand_pool(kNegativeStems);
    const std::vector<std::string> filler_pool = expand_pool(kFillerStems);
    static const char* languages[5] = {"java", "python", "javascript", "go", "ruby"};

    // Skews toward pairs with a tail of larger groups, loosely echoing the
    // heavy-tailed copy counts real corpora show.
    static const double exact_cdf[] = {0.50, 0.75, 0.88, 0.95};
    static const uint32_t exact_sizes[] = {2, 3, 4, 6, 10};
    static const double near_cdf[] = {0.70, 0.90};
    static const uint32_t near_sizes[] = {2, 3, 4};
    const std::vector<uint32_t> exact_groups =
        draw_group_sizes(n_exact, exact_cdf, exact_sizes, 4, rng);
    const std::vector<uint32_t> near_clusters =
        draw_group_sizes(n_near, near_cdf, near_sizes, 2, rng);

    // One generation unit per exact group, near cluster, and unique sample;
    // labels are dealt greedily over a shuffled unit order so each unit is
    // single-label and the corpus-wide positive count lands on target.
    struct Unit {
        DupCategory category;
        uint32_t group; // 1-based within category; 0 for uniques
        uint32_t size;
    };
    std::vector<Unit> units;
    for (uint32_t g = 0; g < exact_groups.size(); ++g)
        units.push_back({DupCategory::Exact, g + 1, exact_groups[g]});
    for (uint32_t c = 0; c < near_clusters.size(); ++c)
        units.push_back({DupCategory::Near, c + 1, near_clusters[c]});
    for (uint32_t u = 0; u < n_unique; ++u) units.push_back({DupCategory::Unique, 0, 1});

    std::vector<size_t> unit_order(units.size());
    std::iota(unit_order.begin(), unit_order.end(), size_t{0});
    rng.shuffle(unit_order);
    const uint32_t target_pos =
        static_cast<uint32_t>(std::llround(plan.positive_rate * n));
    std::vector<bool> unit_label(units.size(), false);
    uint32_t assigned_pos = 0;
    for (size_t idx : unit_order) {
        if (assigned_pos + units[idx].size <= target_pos) {
            unit_label[idx] = true;
            assigned_pos += units[idx].size;
        }
    }

    std::vector<PendingSample> pending;
    pending.reserve(plan.n_total);
    for (size_t idx = 0; idx < units.size(); ++idx) {
        const Unit& unit = units[idx];
        const bool label = unit_label[idx];
        const std::string language = languages[rng.below(5)];
        const std::vector<std::string> base =
            base_tokens(label, pos_pool, neg_pool, filler_pool, mint, rng);

        if (unit.category == DupCategory::Exact) {
            const std::string context = render_context(base);
            for (uint32_t m = 0; m < unit.size; ++m)
                pending.push_back({context, label, unit.category, unit.group, language});
        } else if (unit.category == DupCategory::Near) {
            pending.push_back({render_context(base), label, unit.category, unit.group, language});
            for (uint32_t m = 1; m < unit.size; ++m) {
                std::vector<std::string> copy = base;
                for (size_t slot : draw_distinct(kSlots, edits, rng)) copy[slot] = mint.next();
                pending.push_back(
                    {render_context(copy), label, unit.category, unit.group, language});
            }
        } else {
            pending.push_back({render_context(base), label, unit.category, 0, language});
        }
    }

    std::vector<size_t> emit_order(pending.size());
    std::iota(emit_order.begin(), emit_order.end(), size_t{0});
    rng.shuffle(emit_order);

    SynthResult result;
    result.corpus.samples.reserve(pending.size());
    result.truth.reserve(pending.size());
    for (size_t pos = 0; pos < emit_order.size(); ++pos) {
        PendingSample& p = pending[emit_order[pos]];
        char id[24];
        std::snprintf(id, sizeof id, "s%06lu", static_cast<unsigned long>(pos));
        Sample sample;
        sample.id = id;
        sample.context = std::move(p.context);
        sample.label = p.label;
        sample.language = p.language;
        result.corpus.samples.push_back(std::move(sample));
        result.truth.push_back({id, p.category, p.group});
    }
    return result;
}

void save_truth(const std::vector<TruthEntry>& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write truth file: " + path);
    for (const TruthEntry& entry : truth) {
        const json record{{"id", entry.id},
                          {"category", std::string(to_string(entry.category))},
                          {"group", entry.group}};
        out << record.dump() << '\n';
    }
    if (!out) throw IoError("failed writing truth file: " + path);
}

std::vector<TruthEntry> load_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open truth file: " + path);
    std::vector<TruthEntry> truth;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json record = json::parse(line);
            TruthEntry entry;
            entry.id = record.at("id").get<std::string>();
            entry.category = category_from_string(record.at("category").get<std::string>());
            entry.group = record.at("group").get<uint32_t>();
            truth.push_back(std::move(entry));
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": bad truth record: " + e.what());
        }
    }
    return truth;
}

} // namespace leakscan
