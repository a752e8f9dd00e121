#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "leakscan/error.hpp"
#include "leakscan/model.hpp"

using namespace leakscan;
namespace fs = std::filesystem;

namespace {

Fingerprint fp(std::initializer_list<std::pair<const std::string, uint32_t>> init) {
    Fingerprint f;
    f.counts = std::map<std::string, uint32_t>(init);
    return f;
}

// Keeps fingerprints alive for the LabeledFingerprint pointers.
struct TrainSet {
    std::vector<Fingerprint> store;
    std::vector<LabeledFingerprint> samples;

    void add(Fingerprint f, bool label) {
        store.reserve(64); // never reallocate under the pointers
        REQUIRE(store.size() < 64);
        store.push_back(std::move(f));
        samples.push_back({&store.back(), label});
    }
};

} // namespace

TEST_SUITE("model") {

TEST_CASE("separable tokens separate") {
    TrainSet ts;
    ts.add(fp({{"foo", 1}}), true);
    ts.add(fp({{"foo", 1}}), true);
    ts.add(fp({{"bar", 1}}), false);
    ts.add(fp({{"bar", 1}}), false);
    const TrainedModel m = train(ts.samples, {});

    const Prediction pos = predict(m, fp({{"foo", 1}}));
    const Prediction neg = predict(m, fp({{"bar", 1}}));
    CHECK(pos.label);
    CHECK_FALSE(neg.label);
    CHECK(pos.score > 0.5);
    CHECK(neg.score < 0.5);
    CHECK(pos.score > neg.score);
}

TEST_CASE("huge smoothing washes out the evidence") {
    TrainSet ts;
    ts.add(fp({{"foo", 1}}), true);
    ts.add(fp({{"bar", 1}}), false);
    ClassifierParams params;
    params.smoothing = 1e9;
    const TrainedModel m = train(ts.samples, params);
    // With alpha this large every token likelihood is ~uniform, so the
    // score collapses to the (balanced) prior.
    CHECK(predict(m, fp({{"foo", 1}})).score == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("a duplicated sample counts twice") {
    TrainSet once;
    once.add(fp({{"tok", 1}}), true);
    once.add(fp({{"tok", 1}}), true);
    once.add(fp({{"other", 1}}), false);
    const TrainedModel m = train(once.samples, {});
    CHECK(m.class_totals[1] == 2);
    CHECK(m.counts[1][m.vocab_index.at("tok")] == 2);
    // The prior moves with the duplicate as well: 2 of 3 samples positive.
    CHECK(m.priors[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("empty fingerprint falls back to the prior") {
    TrainSet ts;
    ts.add(fp({{"p", 1}}), true);
    ts.add(fp({{"n1", 1}}), false);
    ts.add(fp({{"n2", 1}}), false);
    ts.add(fp({{"n3", 1}}), false);
    ts.add(fp({{"n4", 1}}), false);
    const TrainedModel m = train(ts.samples, {});
    const Prediction p = predict(m, fp({}));
    CHECK(p.score == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_FALSE(p.label);
}

TEST_CASE("out-of-vocabulary tokens are ignored") {
    TrainSet ts;
    ts.add(fp({{"alpha", 2}}), true);
    ts.add(fp({{"beta", 2}}), false);
    const TrainedModel m = train(ts.samples, {});
    const double base = predict(m, fp({{"alpha", 1}})).score;
    const double with_oov =
        predict(m, fp({{"alpha", 1}, {"never_seen", 5}, {"also_new", 1}})).score;
    CHECK(base == doctest::Approx(with_oov).epsilon(1e-12));
    // An all-OOV fingerprint behaves like an empty one.
    CHECK(predict(m, fp({{"never_seen", 3}})).score ==
          doctest::Approx(predict(m, fp({})).score).epsilon(1e-12));
}

TEST_CASE("flipping all labels mirrors the score") {
    TrainSet ts, flipped;
    const std::pair<Fingerprint, bool> rows[] = {
        {fp({{"a", 2}, {"b", 1}}), true},
        {fp({{"a", 1}, {"c", 3}}), true},
        {fp({{"c", 2}}), false},
        {fp({{"b", 1}, {"c", 1}}), false},
        {fp({{"d", 4}}), false},
    };
    for (const auto& [f, label] : rows) {
        ts.add(f, label);
        flipped.add(f, !label);
    }
    const TrainedModel m1 = train(ts.samples, {});
    const TrainedModel m2 = train(flipped.samples, {});
    const Fingerprint probe = fp({{"a", 1}, {"c", 2}, {"d", 1}});
    CHECK(predict(m1, probe).score + predict(m2, probe).score ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("long fingerprints do not underflow") {
    TrainSet ts;
    ts.add(fp({{"x", 3}, {"y", 1}}), true);
    ts.add(fp({{"y", 2}, {"z", 2}}), false);
    const TrainedModel m = train(ts.samples, {});
    Fingerprint huge;
    huge.counts["x"] = 5000;
    huge.counts["y"] = 3000;
    huge.counts["z"] = 2000;
    const Prediction p = predict(m, huge);
    CHECK(std::isfinite(p.score));
    CHECK(p.score >= 0.0);
    CHECK(p.score <= 1.0);
    CHECK(p.score > 0.5); // x dominates and x is a positive token
}

TEST_CASE("memorized contexts outscore fresh ones") {
    // The mechanism behind duplication-inflated metrics: a context whose
    // tokens were all seen in training scores far higher than a disjoint
    // one, even at identical labels.
    TrainSet ts;
    for (int i = 0; i < 5; ++i) {
        Fingerprint f;
        f.counts["secret_tok_" + std::to_string(i)] = 2;
        f.counts["shared_pos"] = 1;
        ts.add(std::move(f), true);
    }
    for (int i = 0; i < 5; ++i) {
        Fingerprint f;
        f.counts["plain_tok_" + std::to_string(i)] = 2;
        f.counts["shared_neg"] = 1;
        ts.add(std::move(f), false);
    }
    const TrainedModel m = train(ts.samples, {});
    const double memorized = predict(m, *ts.samples[0].fingerprint).score;
    Fingerprint fresh;
    fresh.counts["brand_new_a"] = 2;
    fresh.counts["brand_new_b"] = 1;
    const double unseen = predict(m, fresh).score;
    CHECK(memorized > unseen);
    CHECK(memorized > 0.5);
}

TEST_CASE("min_df prunes rare tokens from the vocabulary") {
    TrainSet ts;
    ts.add(fp({{"common", 1}, {"rare1", 1}}), true);
    ts.add(fp({{"common", 1}, {"rare2", 1}}), false);
    ClassifierParams params;
    params.min_df = 2;
    const TrainedModel m = train(ts.samples, params);
    CHECK(m.vocabulary == std::vector<std::string>{"common"});
    CHECK(m.vocab_index.count("rare1") == 0);
    // Document frequency counts documents, not occurrences.
    TrainSet ts2;
    ts2.add(fp({{"burst", 9}}), true);
    ts2.add(fp({{"other", 1}}), false);
    const TrainedModel m2 = train(ts2.samples, params);
    CHECK(m2.vocabulary.empty());
}

TEST_CASE("threshold comparison is strict") {
    // A perfectly balanced model scores an empty probe exactly 0.5; the
    // strict > keeps the label negative.
    TrainSet ts;
    ts.add(fp({{"p", 1}}), true);
    ts.add(fp({{"n", 1}}), false);
    const TrainedModel m = train(ts.samples, {});
    const Prediction p = predict(m, fp({}));
    CHECK(p.score == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(p.label);
}

TEST_CASE("parameter and training-set validation") {
    TrainSet ts;
    ts.add(fp({{"a", 1}}), true);
    ts.add(fp({{"b", 1}}), false);

    ClassifierParams bad;
    bad.smoothing = 0.0;
    CHECK_THROWS_WITH_AS(train(ts.samples, bad),
                         doctest::Contains("smoothing must be > 0"),
                         ValidationError);
    bad = {};
    bad.min_df = 0;
    CHECK_THROWS_WITH_AS(train(ts.samples, bad),
                         doctest::Contains("min_df must be >= 1"),
                         ValidationError);
    bad = {};
    bad.threshold = 1.0;
    CHECK_THROWS_WITH_AS(train(ts.samples, bad),
                         doctest::Contains("threshold must lie in (0, 1)"),
                         ValidationError);

    CHECK_THROWS_WITH_AS(train({}, {}),
                         doctest::Contains("training set is empty"),
                         ValidationError);

    TrainSet single;
    single.add(fp({{"a", 1}}), true);
    single.add(fp({{"b", 1}}), true);
    CHECK_THROWS_WITH_AS(train(single.samples, {}),
                         doctest::Contains("both classes"), ValidationError);

    std::vector<LabeledFingerprint> null_fp{{nullptr, true}};
    CHECK_THROWS_WITH_AS(train(null_fp, {}),
                         doctest::Contains("no fingerprint"), ValidationError);
}

TEST_CASE("gather_labeled pairs ids with their data") {
    FingerprintMap fps;
    fps["a"] = fp({{"x", 1}});
    fps["b"] = fp({{"y", 1}});
    std::unordered_map<std::string, bool> labels{{"a", true}, {"b", false}};

    const auto rows = gather_labeled({"a", "b"}, fps, labels);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].fingerprint == &fps.at("a"));
    CHECK(rows[0].label);
    CHECK_FALSE(rows[1].label);

    CHECK_THROWS_WITH_AS(gather_labeled({"ghost"}, fps, labels),
                         doctest::Contains("no fingerprint for id \"ghost\""),
                         ValidationError);
    FingerprintMap with_c = fps;
    with_c["c"] = fp({{"z", 1}});
    CHECK_THROWS_WITH_AS(gather_labeled({"c"}, with_c, labels),
                         doctest::Contains("no label for id \"c\""),
                         ValidationError);
}

TEST_CASE("model file roundtrip preserves predictions") {
    TrainSet ts;
    ts.add(fp({{"key", 3}, {"val", 1}}), true);
    ts.add(fp({{"key", 1}, {"num", 2}}), true);
    ts.add(fp({{"num", 2}, {"idx", 2}}), false);
    ts.add(fp({{"idx", 1}, {"val", 1}}), false);
    ClassifierParams params;
    params.smoothing = 0.25;
    params.min_df = 1;
    const TrainedModel m = train(ts.samples, params);

    const fs::path path = fs::temp_directory_path() / "leakscan_model.json";
    save_model(m, path);
    const TrainedModel back = load_model(path);
    fs::remove(path);

    CHECK(back.vocabulary == m.vocabulary);
    CHECK(back.class_totals == m.class_totals);
    CHECK(back.params.smoothing == doctest::Approx(m.params.smoothing));
    CHECK(back.params.min_df == m.params.min_df);

    const Fingerprint probes[] = {fp({{"key", 2}}), fp({{"idx", 1}, {"num", 1}}),
                                  fp({{"key", 1}, {"val", 2}, {"zzz", 1}})};
    for (const Fingerprint& probe : probes) {
        const Prediction p1 = predict(m, probe);
        const Prediction p2 = predict(back, probe);
        CHECK(p1.score == doctest::Approx(p2.score).epsilon(1e-12));
        CHECK(p1.label == p2.label);
    }
}

TEST_CASE("load_model rejects foreign files") {
    const fs::path path = fs::temp_directory_path() / "leakscan_not_model.json";
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\"}\n";
    }
    CHECK_THROWS_AS(load_model(path), ValidationError);
    fs::remove(path);
    CHECK_THROWS_AS(load_model("/nonexistent/leakscan_model.json"), IoError);
}

} // TEST_SUITE
