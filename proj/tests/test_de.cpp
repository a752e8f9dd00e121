#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "leakscan/de.hpp"
#include "leakscan/error.hpp"
#include "leakscan/metrics.hpp"

using namespace leakscan;

namespace {

DEConfig box_config(std::vector<std::pair<double, double>> bounds, uint64_t seed,
                    uint32_t pop = 16, uint32_t gens = 40) {
    DEConfig cfg;
    cfg.population_size = pop;
    cfg.generations = gens;
    cfg.bounds = std::move(bounds);
    cfg.seed = seed;
    return cfg;
}

Fingerprint fp(std::initializer_list<std::pair<const std::string, uint32_t>> init) {
    Fingerprint f;
    f.counts = std::map<std::string, uint32_t>(init);
    return f;
}

} // namespace

TEST_SUITE("de") {

TEST_CASE("finds the peak of a 1-D parabola") {
    const Objective f = [](const std::vector<double>& x) { return -x[0] * x[0]; };
    const DEResult r = optimize(f, box_config({{-5.0, 5.0}}, 4, 16, 30));
    CHECK(std::abs(r.best[0]) < 0.01);
    CHECK(r.best_fitness == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("locates a shifted 2-D optimum across seeds") {
    const Objective f = [](const std::vector<double>& x) {
        const double dx = x[0] - 2.0, dy = x[1] + 3.0;
        return -(dx * dx + dy * dy);
    };
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const DEResult r =
            optimize(f, box_config({{-5.0, 5.0}, {-5.0, 5.0}}, seed, 16, 60));
        CHECK_MESSAGE(std::abs(r.best[0] - 2.0) < 0.05, "seed " << seed);
        CHECK_MESSAGE(std::abs(r.best[1] + 3.0) < 0.05, "seed " << seed);
    }
}

TEST_CASE("best-so-far history never backslides") {
    const Objective f = [](const std::vector<double>& x) {
        return std::sin(3.0 * x[0]) + std::cos(2.0 * x[1]);
    };
    const DEConfig cfg = box_config({{-4.0, 4.0}, {-4.0, 4.0}}, 8, 12, 25);
    const DEResult r = optimize(f, cfg);
    REQUIRE(r.history.size() == cfg.generations + 1);
    for (size_t i = 1; i < r.history.size(); ++i)
        CHECK(r.history[i] >= r.history[i - 1]);
    CHECK(r.history.back() == doctest::Approx(r.best_fitness));
}

TEST_CASE("integer dimensions arrive integral at the objective") {
    std::vector<std::vector<double>> seen;
    const Objective f = [&seen](const std::vector<double>& x) {
        seen.push_back(x);
        return -(x[0] * x[0]) - (x[1] - 4.0) * (x[1] - 4.0);
    };
    DEConfig cfg = box_config({{-5.0, 5.0}, {1.0, 10.0}}, 2, 12, 15);
    cfg.integer_dims = {1};
    const DEResult r = optimize(f, cfg);

    REQUIRE_FALSE(seen.empty());
    for (const auto& x : seen) {
        CHECK(x[1] == std::floor(x[1]));
        CHECK(x[1] >= 1.0);
        CHECK(x[1] <= 10.0);
        CHECK(x[0] >= -5.0);
        CHECK(x[0] <= 5.0);
    }
    CHECK(r.best[1] == 4.0);
}

TEST_CASE("an objective that never returns a number stays at -inf") {
    const Objective f = [](const std::vector<double>&) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    const DEResult r = optimize(f, box_config({{0.0, 1.0}}, 6, 8, 10));
    CHECK(r.best_fitness == -std::numeric_limits<double>::infinity());
    REQUIRE(r.history.size() == 11);
    for (double h : r.history)
        CHECK(h == -std::numeric_limits<double>::infinity());
}

TEST_CASE("a seeded optimum is kept from generation zero") {
    const Objective f = [](const std::vector<double>& x) {
        return -(x[0] - 1.5) * (x[0] - 1.5);
    };
    DEConfig cfg = box_config({{-5.0, 5.0}}, 3, 10, 12);
    cfg.initial = std::vector<double>{1.5};
    const DEResult r = optimize(f, cfg);
    CHECK(r.history[0] == doctest::Approx(0.0));
    CHECK(r.best[0] == doctest::Approx(1.5));
}

TEST_CASE("identical configs give identical runs") {
    const Objective f = [](const std::vector<double>& x) {
        return -std::abs(x[0] * x[1] - 1.0);
    };
    const DEConfig cfg = box_config({{-3.0, 3.0}, {-3.0, 3.0}}, 99, 14, 20);
    const DEResult a = optimize(f, cfg);
    const DEResult b = optimize(f, cfg);
    CHECK(a.best == b.best);
    CHECK(a.best_fitness == b.best_fitness);
    CHECK(a.history == b.history);
}

TEST_CASE("configuration validation") {
    const Objective f = [](const std::vector<double>&) { return 0.0; };

    DEConfig small = box_config({{0.0, 1.0}}, 0, 3);
    CHECK_THROWS_WITH_AS(optimize(f, small),
                         doctest::Contains("population size must be at least 4"),
                         ValidationError);

    DEConfig no_dims = box_config({}, 0);
    CHECK_THROWS_WITH_AS(optimize(f, no_dims),
                         doctest::Contains("no dimensions"), ValidationError);

    DEConfig bad_bounds = box_config({{2.0, 2.0}}, 0);
    CHECK_THROWS_AS(optimize(f, bad_bounds), ValidationError);

    DEConfig bad_f = box_config({{0.0, 1.0}}, 0);
    bad_f.mutation_factor = 0.0;
    CHECK_THROWS_AS(optimize(f, bad_f), ValidationError);

    DEConfig bad_cr = box_config({{0.0, 1.0}}, 0);
    bad_cr.crossover_rate = 1.5;
    CHECK_THROWS_AS(optimize(f, bad_cr), ValidationError);

    DEConfig bad_init = box_config({{0.0, 1.0}, {0.0, 1.0}}, 0);
    bad_init.initial = std::vector<double>{0.5};
    CHECK_THROWS_AS(optimize(f, bad_init), ValidationError);

    DEConfig bad_int = box_config({{0.0, 1.0}}, 0);
    bad_int.integer_dims = {3};
    CHECK_THROWS_AS(optimize(f, bad_int), ValidationError);
}

TEST_CASE("tuning never scores below the untuned defaults") {
    // Overlapping token distributions so defaults are beatable but sane.
    std::vector<Fingerprint> store;
    store.push_back(fp({{"key", 2}, {"shared", 1}}));
    store.push_back(fp({{"key", 1}, {"token", 1}, {"shared", 1}}));
    store.push_back(fp({{"token", 2}, {"noise", 1}}));
    store.push_back(fp({{"shared", 2}, {"noise", 1}}));
    store.push_back(fp({{"noise", 2}, {"shared", 1}}));
    store.push_back(fp({{"noise", 1}, {"filler", 2}}));
    std::vector<LabeledFingerprint> rows;
    const bool labels[] = {true, true, true, false, false, false};
    for (size_t i = 0; i < store.size(); ++i) rows.push_back({&store[i], labels[i]});

    DEConfig cfg;
    cfg.population_size = 8;
    cfg.generations = 10;
    cfg.seed = 5;
    const TuneResult tuned = tune_classifier(rows, rows, cfg);

    // Baseline: defaults trained on the same data, F1 on the same rows.
    const TrainedModel base = train(rows, {});
    ConfusionMatrix cm;
    for (const auto& r : rows) {
        const bool got = predict(base, *r.fingerprint).label;
        if (r.label && got) ++cm.tp;
        else if (!r.label && got) ++cm.fp;
        else if (r.label && !got) ++cm.fn;
        else ++cm.tn;
    }
    const double base_f1 = compute_metrics(cm).f1;
    CHECK(tuned.best_fitness >= base_f1);

    // Tuned parameters stay inside the advertised search box.
    CHECK(tuned.params.smoothing >= 1e-3);
    CHECK(tuned.params.smoothing <= 10.0 * (1 + 1e-9));
    CHECK(tuned.params.min_df >= 1);
    CHECK(tuned.params.min_df <= 10);

    // And the whole tuning run replays exactly.
    const TuneResult again = tune_classifier(rows, rows, cfg);
    CHECK(again.params.smoothing == tuned.params.smoothing);
    CHECK(again.params.min_df == tuned.params.min_df);
    CHECK(again.history == tuned.history);
}

TEST_CASE("tuning validates its inputs") {
    std::vector<Fingerprint> store;
    store.push_back(fp({{"a", 1}}));
    store.push_back(fp({{"b", 1}}));
    std::vector<LabeledFingerprint> both{{&store[0], true}, {&store[1], false}};
    std::vector<LabeledFingerprint> one_class{{&store[0], true}, {&store[1], true}};

    DEConfig cfg;
    cfg.population_size = 6;
    cfg.generations = 3;
    CHECK_THROWS_WITH_AS(tune_classifier(both, {}, cfg),
                         doctest::Contains("validation set is empty"),
                         ValidationError);
    CHECK_THROWS_AS(tune_classifier(one_class, both, cfg), ValidationError);
}

} // TEST_SUITE
