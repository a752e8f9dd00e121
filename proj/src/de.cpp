#include "leakscan/de.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "leakscan/error.hpp"
#include "leakscan/metrics.hpp"
#include "leakscan/rng.hpp"

namespace leakscan {

namespace {

void check_config(const DEConfig& config) {
    if (config.population_size < 4)
        throw ValidationError("population size must be at least 4 for rand/1 mutation");
    if (!(config.mutation_factor > 0.0 && config.mutation_factor <= 2.0))
        throw ValidationError("mutation factor must lie in (0, 2]");
    if (!(config.crossover_rate >= 0.0 && config.crossover_rate <= 1.0))
        throw ValidationError("crossover rate must lie in [0, 1]");
    if (config.bounds.empty()) throw ValidationError("search space has no dimensions");
    for (size_t j = 0; j < config.bounds.size(); ++j) {
        const auto& [lo, hi] = config.bounds[j];
        if (!(lo < hi))
            throw ValidationError("bounds for dimension " + std::to_string(j) +
                                  " are empty (lo >= hi)");
    }
    for (uint32_t d : config.integer_dims) {
        if (d >= config.bounds.size())
            throw ValidationError("integer dimension " + std::to_string(d) +
                                  " is outside the search space");
    }
    if (config.initial && config.initial->size() != config.bounds.size())
        throw ValidationError("initial vector dimension mismatch");
}

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Integer dimensions are kept continuous inside the population and snapped
// to the grid only at evaluation time, so the difference vectors retain
// sub-integer resolution.
std::vector<double> decode(const std::vector<double>& x, const DEConfig& config) {
    std::vector<double> out = x;
    for (uint32_t d : config.integer_dims) {
        out[d] = clip(std::floor(out[d] + 0.5), config.bounds[d].first, config.bounds[d].second);
    }
    return out;
}

double evaluate(const Objective& objective, const std::vector<double>& x,
                const DEConfig& config) {
    const double f = objective(decode(x, config));
    return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
}

} // namespace

DEResult optimize(const Objective& objective, const DEConfig& config) {
    check_config(config);
    const size_t np = config.population_size;
    const size_t dims = config.bounds.size();
    Rng rng(config.seed);

    auto random_member = [&]() {
        std::vector<double> x(dims);
        for (size_t j = 0; j < dims; ++j)
            x[j] = rng.uniform(config.bounds[j].first, config.bounds[j].second);
        return x;
    };

    std::vector<std::vector<double>> population;
    population.reserve(np);
    if (config.initial) {
        std::vector<double> seed_vec = *config.initial;
        for (size_t j = 0; j < dims; ++j)
            seed_vec[j] = clip(seed_vec[j], config.bounds[j].first, config.bounds[j].second);
        population.push_back(std::move(seed_vec));
    }
    while (population.size() < np) population.push_back(random_member());

    std::vector<double> fitness(np);
    for (size_t i = 0; i < np; ++i) fitness[i] = evaluate(objective, population[i], config);

    size_t best_index = 0;
    for (size_t i = 1; i < np; ++i) {
        if (fitness[i] > fitness[best_index]) best_index = i;
    }

    DEResult result;
    result.history.reserve(config.generations + 1);
    result.history.push_back(fitness[best_index]);

    for (uint32_t gen = 0; gen < config.generations; ++gen) {
        // Donors come from the frozen start-of-generation population; trials
        // replace their targets only after the full generation is evaluated.
        const std::vector<std::vector<double>> snapshot = population;
        std::vector<std::vector<double>> trials(np);
        for (size_t i = 0; i < np; ++i) {
            size_t r1, r2, r3;
            do { r1 = rng.below(np); } while (r1 == i);
            do { r2 = rng.below(np); } while (r2 == i || r2 == r1);
            do { r3 = rng.below(np); } while (r3 == i || r3 == r1 || r3 == r2);

            const size_t jrand = rng.below(dims);
            std::vector<double> trial = snapshot[i];
            for (size_t j = 0; j < dims; ++j) {
                const bool cross = rng.next_double() < config.crossover_rate;
                if (cross || j == jrand) {
                    const double mutant =
                        snapshot[r1][j] +
                        config.mutation_factor * (snapshot[r2][j] - snapshot[r3][j]);
                    trial[j] = clip(mutant, config.bounds[j].first, config.bounds[j].second);
                }
            }
            trials[i] = std::move(trial);
        }
        for (size_t i = 0; i < np; ++i) {
            const double f = evaluate(objective, trials[i], config);
            if (f > fitness[i]) {
                population[i] = std::move(trials[i]);
                fitness[i] = f;
                if (f > fitness[best_index]) best_index = i;
            }
        }
        // Selection never discards a better incumbent, so this re-scan only
        // moves the index; the best fitness itself cannot decrease.
        for (size_t i = 0; i < np; ++i) {
            if (fitness[i] > fitness[best_index]) best_index = i;
        }
        result.history.push_back(fitness[best_index]);
    }

    result.best = decode(population[best_index], config);
    result.best_fitness = fitness[best_index];
    return result;
}

TuneResult tune_classifier(const std::vector<LabeledFingerprint>& train_set,
                           const std::vector<LabeledFingerprint>& val_set, DEConfig config) {
    if (val_set.empty()) throw ValidationError("validation set is empty");
    bool has_pos = false, has_neg = false;
    for (const LabeledFingerprint& s : train_set) (s.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw ValidationError("training set must contain both classes");

    // Dimension 0: log10(smoothing); dimension 1: min_df (integer grid).
    config.bounds = {{-3.0, 1.0}, {1.0, 10.0}};
    config.integer_dims = {1};
    const ClassifierParams defaults;
    config.initial = std::vector<double>{std::log10(defaults.smoothing),
                                         static_cast<double>(defaults.min_df)};

    std::vector<bool> truth;
    truth.reserve(val_set.size());
    for (const LabeledFingerprint& s : val_set) truth.push_back(s.label);

    Objective objective = [&](const std::vector<double>& x) {
        ClassifierParams params;
        params.smoothing = std::pow(10.0, x[0]);
        params.min_df = static_cast<uint32_t>(x[1]);
        const TrainedModel model = train(train_set, params);
        std::vector<bool> predicted;
        predicted.reserve(val_set.size());
        for (const LabeledFingerprint& s : val_set)
            predicted.push_back(predict(model, *s.fingerprint).label);
        return compute_metrics(confusion(truth, predicted)).f1;
    };

    const DEResult de = optimize(objective, config);
    TuneResult result;
    result.params.smoothing = std::pow(10.0, de.best[0]);
    result.params.min_df = static_cast<uint32_t>(de.best[1]);
    result.best_fitness = de.best_fitness;
    result.history = de.history;
    return result;
}

} // namespace leakscan
