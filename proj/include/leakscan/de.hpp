#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "leakscan/model.hpp"

namespace leakscan {

/// Differential Evolution (rand/1/bin) over a box-constrained vector.
struct DEConfig {
    uint32_t population_size = 12; // >= 4: rand/1 needs three distinct partners
    uint32_t generations = 20;
    double mutation_factor = 0.8;  // F in (0, 2]
    double crossover_rate = 0.9;   // CR in [0, 1]
    std::vector<std::pair<double, double>> bounds; // per-dimension [lo, hi], lo < hi
    std::set<uint32_t> integer_dims; // rounded (then clipped) before evaluation
    uint64_t seed = 0;
    std::optional<std::vector<double>> initial; // injected as population member 0
};

struct DEResult {
    std::vector<double> best; // decoded: integer dims are integral
    double best_fitness = 0.0;
    std::vector<double> history; // best-so-far after init and each generation
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Maximizes `objective`. Per target i: mutant = x_r1 + F*(x_r2 - x_r3) with
/// distinct r1,r2,r3 != i, clipped to bounds; binomial crossover with one
/// forced dimension; greedy selection with ties keeping the incumbent.
/// Non-finite fitness values are treated as -inf and never win. The
/// best-so-far history is non-decreasing; everything is a pure function of
/// (objective, config).
DEResult optimize(const Objective& objective, const DEConfig& config);

struct TuneResult {
    ClassifierParams params;
    double best_fitness = 0.0;       // F1 on the validation set
    std::vector<double> history;
};

/// Tunes the classifier by maximizing F1 on `val` of a model trained on
/// `train`. Search space: log10(smoothing) in [-3, 1], min_df in [1, 10]
/// (integer dimension). The default parameters seed the population, so the
/// result never scores below the untuned baseline on validation.
TuneResult tune_classifier(const std::vector<LabeledFingerprint>& train,
                           const std::vector<LabeledFingerprint>& val,
                           DEConfig config);

} // namespace leakscan
