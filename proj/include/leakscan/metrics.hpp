#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace leakscan {

struct ConfusionMatrix {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t tn = 0;
    uint64_t fn = 0;
};

ConfusionMatrix confusion(const std::vector<bool>& truth,
                          const std::vector<bool>& predicted);

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
};

/// Zero-denominator conventions: precision/recall/F1 are 0 when their
/// denominator is 0; MCC is 0 when any of the four radicand factors is 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

struct TTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    uint32_t df = 0;
};

/// Paired two-sided t-test on per-fold metric values. Requires equal sizes
/// and n >= 2. A zero-variance difference vector yields p = 1.0 when the mean
/// difference is also 0 and p = 0.0 otherwise.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Per-scenario cross-validation summary: per-fold metrics plus their
/// mean/stddev (sample stddev, n-1) and the pooled confusion matrix.
struct MetricsReport {
    std::string scenario;
    std::vector<Metrics> fold_metrics;
    Metrics mean;
    Metrics stddev;
    ConfusionMatrix pooled_cm;
    Metrics pooled; // metrics of the pooled confusion matrix
};

MetricsReport summarize_folds(const std::string& scenario,
                              const std::vector<ConfusionMatrix>& fold_cms);

/// Relative degradation of a scenario against the mixed baseline:
/// (mcc_mixed - mcc_x) / mcc_mixed * 100. Mean-MCC values are used.
struct DegradationRow {
    std::string scenario;
    double mcc = 0.0;
    double mcc_drop = 0.0;        // absolute: mcc_mixed - mcc; 0 for the baseline
    double degradation_pct = 0.0; // relative, in percent; 0 for the baseline row
    double p_value = 1.0;         // paired t-test vs mixed; 1 for the baseline
};

struct DegradationReport {
    std::vector<DegradationRow> rows; // mixed first, then the others in input order
};

DegradationReport degradation_report(const std::vector<MetricsReport>& reports);

/// Human-readable renderings for the CLI `--format table` path.
std::string render_metrics_table(const MetricsReport& report);
std::string render_degradation_table(const DegradationReport& report);

} // namespace leakscan
