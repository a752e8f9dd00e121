#include "leakscan/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "leakscan/error.hpp"

namespace leakscan {

ConfusionMatrix confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted) {
    if (truth.size() != predicted.size()) {
        throw ValidationError("confusion: " + std::to_string(truth.size()) +
                              " truth labels vs " + std::to_string(predicted.size()) +
                              " predictions");
    }
    ConfusionMatrix cm;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i]) {
            ++(predicted[i] ? cm.tp : cm.fn);
        } else {
            ++(predicted[i] ? cm.fp : cm.tn);
        }
    }
    return cm;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    const uint64_t total = cm.tp + cm.fp + cm.tn + cm.fn;
    if (total == 0) throw ValidationError("empty confusion matrix");
    const double tp = static_cast<double>(cm.tp);
    const double fp = static_cast<double>(cm.fp);
    const double tn = static_cast<double>(cm.tn);
    const double fn = static_cast<double>(cm.fn);

    Metrics m;
    if (cm.tp + cm.fp > 0) m.precision = tp / (tp + fp);
    if (cm.tp + cm.fn > 0) m.recall = tp / (tp + fn);
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    // MCC in doubles: the radicand product overflows 64-bit integers well
    // below realistic corpus sizes.
    const double radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (radicand > 0.0) m.mcc = (tp * tn - fp * fn) / std::sqrt(radicand);
    return m;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("paired t-test: sample sizes differ (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) throw ValidationError("paired t-test needs at least 2 pairs");

    const size_t n = a.size();
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double variance = ss / static_cast<double>(n - 1);

    TTestResult result;
    result.df = static_cast<uint32_t>(n - 1);
    if (variance == 0.0) {
        // Degenerate case: every fold moved by the same amount. A zero mean
        // is "no difference" (p = 1); any other constant shift is maximally
        // significant, reported with a p = 0 sentinel.
        if (mean == 0.0) {
            result.statistic = 0.0;
            result.p_value = 1.0;
        } else {
            result.statistic = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
            result.p_value = 0.0;
        }
        return result;
    }
    result.statistic = mean / std::sqrt(variance / static_cast<double>(n));
    const boost::math::students_t dist(static_cast<double>(result.df));
    result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(result.statistic)));
    return result;
}

namespace {

// Accumulates one metric field across folds: mean and sample stddev (n-1;
// zero for a single fold).
void mean_stddev(const std::vector<Metrics>& folds, double Metrics::*field, double& mean_out,
                 double& stddev_out) {
    const size_t n = folds.size();
    double mean = 0.0;
    for (const Metrics& m : folds) mean += m.*field;
    mean /= static_cast<double>(n);
    mean_out = mean;
    if (n < 2) {
        stddev_out = 0.0;
        return;
    }
    double ss = 0.0;
    for (const Metrics& m : folds) {
        const double d = m.*field - mean;
        ss += d * d;
    }
    stddev_out = std::sqrt(ss / static_cast<double>(n - 1));
}

} // namespace

MetricsReport summarize_folds(const std::string& scenario,
                              const std::vector<ConfusionMatrix>& fold_cms) {
    if (fold_cms.empty()) throw ValidationError("no folds to summarize");
    MetricsReport report;
    report.scenario = scenario;
    for (const ConfusionMatrix& cm : fold_cms) {
        report.fold_metrics.push_back(compute_metrics(cm));
        report.pooled_cm.tp += cm.tp;
        report.pooled_cm.fp += cm.fp;
        report.pooled_cm.tn += cm.tn;
        report.pooled_cm.fn += cm.fn;
    }
    mean_stddev(report.fold_metrics, &Metrics::precision, report.mean.precision,
                report.stddev.precision);
    mean_stddev(report.fold_metrics, &Metrics::recall, report.mean.recall, report.stddev.recall);
    mean_stddev(report.fold_metrics, &Metrics::f1, report.mean.f1, report.stddev.f1);
    mean_stddev(report.fold_metrics, &Metrics::mcc, report.mean.mcc, report.stddev.mcc);
    report.pooled = compute_metrics(report.pooled_cm);
    return report;
}

DegradationReport degradation_report(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ValidationError("degradation report needs at least one scenario");
    const MetricsReport& base = reports.front();

    DegradationReport out;
    out.rows.push_back({base.scenario, base.mean.mcc, 0.0, 0.0, 1.0});
    for (size_t i = 1; i < reports.size(); ++i) {
        const MetricsReport& r = reports[i];
        DegradationRow row;
        row.scenario = r.scenario;
        row.mcc = r.mean.mcc;
        row.mcc_drop = base.mean.mcc - r.mean.mcc;
        row.degradation_pct =
            base.mean.mcc != 0.0 ? row.mcc_drop / base.mean.mcc * 100.0 : 0.0;
        if (r.fold_metrics.size() != base.fold_metrics.size()) {
            throw ValidationError("degradation report: scenario \"" + r.scenario + "\" has " +
                                  std::to_string(r.fold_metrics.size()) + " folds, baseline has " +
                                  std::to_string(base.fold_metrics.size()));
        }
        if (base.fold_metrics.size() >= 2) {
            std::vector<double> a, b;
            for (const Metrics& m : base.fold_metrics) a.push_back(m.mcc);
            for (const Metrics& m : r.fold_metrics) b.push_back(m.mcc);
            row.p_value = paired_ttest(a, b).p_value;
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string render_metrics_table(const MetricsReport& report) {
    char line[160];
    std::ostringstream out;
    out << "Scenario: " << report.scenario << '\n';
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s\n", "Classifier", "Precision",
                  "Recall", "F1-Score", "MCC");
    out << line;
    std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.4f %10.4f\n", "bag-of-tokens",
                  report.mean.precision, report.mean.recall, report.mean.f1, report.mean.mcc);
    out << line;
    std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.4f %10.4f\n", "  (std dev)",
                  report.stddev.precision, report.stddev.recall, report.stddev.f1,
                  report.stddev.mcc);
    out << line;
    return out.str();
}

std::string render_degradation_table(const DegradationReport& report) {
    char line[160];
    std::ostringstream out;
    std::snprintf(line, sizeof line, "%-10s %8s %10s %13s %9s\n", "Scenario", "MCC", "MCC drop",
                  "Degradation", "p-value");
    out << line;
    for (size_t i = 0; i < report.rows.size(); ++i) {
        const DegradationRow& row = report.rows[i];
        if (i == 0) {
            std::snprintf(line, sizeof line, "%-10s %8.4f %10s %13s %9s\n", row.scenario.c_str(),
                          row.mcc, "--", "--", "--");
        } else {
            std::snprintf(line, sizeof line, "%-10s %8.4f %10.4f %12.2f%% %9.4f\n",
                          row.scenario.c_str(), row.mcc, row.mcc_drop, row.degradation_pct,
                          row.p_value);
        }
        out << line;
    }
    return out.str();
}

} // namespace leakscan
