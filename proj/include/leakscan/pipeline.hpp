#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakscan/metrics.hpp"
#include "leakscan/splits.hpp"

namespace leakscan {

/// Everything the end-to-end audit needs; mirrors the owning modules'
/// parameter invariants.
struct RunConfig {
    std::string input_path;
    std::string out_dir;
    uint32_t window = 200;
    double t0 = 0.8;
    double t1 = 0.7;
    uint32_t folds = 5;
    double val_frac = 0.1;
    uint64_t seed = 0;
    std::vector<Scenario> scenarios = {Scenario::Mixed, Scenario::Near, Scenario::Unique};
    std::string keywords_path; // empty: built-in list
    bool brute_force = false;
    bool tune = true;
};

struct PipelineResult {
    std::vector<MetricsReport> reports;   // one per scenario, config order
    DegradationReport degradation;
    std::string manifest_path;
};

/// Runs ingest -> fingerprint -> partition -> stats -> splits -> per-fold
/// tune/train/predict -> metrics -> degradation report. Every intermediate
/// artifact lands in `out_dir`; run_manifest.json records the config and a
/// SHA-256 digest per artifact. Failures carry a module-attributed message.
PipelineResult run_pipeline(const RunConfig& config);

/// Hex SHA-256 of a file's bytes (digest of record for manifest entries).
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const std::string& bytes);

} // namespace leakscan
