// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "obr/analysis.hpp"
#include "obr/common.hpp"
#include "obr/detector.hpp"
#include "obr/radar.hpp"

namespace obr {

// Experiment settings. JSON file keys match the field names below with K
// standing for the prior draw count. Defaults are desk scale; the larger
// array sizes from the reference studies stay reachable through the config.
struct ExperimentConfig {
  std::size_t m = 2;
  std::size_t p = 2;
  std::size_t n = 500;
  double phi = 0.25 * kPi;
  double theta = 0.25 * kPi;
  double alpha = 1.0;
  Vec rho = {0.0, 0.01, 0.02, 0.03};
  Vec snr_db = {-15.0, -10.0};
  std::size_t n_trials = 100000;
  std::size_t n_draws = 1000;  // K
  std::uint64_t seed = 20260815;
  // Training/detection windows, consumed by the training runner only: it
  // sweeps `splits`, or the single n1:n2 partition when `splits` is empty.
  std::size_t n1 = 250;
  std::size_t n2 = 250;
  std::vector<std::pair<std::size_t, std::size_t>> splits = {
      {125, 375}, {250, 250}, {375, 125}};
  std::string output_dir = "out";
  std::size_t threads = 0;  // 0 picks the hardware concurrency
  std::size_t gamma_points = 21;
  double pfa_min = 1e-3;
  double tables_tol = 1e-7;
  std::string tables_cache;  // directory for reusable pattern tables

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);
void save_resolved_config(const ExperimentConfig& cfg, const std::string& path);

Vec linspace(double lo, double hi, std::size_t count);
// Log-spaced false alarm grid from pfa_min up to 1.
Vec log_pfa_grid(double pfa_min, std::size_t count);

// Pattern tables for the given coherence, going through the on-disk cache
// directory when one is configured.
NoiseTables cached_noise_tables(const Mat& coherence, double tol,
                                const std::string& cache_dir, RngStream rng);

// Monte Carlo runs of the detection statistic. Each trial l draws n
// quantized snapshots under `truth` with mean beta * w and scores them
// against every table set at once; entry [t][trial] is the statistic for
// table set t. Trials use streams derived from (seed, stream_offset + trial),
// so results are identical for any worker count.
std::vector<Vec> simulate_statistics(
    const std::vector<const DetectorTables*>& tables, const CMat& w,
    const CompositeCovariance& truth, cplx beta, std::size_t n_trials,
    std::uint64_t seed, std::uint64_t stream_offset, std::size_t threads);

// Variant with a per-trial truth covariance, used when the noise covariance
// is redrawn for every trial. The factory gets a dedicated stream per trial.
using TruthFactory = std::function<CompositeCovariance(std::size_t, RngStream&)>;
std::vector<Vec> simulate_statistics_varying(
    const std::vector<const DetectorTables*>& tables, const CMat& w,
    const TruthFactory& truth, cplx beta, std::size_t n_trials,
    std::uint64_t seed, std::uint64_t stream_offset, std::size_t threads);

// Experiment runners. Each writes one CSV and one SVG per parameter
// combination plus a resolved-config copy, and returns the CSV paths.
std::vector<std::string> run_pfa(const ExperimentConfig& cfg);
std::vector<std::string> run_avg_pfa(const ExperimentConfig& cfg);
std::vector<std::string> run_pd(const ExperimentConfig& cfg);
std::vector<std::string> run_roc(const ExperimentConfig& cfg);
std::vector<std::string> run_training(const ExperimentConfig& cfg);

}  // namespace obr
