#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cbdt/dataset.hpp"

namespace cbdt {

struct PeheResult {
  double pehe_sq = 0.0;    // mean squared deviation between estimated and true effects
  double pehe_sqrt = 0.0;  // its square root, the scale most tables report
};

PeheResult pehe(std::span<const double> tau_hat, std::span<const double> tau_true);

double ate_error(double tau_hat_ate, double tau_true_ate);

// PEHE / -log10(train_s * infer_ms / 1000). Requires the time product to be
// inside (0, 1); outside that the formula is singular or negative and we
// refuse to report a misleading number.
double eap(double pehe_value, double train_time_s, double infer_time_ms);

struct TimingSample {
  double train_time_s = 0.0;
  double inference_ms_per_sample = 0.0;
  int repetitions = 0;
  int warmup_discarded = 0;
};

// Mean wall-clock seconds of `run` over `repetitions - warmup` timed calls,
// after `warmup` discarded calls. Must not run concurrently with other
// measurements in the same process.
double measure_timing(const std::function<void()>& run, int repetitions, int warmup);

// ----------------------------------------------------------------------------
// Bootstrap machinery
// ----------------------------------------------------------------------------

// ATE estimator over a row subset of a fixed dataset; built once per dataset
// so bootstrap replications only pay for the re-aggregation.
using AteEstimator = std::function<double(const std::vector<int>& rows)>;
using AteEstimatorFactory = std::function<AteEstimator(const CausalDataset&)>;

struct BootstrapCi {
  double lo = 0.0;
  double hi = 0.0;
  double point = 0.0;
};

// Percentile interval over `draws` stratified resamples (with replacement,
// per treatment arm). A resample that empties an arm is redrawn a bounded
// number of times before erroring.
BootstrapCi bootstrap_ci(const AteEstimator& estimator, const CausalDataset& ds, int draws,
                         double level, uint64_t seed);

// Fraction of outer seeds whose bootstrap CI covers true_ate. Each outer seed
// draws a fresh dataset from `dataset_for_seed` and builds its estimator via
// the factory.
double bootstrap_coverage(const AteEstimatorFactory& factory,
                          const std::function<CausalDataset(uint64_t)>& dataset_for_seed,
                          double true_ate, int outer_seeds, int draws, double level,
                          uint64_t root_seed);

// Doubly robust (AIPW) estimator factory using cross-fitted gradient-boosted
// nuisances; this is the default estimator behind coverage reports.
AteEstimatorFactory dr_ate_estimator_factory(int nuisance_rounds, uint64_t seed);

}  // namespace cbdt
