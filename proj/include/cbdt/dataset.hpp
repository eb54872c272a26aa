#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbdt/common.hpp"
#include "cbdt/csv.hpp"

namespace cbdt {

// Immutable after construction; all operations return new datasets.
struct CausalDataset {
  Matrix features;  // n x d, preprocessed, finite
  std::vector<uint8_t> treatment;
  std::vector<double> outcome;
  std::vector<double> mu0, mu1;  // true potential-outcome means; empty when unknown
  std::vector<double> y_cf;      // counterfactual outcomes; empty when unknown
  std::vector<std::string> feature_names;

  int n() const { return features.rows(); }
  int d() const { return features.cols(); }
  int n_treated() const;
  int n_control() const;
  bool has_ground_truth() const { return !mu0.empty() && !mu1.empty(); }
  std::vector<double> true_cate() const;  // mu1 - mu0
  double true_ate() const;

  void validate() const;
};

CausalDataset subset_rows(const CausalDataset& ds, const std::vector<int>& rows);

// ----------------------------------------------------------------------------
// Preprocessing
// ----------------------------------------------------------------------------

enum class Imputation { kMedian, kMultiple };

struct PreprocessSpec {
  double iqr_multiplier = 1.5;
  double zscore_clip_sigma = 3.0;
  std::vector<int> categorical_columns;
  Imputation default_imputation = Imputation::kMedian;
  std::map<int, Imputation> imputation_overrides;
  uint64_t seed = 1;  // used by multiple imputation draws

  void validate() const {
    require(iqr_multiplier > 0.0, "iqr_multiplier must be > 0");
    require(zscore_clip_sigma > 0.0, "zscore_clip_sigma must be > 0");
  }
};

// Column-labelled numeric table prior to preprocessing. NaN marks missing.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int treatment_col = -1;
  int outcome_col = -1;
  // columns copied through untouched (e.g. ground-truth potential outcomes)
  std::map<std::string, int> passthrough;  // role -> column: "mu0", "mu1", "y_cf"
};

struct PreprocessResult {
  CausalDataset data;
  std::vector<std::string> warnings;    // e.g. zero-variance columns
  std::vector<int> kept_rows;           // indices into the raw table
  int rows_removed = 0;
};

// Order of operations: impute missing values per column, drop rows outside
// the IQR fences of any continuous column, z-score continuous columns and
// clip to +-zscore_clip_sigma, one-hot encode categorical columns. Quartiles
// use linear interpolation between order statistics. Treatment and outcome
// are validated but never transformed; outlier removal looks only at
// covariates so it cannot select on outcome.
PreprocessResult preprocess(const RawTable& raw, const PreprocessSpec& spec);

// Linearly interpolated quantile of a sorted vector (the common convention
// where the p-quantile sits at position (n-1)*p).
double quantile_sorted(const std::vector<double>& sorted, double p);

// ----------------------------------------------------------------------------
// File I/O (header row, '.' decimal separator)
// Layout: treatment,y_factual,y_cfactual,mu0,mu1,x1..xd
// ----------------------------------------------------------------------------

CausalDataset load_dataset_csv(const std::string& path);

// Same layout with exactly 25 covariate columns; `path` may be a directory
// holding ihdp_npci_<replicate>.csv files or a single file (optionally with a
// `replicate` column to select from).
CausalDataset load_ihdp_csv(const std::string& path, int replicate);

void save_dataset_csv(const CausalDataset& ds, const std::string& path);

// ----------------------------------------------------------------------------
// Synthetic generators with known effects
// ----------------------------------------------------------------------------

struct SyntheticSpec {
  int n = 2000;
  int d = 10;
  double heterogeneity = 1.0;  // scale of effect variation; 0 gives a constant effect of 2
  double confounding = 1.0;    // strength of treatment dependence on covariates
  double noise_sigma = 1.0;
  uint64_t seed = 1;

  void validate() const {
    require(n >= 10, "synthetic spec: n must be >= 10");
    require(d >= 1, "synthetic spec: d must be >= 1");
    require(heterogeneity >= 0.0, "synthetic spec: heterogeneity must be >= 0");
    require(confounding >= 0.0, "synthetic spec: confounding must be >= 0");
    require(noise_sigma > 0.0, "synthetic spec: noise_sigma must be > 0");
  }
};

// Deterministic under seed. Covariates are standard normal, treatment follows
// a logistic propensity bounded to [0.05, 0.95], and the effect surface is
//   tau(x) = 2 + heterogeneity * (0.6 x_a + 0.8 sin(x_b))
// whose population mean is exactly 2, so the analytic ATE is known.
CausalDataset generate_synthetic(const SyntheticSpec& spec);

double synthetic_true_ate(const SyntheticSpec& spec);

// Piecewise-constant effect: tau = low below the breakpoint on feature 0,
// high above it. Used to check that extracted rules recover the boundary.
struct StepEffectSpec {
  int n = 4000;
  int d = 5;
  double breakpoint = 0.5;
  double effect_low = 1.0;
  double effect_high = 3.0;
  double noise_sigma = 0.5;
  uint64_t seed = 1;
};

CausalDataset generate_step_effect(const StepEffectSpec& spec);

// A 747 x 25 benchmark-shaped surrogate (6 continuous + 19 binary covariates,
// ~20% treated, nonlinear outcome surfaces, known potential-outcome means).
// Replicates differ only by seed.
CausalDataset generate_ihdp_like(int replicate);

// ----------------------------------------------------------------------------

// Stratified by treatment arm so both splits keep both arms; errors when a
// side would lose an arm entirely. Deterministic under seed.
std::pair<CausalDataset, CausalDataset> split_train_test(const CausalDataset& ds, double fraction,
                                                         uint64_t seed);

}  // namespace cbdt
