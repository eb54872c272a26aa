#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbdt/boosting.hpp"
#include "cbdt/dataset.hpp"
#include "cbdt/objective.hpp"
#include "cbdt/scheduler.hpp"

namespace cbdt {

// How per-iteration fitting targets are formed. Outcome-contrast keeps a
// single outcome head over (t, x) with treatment as feature 0 and reads the
// effect off the prediction contrast; doubly-robust keeps a separate effect
// head over x driven by nuisance-residualized targets.
enum class ResidualMode { kOutcomeContrast, kDoublyRobust };

enum class TauRefSource { kDoublyRobust, kGroundTruth, kFixed };

// Per-sample descent pass applied after each tree. The squared-error part of
// the step is already realized by the tree update itself, so the default
// folds only the regularizer gradients into the working predictions; the
// full-gradient option applies the composite gradient literally.
enum class RefinementMode { kRegularizers, kFullGradient, kOff };

ResidualMode residual_mode_from_string(const std::string& s);
std::string to_string(ResidualMode m);
TauRefSource tau_ref_source_from_string(const std::string& s);
std::string to_string(TauRefSource s);
RefinementMode refinement_mode_from_string(const std::string& s);
std::string to_string(RefinementMode m);

struct BoosterConfig {
  int num_rounds = 300;
  double learning_rate = 0.1;
  ResidualMode residual_mode = ResidualMode::kOutcomeContrast;
  // lambda/alpha are the schedule's initial values
  CompositeLossParams loss{2.0, 0.5, 1.0, 0.0, false};
  ScheduleMode schedule_mode = ScheduleMode::kDynamic;
  double eta = 0.01;
  double eta_prime = 0.01;  // alpha update rate; defaults to eta
  TreeParams tree;
  int nuisance_rounds = 50;
  uint64_t seed = 1;
  TauRefSource tau_ref_source = TauRefSource::kDoublyRobust;
  // the scheduled lambda also serves as the split-gain regularizer unless decoupled
  bool couple_split_lambda = true;
  RefinementMode refinement = RefinementMode::kRegularizers;
  bool trace_predictions = false;  // keep per-iteration working predictions

  void validate() const;
  nlohmann::json to_json() const;
  static BoosterConfig from_json(const nlohmann::json& j);
};

struct TraceRow {
  int k = 0;
  double loss = 0.0;
  double grad_variance = 0.0;
  double lambda = 0.0;  // value used inside this iteration's split gains
  double alpha = 0.0;
  double seconds = 0.0;  // wall clock; excluded from serialization
};

// Cross-fitted nuisance estimates (2 folds). Per-sample values come from the
// fold that did not train on the sample; propensities are clipped to
// [0.01, 0.99].
struct NuisanceModels {
  std::vector<int> fold_of;
  BoostedTrees m_hat[2];    // E[Y | x]
  BoostedTrees mu0_hat[2];  // E[Y | x, t=0]
  BoostedTrees mu1_hat[2];  // E[Y | x, t=1]
  BoostedTrees e_hat[2];    // P(T=1 | x)

  std::vector<double> m_values;    // cross-fitted, aligned with training rows
  std::vector<double> mu0_values;
  std::vector<double> mu1_values;
  std::vector<double> e_values;    // clipped
};

struct BoostedModel {
  BoosterConfig config;
  double base_score = 0.0;
  std::vector<RegressionTree> outcome_trees;  // over (t, x); empty in doubly-robust mode
  std::vector<RegressionTree> effect_trees;   // over x; empty in outcome-contrast mode
  std::vector<TraceRow> trace;
  double tau_ref_used = 0.0;
  std::string tau_ref_provenance;
  std::vector<std::vector<double>> traced_predictions;  // filled when configured

  // factual outcome prediction through the outcome head
  std::vector<double> predict_outcome(const Matrix& x, std::span<const uint8_t> t) const;
  std::vector<double> predict_outcome(const Matrix& x, double t) const;
  std::vector<double> predict_cate(const Matrix& x) const;

  nlohmann::json to_json() const;
  static BoostedModel from_json(const nlohmann::json& j);
};

inline constexpr const char* kModelFormatTag = "cbdt-model/1";

void save_model(const BoostedModel& model, const std::string& path);
BoostedModel load_model(const std::string& path);
void write_trace_csv(const BoostedModel& model, const std::string& path);

// treatment prepended as column 0
Matrix augment_with_treatment(const Matrix& x, std::span<const uint8_t> t);
Matrix augment_with_treatment(const Matrix& x, double t);

// r_i = (y_i - f(t_i, x_i)) - (f(1, x_i) - f(0, x_i)) for the current head f.
std::vector<double> residuals_outcome_contrast(const BoostedModel& model,
                                               const CausalDataset& ds);

// r_i = y_i - m(x_i) - tau(x_i) * (t_i - e(x_i)) with cross-fitted nuisances.
std::vector<double> residuals_doubly_robust(const BoostedModel& model,
                                            const NuisanceModels& nuis, const CausalDataset& ds);

NuisanceModels fit_nuisance(const CausalDataset& ds, int rounds, uint64_t seed);

// AIPW pseudo-outcomes and the implied ATE estimate (their mean).
std::vector<double> aipw_pseudo_outcomes(const NuisanceModels& nuis, const CausalDataset& ds);
double aipw_ate(const NuisanceModels& nuis, const CausalDataset& ds);

BoostedModel fit(const BoosterConfig& config, const CausalDataset& ds);

}  // namespace cbdt
