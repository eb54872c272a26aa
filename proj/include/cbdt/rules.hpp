#pragma once

#include <string>
#include <vector>

#include "cbdt/booster.hpp"
#include "cbdt/dataset.hpp"

namespace cbdt {

struct RuleCondition {
  int feature = 0;
  bool greater = false;  // false: x <= threshold, true: x > threshold
  double threshold = 0.0;
};

struct CausalRule {
  std::vector<RuleCondition> conditions;  // conjunction; at most one interval per feature
  double effect_estimate = 0.0;           // mean predicted effect over covered rows
  double ci_lo = 0.0, ci_hi = 0.0;        // bootstrap percentile interval
  int support_count = 0;
  double support_fraction = 0.0;

  bool covers(std::span<const double> row) const;
  std::string to_text(const std::vector<std::string>& feature_names) const;
};

struct RuleExtractionSpec {
  int surrogate_depth = 3;
  double min_support = 0.05;  // fraction of rows a rule must cover
  int bootstrap_draws = 500;
  double ci_level = 0.95;
  // a surrogate split must reduce mean squared effect error by at least this
  // much per covered row; keeps noise-level structure out of the rule set
  double min_split_gain = 0.01;
  uint64_t seed = 1;

  void validate() const {
    require(surrogate_depth >= 1, "surrogate_depth must be >= 1");
    require(min_support > 0.0 && min_support < 1.0, "min_support must be in (0, 1)");
    require(bootstrap_draws >= 50, "bootstrap_draws must be >= 50");
    require(ci_level > 0.0 && ci_level < 1.0, "ci_level must be in (0, 1)");
    require(min_split_gain >= 0.0, "min_split_gain must be >= 0");
  }
};

struct RuleSet {
  std::vector<CausalRule> rules;  // mutually exclusive (leaves of one surrogate tree)
  RegressionTree surrogate;
  std::string diagnostic;  // non-empty when extraction came up empty

  nlohmann::json to_json() const;
  static RuleSet from_json(const nlohmann::json& j);
};

// Fit a depth-limited surrogate regression tree to the model's predicted
// effect surface and turn every sufficiently supported leaf into a rule.
RuleSet extract_rules(const BoostedModel& model, const CausalDataset& ds,
                      const RuleExtractionSpec& spec);

// Same extraction against an arbitrary effect surface (used by tests and by
// rule checks on constructed models).
RuleSet extract_rules_from_effects(const Matrix& features, std::span<const double> tau_hat,
                                   const RuleExtractionSpec& spec);

// Agreement between the rule-set prediction and the model's effect surface:
// 1 - MSE / Var over covered rows, clipped to [0, 1]. Rows covered by no rule
// are excluded; their fraction is reported separately.
struct FidelityResult {
  double fidelity = 0.0;
  double uncovered_fraction = 0.0;
};
FidelityResult rule_fidelity(const RuleSet& rules, const BoostedModel& model,
                             const CausalDataset& ds);
FidelityResult rule_fidelity_against(const RuleSet& rules, const Matrix& features,
                                     std::span<const double> tau_hat);

// Per-rule deviation from the ground-truth effect over covered rows, and
// whether the rule's CI covers it.
struct RuleTruthCheck {
  double true_effect = 0.0;
  double abs_deviation = 0.0;
  bool ci_covers = false;
};
std::vector<RuleTruthCheck> rule_truth_check(const RuleSet& rules, const CausalDataset& ds);

void write_rules_text(const RuleSet& rules, const std::vector<std::string>& feature_names,
                      const std::string& path);
void write_rules_csv(const RuleSet& rules, const std::string& path);

}  // namespace cbdt
