#pragma once

#include <string>
#include <vector>

#include "cbdt/booster.hpp"
#include "cbdt/boosting.hpp"
#include "cbdt/dataset.hpp"

namespace cbdt {

enum class MetaLearnerKind { kS, kT, kX, kDR };

MetaLearnerKind meta_kind_from_string(const std::string& s);
std::string to_string(MetaLearnerKind k);

struct MetaLearnerSpec {
  MetaLearnerKind kind = MetaLearnerKind::kT;
  TreeParams base_tree;
  int rounds = 200;
  double learning_rate = 0.1;
  uint64_t seed = 1;

  void validate() const {
    require(rounds >= 1, "rounds must be >= 1");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
    base_tree.validate();
  }
};

// Fitted meta-learner. Which members are populated depends on the kind:
//   S  -> outcome model over (t, x)
//   T  -> per-arm outcome models
//   X  -> per-arm outcome models, per-arm imputed-effect models, propensity blend
//   DR -> effect regression on cross-fitted AIPW pseudo-outcomes
struct MetaLearner {
  MetaLearnerSpec spec;
  BoostedTrees s_model;
  BoostedTrees model0, model1;
  BoostedTrees tau0_model, tau1_model;
  BoostedTrees propensity;
  BoostedTrees dr_model;
  std::vector<double> dr_pseudo_outcomes;  // training-time AIPW values

  std::vector<double> predict_cate(const Matrix& x) const;

  nlohmann::json to_json() const;
  static MetaLearner from_json(const nlohmann::json& j);
};

inline constexpr const char* kMetaFormatTag = "cbdt-meta/1";

MetaLearner fit_meta(const MetaLearnerSpec& spec, const CausalDataset& ds);
std::vector<double> predict_meta(const MetaLearner& learner, const Matrix& x);

void save_meta(const MetaLearner& learner, const std::string& path);
MetaLearner load_meta(const std::string& path);

}  // namespace cbdt
