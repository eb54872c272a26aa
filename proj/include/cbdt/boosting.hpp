#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbdt/tree.hpp"

namespace cbdt {

enum class BoostLoss { kSquared, kLogistic };

struct PlainBoostParams {
  int rounds = 100;
  double learning_rate = 0.1;
  TreeParams tree;
  BoostLoss loss = BoostLoss::kSquared;

  void validate() const {
    require(rounds >= 1, "rounds must be >= 1");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
    tree.validate();
  }
};

// Additive tree ensemble trained with second-order updates on a fixed loss.
// Squared loss starts from the target mean; logistic loss works on raw scores
// with predict() mapping through the sigmoid.
struct BoostedTrees {
  double base_score = 0.0;
  double learning_rate = 0.1;
  BoostLoss loss = BoostLoss::kSquared;
  std::vector<RegressionTree> trees;

  std::vector<double> predict_raw(const Matrix& x) const;
  std::vector<double> predict(const Matrix& x) const;
  double predict_row(std::span<const double> row) const;

  nlohmann::json to_json() const;
  static BoostedTrees from_json(const nlohmann::json& j);
};

BoostedTrees train_gbdt(const Matrix& x, std::span<const double> y, const PlainBoostParams& p);

double sigmoid(double z);

}  // namespace cbdt
