#include "cbdt/boosting.hpp"

#include <cmath>

namespace cbdt {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> BoostedTrees::predict_raw(const Matrix& x) const {
  std::vector<double> out(x.rows(), base_score);
  for (const auto& tree : trees) {
    const auto p = predict_tree(tree, x);
    for (int i = 0; i < x.rows(); ++i) out[i] += learning_rate * p[i];
  }
  return out;
}

std::vector<double> BoostedTrees::predict(const Matrix& x) const {
  auto out = predict_raw(x);
  if (loss == BoostLoss::kLogistic)
    for (double& v : out) v = sigmoid(v);
  return out;
}

double BoostedTrees::predict_row(std::span<const double> row) const {
  double s = base_score;
  for (const auto& tree : trees) s += learning_rate * tree.predict_row(row);
  return loss == BoostLoss::kLogistic ? sigmoid(s) : s;
}

nlohmann::json BoostedTrees::to_json() const {
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& t : trees) jt.push_back(t.to_json());
  return {{"base_score", base_score},
          {"learning_rate", learning_rate},
          {"loss", loss == BoostLoss::kSquared ? "squared" : "logistic"},
          {"trees", jt}};
}

BoostedTrees BoostedTrees::from_json(const nlohmann::json& j) {
  BoostedTrees b;
  b.base_score = j.at("base_score").get<double>();
  b.learning_rate = j.at("learning_rate").get<double>();
  b.loss = j.at("loss").get<std::string>() == "logistic" ? BoostLoss::kLogistic
                                                         : BoostLoss::kSquared;
  for (const auto& e : j.at("trees")) b.trees.push_back(RegressionTree::from_json(e));
  return b;
}

BoostedTrees train_gbdt(const Matrix& x, std::span<const double> y, const PlainBoostParams& p) {
  p.validate();
  const int n = x.rows();
  require(int(y.size()) == n, "target length must match row count");
  require(all_finite(y), "targets must be finite");

  BoostedTrees model;
  model.learning_rate = p.learning_rate;
  model.loss = p.loss;

  if (p.loss == BoostLoss::kSquared) {
    model.base_score = mean_of(y);
  } else {
    for (double v : y)
      require(v == 0.0 || v == 1.0, "logistic loss expects 0/1 targets");
    const double pbar = clamp(mean_of(y), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(pbar / (1.0 - pbar));
  }

  std::vector<double> score(n, model.base_score);
  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);
  for (int k = 0; k < p.rounds; ++k) {
    if (p.loss == BoostLoss::kSquared) {
      for (int i = 0; i < n; ++i) {
        gh.g[i] = 2.0 * (score[i] - y[i]);
        gh.h[i] = 2.0;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        const double q = sigmoid(score[i]);
        gh.g[i] = q - y[i];
        gh.h[i] = q * (1.0 - q);
      }
    }
    RegressionTree tree = fit_tree(x, gh, p.tree);
    const auto delta = predict_tree(tree, x);
    for (int i = 0; i < n; ++i) score[i] += p.learning_rate * delta[i];
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace cbdt
