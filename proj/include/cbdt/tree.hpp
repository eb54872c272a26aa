#pragma once

#include <string>
#include <vector>

#include "cbdt/common.hpp"
#include "cbdt/objective.hpp"
#include "json.hpp"

namespace cbdt {

enum class SplitMode { kExact, kHistogram };

SplitMode split_mode_from_string(const std::string& s);
std::string to_string(SplitMode m);

struct TreeParams {
  int max_depth = 3;
  int min_samples_leaf = 5;
  double split_reg_lambda = 0.0;   // L2 weight in the gain/leaf denominators
  double leaf_penalty_gamma = 0.0; // subtracted from every candidate gain
  int max_bins = 255;
  SplitMode mode = SplitMode::kHistogram;
  bool parallel = true;  // scan features with the OpenMP pool

  void validate() const {
    require(max_depth >= 1, "max_depth must be >= 1");
    require(min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
    require(max_bins >= 2, "max_bins must be >= 2");
    require(std::isfinite(split_reg_lambda) && split_reg_lambda >= 0.0,
            "split_reg_lambda must be finite and >= 0");
    require(std::isfinite(leaf_penalty_gamma) && leaf_penalty_gamma >= 0.0,
            "leaf_penalty_gamma must be finite and >= 0");
  }
};

// Gain of splitting a node with children (GL,HL) and (GR,HR):
//   1/2 [ GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l) ] - g
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

// Newton-optimal leaf value -G/(H+lambda).
double leaf_weight(double g, double h, double lambda);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf output
  double gain = 0.0;    // gain realized at an internal node
  int count = 0;        // training rows reaching the node

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; children precede nothing
  int n_features = 0;

  // Ties at a threshold route left: value <= threshold.
  double predict_row(std::span<const double> row) const {
    int i = 0;
    while (!nodes[i].is_leaf()) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].weight;
  }

  int route_row(std::span<const double> row) const {
    int i = 0;
    while (!nodes[i].is_leaf()) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return i;
  }

  int num_leaves() const;
  int depth() const;
  bool same_structure(const RegressionTree& other, double weight_tol) const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);
};

// Greedy top-down second-order fit. Exact mode enumerates thresholds at
// midpoints between consecutive distinct values present at each node;
// histogram mode pre-bins columns once and scans bin boundaries. With
// max_bins >= the number of distinct values per feature the two modes build
// identical trees. Ties between equal-gain candidates resolve to the lowest
// feature index, then the lowest threshold, so results do not depend on the
// worker count.
RegressionTree fit_tree(const Matrix& features, const GradHess& gh, const TreeParams& params);

std::vector<double> predict_tree(const RegressionTree& tree, const Matrix& features);
std::vector<double> predict_tree_serial(const RegressionTree& tree, const Matrix& features);

}  // namespace cbdt
