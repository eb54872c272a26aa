#include "cbdt/tree.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>

#include "cbdt/kernels.hpp"

namespace cbdt {

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "exact") return SplitMode::kExact;
  if (s == "histogram") return SplitMode::kHistogram;
  throw ValidationError("unknown split mode '" + s + "' (expected exact|histogram)");
}

std::string to_string(SplitMode m) { return m == SplitMode::kExact ? "exact" : "histogram"; }

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  const double dl = hl + lambda;
  const double dr = hr + lambda;
  const double dp = hl + hr + lambda;
  if (!(dl > 0.0) || !(dr > 0.0) || !(dp > 0.0))
    throw NumericError("split_gain: non-positive denominator (invalid Hessians)");
  const double gp = gl + gr;
  return 0.5 * (gl * gl / dl + gr * gr / dr - gp * gp / dp) - gamma;
}

double leaf_weight(double g, double h, double lambda) {
  const double denom = h + lambda;
  if (!(denom > 0.0)) throw NumericError("leaf_weight: non-positive denominator");
  return -g / denom;
}

int RegressionTree::num_leaves() const {
  int c = 0;
  for (const auto& n : nodes) c += n.is_leaf();
  return c;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    } else {
      best = std::max(best, d[i]);
    }
  }
  return best;
}

bool RegressionTree::same_structure(const RegressionTree& other, double weight_tol) const {
  if (nodes.size() != other.nodes.size() || n_features != other.n_features) return false;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& a = nodes[i];
    const TreeNode& b = other.nodes[i];
    if (a.feature != b.feature || a.left != b.left || a.right != b.right) return false;
    if (!a.is_leaf() && a.threshold != b.threshold) return false;
    if (a.is_leaf() && std::abs(a.weight - b.weight) > weight_tol) return false;
  }
  return true;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& n : nodes) {
    arr.push_back({{"f", n.feature},
                   {"t", n.threshold},
                   {"l", n.left},
                   {"r", n.right},
                   {"w", n.weight},
                   {"g", n.gain},
                   {"n", n.count}});
  }
  return {{"n_features", n_features}, {"nodes", arr}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  RegressionTree t;
  t.n_features = j.at("n_features").get<int>();
  for (const auto& e : j.at("nodes")) {
    TreeNode n;
    n.feature = e.at("f").get<int>();
    n.threshold = e.at("t").get<double>();
    n.left = e.at("l").get<int>();
    n.right = e.at("r").get<int>();
    n.weight = e.at("w").get<double>();
    n.gain = e.at("g").get<double>();
    n.count = e.at("n").get<int>();
    t.nodes.push_back(n);
  }
  return t;
}

// ============================================================================
// Fitting
// ============================================================================

namespace {

// Run of rows sharing one feature value (exact mode) or one bin (histogram
// mode). vmin/vmax are the actual value range so candidate thresholds are
// midpoints between occupied ranges in both modes.
struct Group {
  double vmin, vmax;
  double g, h;
  int count;
};

struct CandidateBest {
  double gain = -std::numeric_limits<double>::infinity();
  double threshold = 0.0;
  int feature = -1;
  bool valid = false;
};

// Threshold strictly separating a <= thr from b > thr, biased low so a value
// equal to the threshold routes left.
double separating_threshold(double a, double b) {
  double thr = a + (b - a) * 0.5;
  if (!(thr < b)) thr = a;
  if (thr < a) thr = a;
  return thr;
}

CandidateBest scan_groups(const std::vector<Group>& groups, const TreeParams& p, double g_tot,
                          double h_tot, int n_tot) {
  CandidateBest best;
  if (groups.size() < 2) return best;
  double gl = 0.0, hl = 0.0;
  int cl = 0;
  for (size_t k = 0; k + 1 < groups.size(); ++k) {
    gl += groups[k].g;
    hl += groups[k].h;
    cl += groups[k].count;
    const int cr = n_tot - cl;
    if (cl < p.min_samples_leaf || cr < p.min_samples_leaf) continue;
    const double dl = hl + p.split_reg_lambda;
    const double dr = (h_tot - hl) + p.split_reg_lambda;
    const double dp = h_tot + p.split_reg_lambda;
    if (!(dl > 0.0) || !(dr > 0.0) || !(dp > 0.0)) continue;
    const double gr = g_tot - gl;
    const double gain =
        0.5 * (gl * gl / dl + gr * gr / dr - g_tot * g_tot / dp) - p.leaf_penalty_gamma;
    if (gain > best.gain) {  // strict: first (lowest) threshold wins ties
      best.gain = gain;
      best.threshold = separating_threshold(groups[k].vmax, groups[k + 1].vmin);
      best.valid = true;
    }
  }
  return best;
}

// Global equal-frequency binning. Each bin keeps the value range it covers;
// when a feature has at most max_bins distinct values every value gets its
// own bin.
struct FeatureBins {
  std::vector<double> vmin, vmax;
  std::vector<double> upper;  // upper[b] separates bin b from b+1

  int find_bin(double v) const {
    const auto it = std::lower_bound(upper.begin(), upper.end(), v);
    return int(it - upper.begin());
  }
  int size() const { return int(vmin.size()); }
};

struct BinnedMatrix {
  std::vector<FeatureBins> feature_bins;
  std::vector<uint16_t> idx;  // row-major n x d
  int n = 0, d = 0;

  uint16_t bin(int i, int f) const { return idx[size_t(i) * d + f]; }
};

FeatureBins build_feature_bins(const Matrix& x, int f, int max_bins) {
  const int n = x.rows();
  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) col[i] = x(i, f);
  std::sort(col.begin(), col.end());

  // distinct runs
  std::vector<std::pair<double, int>> runs;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && col[j] == col[i]) ++j;
    runs.push_back({col[i], j - i});
    i = j;
  }

  FeatureBins bins;
  if (int(runs.size()) <= max_bins) {
    for (const auto& run : runs) {
      bins.vmin.push_back(run.first);
      bins.vmax.push_back(run.first);
    }
  } else {
    int remaining = n;
    int bins_left = max_bins;
    size_t r = 0;
    while (r < runs.size()) {
      const int target = (remaining + bins_left - 1) / bins_left;
      int acc = 0;
      const double lo = runs[r].first;
      double hi = lo;
      while (r < runs.size() && (acc < target || bins_left == 1)) {
        acc += runs[r].second;
        hi = runs[r].first;
        ++r;
      }
      bins.vmin.push_back(lo);
      bins.vmax.push_back(hi);
      remaining -= acc;
      --bins_left;
    }
  }
  for (size_t b = 0; b + 1 < bins.vmin.size(); ++b)
    bins.upper.push_back(separating_threshold(bins.vmax[b], bins.vmin[b + 1]));
  return bins;
}

BinnedMatrix build_bins(const Matrix& x, int max_bins) {
  BinnedMatrix bm;
  bm.n = x.rows();
  bm.d = x.cols();
  bm.feature_bins.resize(bm.d);
  bm.idx.resize(size_t(bm.n) * bm.d);
  kernels::parallel_for(bm.d, [&](int f) {
    bm.feature_bins[f] = build_feature_bins(x, f, max_bins);
    for (int i = 0; i < bm.n; ++i)
      bm.idx[size_t(i) * bm.d + f] = uint16_t(bm.feature_bins[f].find_bin(x(i, f)));
  });
  return bm;
}

CandidateBest scan_feature_exact(const Matrix& x, const GradHess& gh, const std::vector<int>& rows,
                                 int f, const TreeParams& p, double g_tot, double h_tot) {
  std::vector<std::pair<double, int>> vals;
  vals.reserve(rows.size());
  for (int r : rows) vals.push_back({x(r, f), r});
  std::stable_sort(vals.begin(), vals.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<Group> groups;
  for (size_t i = 0; i < vals.size();) {
    Group grp{vals[i].first, vals[i].first, 0.0, 0.0, 0};
    size_t j = i;
    while (j < vals.size() && vals[j].first == vals[i].first) {
      grp.g += gh.g[vals[j].second];
      grp.h += gh.h[vals[j].second];
      ++grp.count;
      ++j;
    }
    groups.push_back(grp);
    i = j;
  }
  return scan_groups(groups, p, g_tot, h_tot, int(rows.size()));
}

CandidateBest scan_feature_hist(const BinnedMatrix& bm, const GradHess& gh,
                                const std::vector<int>& rows, int f, const TreeParams& p,
                                double g_tot, double h_tot) {
  const FeatureBins& fb = bm.feature_bins[f];
  const int nbins = fb.size();
  std::vector<double> hg(nbins, 0.0), hh(nbins, 0.0);
  std::vector<int> hc(nbins, 0);
  for (int r : rows) {
    const int b = bm.bin(r, f);
    hg[b] += gh.g[r];
    hh[b] += gh.h[r];
    ++hc[b];
  }
  std::vector<Group> groups;
  for (int b = 0; b < nbins; ++b)
    if (hc[b] > 0) groups.push_back({fb.vmin[b], fb.vmax[b], hg[b], hh[b], hc[b]});
  return scan_groups(groups, p, g_tot, h_tot, int(rows.size()));
}

}  // namespace

RegressionTree fit_tree(const Matrix& features, const GradHess& gh, const TreeParams& params) {
  params.validate();
  const int n = features.rows();
  const int d = features.cols();
  require(n >= 1 && d >= 1, "fit_tree: empty feature matrix");
  require(int(gh.g.size()) == n && gh.g.size() == gh.h.size(),
          "fit_tree: gradient length must match row count");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(gh.g[i]) || !std::isfinite(gh.h[i]) || gh.h[i] < 0.0)
      throw NumericError("fit_tree: gradients must be finite with non-negative Hessians");
  }

  RegressionTree tree;
  tree.n_features = d;

  std::optional<BinnedMatrix> binned;
  if (params.mode == SplitMode::kHistogram) binned = build_bins(features, params.max_bins);

  struct Work {
    int node;
    std::vector<int> rows;  // ascending row indices
    int depth;
  };
  std::deque<Work> queue;
  {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    tree.nodes.emplace_back();
    queue.push_back({0, std::move(all), 0});
  }

  while (!queue.empty()) {
    Work w = std::move(queue.front());
    queue.pop_front();

    double g_tot = 0.0, h_tot = 0.0;
    for (int r : w.rows) {
      g_tot += gh.g[r];
      h_tot += gh.h[r];
    }
    const int nn = int(w.rows.size());

    CandidateBest best;
    if (w.depth < params.max_depth && nn >= 2 * params.min_samples_leaf) {
      std::vector<CandidateBest> per_feature(d);
      auto scan = [&](int f) {
        per_feature[f] = binned ? scan_feature_hist(*binned, gh, w.rows, f, params, g_tot, h_tot)
                                : scan_feature_exact(features, gh, w.rows, f, params, g_tot, h_tot);
        per_feature[f].feature = f;
      };
      if (params.parallel)
        kernels::parallel_for(d, scan);
      else
        kernels::serial_for(d, scan);
      // strict > keeps the lowest feature index among equal gains
      for (int f = 0; f < d; ++f)
        if (per_feature[f].valid && per_feature[f].gain > best.gain) best = per_feature[f];
    }

    TreeNode node;
    node.count = nn;
    if (!best.valid || !(best.gain > 0.0)) {
      const double denom = h_tot + params.split_reg_lambda;
      node.weight = denom > 0.0 ? -g_tot / denom : 0.0;
      tree.nodes[w.node] = node;
      continue;
    }

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(nn);
    right_rows.reserve(nn);
    for (int r : w.rows) {
      if (features(r, best.feature) <= best.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }

    node.feature = best.feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.left = int(tree.nodes.size());
    node.right = node.left + 1;
    tree.nodes[w.node] = node;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    queue.push_back({node.left, std::move(left_rows), w.depth + 1});
    queue.push_back({node.right, std::move(right_rows), w.depth + 1});
  }
  return tree;
}

static std::vector<double> predict_impl(const RegressionTree& tree, const Matrix& x,
                                        bool parallel) {
  require(x.cols() == tree.n_features, "predict_tree: feature count mismatch (got " +
                                           std::to_string(x.cols()) + ", trained on " +
                                           std::to_string(tree.n_features) + ")");
  std::vector<double> out(x.rows());
  auto body = [&](int i) { out[i] = tree.predict_row(x.row(i)); };
  if (parallel)
    kernels::parallel_for(x.rows(), body);
  else
    kernels::serial_for(x.rows(), body);
  return out;
}

std::vector<double> predict_tree(const RegressionTree& tree, const Matrix& features) {
  return predict_impl(tree, features, true);
}

std::vector<double> predict_tree_serial(const RegressionTree& tree, const Matrix& features) {
  return predict_impl(tree, features, false);
}

}  // namespace cbdt
