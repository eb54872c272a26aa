#include "cbdt/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "cbdt/csv.hpp"

namespace cbdt {

bool CausalRule::covers(std::span<const double> row) const {
  for (const auto& c : conditions) {
    const double v = row[c.feature];
    if (c.greater ? !(v > c.threshold) : !(v <= c.threshold)) return false;
  }
  return true;
}

std::string CausalRule::to_text(const std::vector<std::string>& feature_names) const {
  auto name = [&](int f) {
    return f < int(feature_names.size()) ? feature_names[f] : "x" + std::to_string(f + 1);
  };
  std::string s = "IF ";
  if (conditions.empty()) s += "TRUE";
  for (size_t i = 0; i < conditions.size(); ++i) {
    const auto& c = conditions[i];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s %s %.2f", name(c.feature).c_str(),
                  c.greater ? ">" : "<=", c.threshold);
    s += buf;
    if (i + 1 < conditions.size()) s += " AND ";
  }
  char tail[128];
  std::snprintf(tail, sizeof(tail), " THEN tau = %.2f [%.2f, %.2f], support %.1f%%",
                effect_estimate, ci_lo, ci_hi, 100.0 * support_fraction);
  return s + tail;
}

namespace {

// Conditions along a root-to-leaf path, folded into one interval per feature.
std::vector<RuleCondition> path_conditions(const RegressionTree& tree, int leaf) {
  // parent pointers
  std::vector<int> parent(tree.nodes.size(), -1);
  std::vector<bool> went_left(tree.nodes.size(), false);
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].is_leaf()) continue;
    parent[tree.nodes[i].left] = int(i);
    went_left[tree.nodes[i].left] = true;
    parent[tree.nodes[i].right] = int(i);
    went_left[tree.nodes[i].right] = false;
  }
  std::map<int, std::pair<double, double>> interval;  // feature -> (lo, hi]
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int node = leaf;
  while (parent[node] >= 0) {
    const int p = parent[node];
    const int f = tree.nodes[p].feature;
    const double thr = tree.nodes[p].threshold;
    auto [it, inserted] = interval.try_emplace(f, -kInf, kInf);
    if (went_left[node])
      it->second.second = std::min(it->second.second, thr);  // x <= thr
    else
      it->second.first = std::max(it->second.first, thr);  // x > thr
    node = p;
  }
  std::vector<RuleCondition> out;
  for (const auto& [f, iv] : interval) {
    if (iv.first > -kInf) out.push_back({f, true, iv.first});
    if (iv.second < kInf) out.push_back({f, false, iv.second});
  }
  return out;
}

}  // namespace

RuleSet extract_rules_from_effects(const Matrix& features, std::span<const double> tau_hat,
                                   const RuleExtractionSpec& spec) {
  spec.validate();
  const int n = features.rows();
  require(int(tau_hat.size()) == n, "effect vector length must match row count");

  // squared-loss surrogate: leaf weights are leaf means of tau_hat
  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);
  for (int i = 0; i < n; ++i) {
    gh.g[i] = -2.0 * tau_hat[i];
    gh.h[i] = 2.0;
  }
  TreeParams tp;
  tp.max_depth = spec.surrogate_depth;
  tp.min_samples_leaf = std::max(1, int(std::ceil(spec.min_support * n)));
  tp.split_reg_lambda = 0.0;
  // gain for g=-2 tau, h=2 equals the total squared-error reduction, so a
  // per-row floor scales with n
  tp.leaf_penalty_gamma = spec.min_split_gain * double(n);
  tp.mode = SplitMode::kExact;

  RuleSet out;
  out.surrogate = fit_tree(features, gh, tp);

  // route rows to leaves
  std::map<int, std::vector<int>> leaf_rows;
  for (int i = 0; i < n; ++i) leaf_rows[out.surrogate.route_row(features.row(i))].push_back(i);

  Rng rng(spec.seed ^ 0x5eedbadc0ffee123ULL);
  const int min_count = std::max(1, int(std::ceil(spec.min_support * n)));
  for (const auto& [leaf, rows] : leaf_rows) {
    if (int(rows.size()) < min_count) continue;
    CausalRule rule;
    rule.conditions = path_conditions(out.surrogate, leaf);
    rule.support_count = int(rows.size());
    rule.support_fraction = double(rows.size()) / double(n);
    double s = 0.0;
    for (int r : rows) s += tau_hat[r];
    rule.effect_estimate = s / double(rows.size());

    // percentile bootstrap over covered rows
    std::vector<double> boot(spec.bootstrap_draws);
    for (int b = 0; b < spec.bootstrap_draws; ++b) {
      double bs = 0.0;
      for (size_t k = 0; k < rows.size(); ++k) bs += tau_hat[rows[rng.uniform_int(int(rows.size()))]];
      boot[b] = bs / double(rows.size());
    }
    std::sort(boot.begin(), boot.end());
    const double tail = (1.0 - spec.ci_level) / 2.0;
    rule.ci_lo = quantile_sorted(boot, tail);
    rule.ci_hi = quantile_sorted(boot, 1.0 - tail);
    // a degenerate bootstrap interval still has to contain the point estimate
    rule.ci_lo = std::min(rule.ci_lo, rule.effect_estimate);
    rule.ci_hi = std::max(rule.ci_hi, rule.effect_estimate);
    out.rules.push_back(std::move(rule));
  }
  if (out.rules.empty())
    out.diagnostic = "no leaf reached min_support = " + format_double(spec.min_support) +
                     " (surrogate has " + std::to_string(out.surrogate.num_leaves()) + " leaves)";
  return out;
}

RuleSet extract_rules(const BoostedModel& model, const CausalDataset& ds,
                      const RuleExtractionSpec& spec) {
  const auto tau_hat = model.predict_cate(ds.features);
  return extract_rules_from_effects(ds.features, tau_hat, spec);
}

FidelityResult rule_fidelity_against(const RuleSet& rules, const Matrix& features,
                                     std::span<const double> tau_hat) {
  const int n = features.rows();
  require(int(tau_hat.size()) == n, "effect vector length must match row count");
  FidelityResult out;

  std::vector<double> covered_tau, covered_pred;
  for (int i = 0; i < n; ++i) {
    for (const auto& rule : rules.rules) {
      if (rule.covers(features.row(i))) {
        covered_tau.push_back(tau_hat[i]);
        covered_pred.push_back(rule.effect_estimate);
        break;  // rules are mutually exclusive
      }
    }
  }
  out.uncovered_fraction = 1.0 - double(covered_tau.size()) / double(n);
  if (covered_tau.empty()) {
    out.fidelity = 0.0;
    return out;
  }
  const double var = variance_of(covered_tau);
  double mse = 0.0;
  for (size_t i = 0; i < covered_tau.size(); ++i) {
    const double d = covered_tau[i] - covered_pred[i];
    mse += d * d;
  }
  mse /= double(covered_tau.size());
  if (var == 0.0) {
    out.fidelity = mse == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.fidelity = clamp(1.0 - mse / var, 0.0, 1.0);
  return out;
}

FidelityResult rule_fidelity(const RuleSet& rules, const BoostedModel& model,
                             const CausalDataset& ds) {
  const auto tau_hat = model.predict_cate(ds.features);
  return rule_fidelity_against(rules, ds.features, tau_hat);
}

std::vector<RuleTruthCheck> rule_truth_check(const RuleSet& rules, const CausalDataset& ds) {
  require(ds.has_ground_truth(),
          "rule truth check needs ground-truth potential outcomes; use a synthetic or "
          "benchmark dataset that carries mu0/mu1");
  const auto tau_true = ds.true_cate();
  std::vector<RuleTruthCheck> out;
  for (const auto& rule : rules.rules) {
    RuleTruthCheck chk;
    double s = 0.0;
    int c = 0;
    for (int i = 0; i < ds.n(); ++i) {
      if (rule.covers(ds.features.row(i))) {
        s += tau_true[i];
        ++c;
      }
    }
    chk.true_effect = c > 0 ? s / c : 0.0;
    chk.abs_deviation = std::abs(rule.effect_estimate - chk.true_effect);
    chk.ci_covers = rule.ci_lo <= chk.true_effect && chk.true_effect <= rule.ci_hi;
    out.push_back(chk);
  }
  return out;
}

nlohmann::json RuleSet::to_json() const {
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& c : r.conditions)
      jc.push_back({{"feature", c.feature}, {"greater", c.greater}, {"threshold", c.threshold}});
    jr.push_back({{"conditions", jc},
                  {"effect", r.effect_estimate},
                  {"ci_lo", r.ci_lo},
                  {"ci_hi", r.ci_hi},
                  {"support_count", r.support_count},
                  {"support_fraction", r.support_fraction}});
  }
  return {{"format", "cbdt-rules/1"},
          {"rules", jr},
          {"surrogate", surrogate.to_json()},
          {"diagnostic", diagnostic}};
}

RuleSet RuleSet::from_json(const nlohmann::json& j) {
  RuleSet out;
  for (const auto& e : j.at("rules")) {
    CausalRule r;
    for (const auto& c : e.at("conditions"))
      r.conditions.push_back({c.at("feature").get<int>(), c.at("greater").get<bool>(),
                              c.at("threshold").get<double>()});
    r.effect_estimate = e.at("effect").get<double>();
    r.ci_lo = e.at("ci_lo").get<double>();
    r.ci_hi = e.at("ci_hi").get<double>();
    r.support_count = e.at("support_count").get<int>();
    r.support_fraction = e.at("support_fraction").get<double>();
    out.rules.push_back(std::move(r));
  }
  out.surrogate = RegressionTree::from_json(j.at("surrogate"));
  out.diagnostic = j.value("diagnostic", "");
  return out;
}

void write_rules_text(const RuleSet& rules, const std::vector<std::string>& feature_names,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  if (rules.rules.empty()) out << "# " << rules.diagnostic << "\n";
  for (const auto& r : rules.rules) out << r.to_text(feature_names) << "\n";
}

void write_rules_csv(const RuleSet& rules, const std::string& path) {
  CsvTable t;
  t.columns = {"rule", "effect", "ci_lo", "ci_hi", "support_count", "support_fraction"};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << "rule,effect,ci_lo,ci_hi,support_count,support_fraction\n";
  for (size_t i = 0; i < rules.rules.size(); ++i) {
    const auto& r = rules.rules[i];
    std::string cond;
    for (size_t k = 0; k < r.conditions.size(); ++k) {
      const auto& c = r.conditions[k];
      cond += "x" + std::to_string(c.feature + 1) + (c.greater ? ">" : "<=") +
              format_double(c.threshold);
      if (k + 1 < r.conditions.size()) cond += " & ";
    }
    if (cond.empty()) cond = "TRUE";
    out << cond << "," << format_double(r.effect_estimate) << "," << format_double(r.ci_lo) << ","
        << format_double(r.ci_hi) << "," << r.support_count << ","
        << format_double(r.support_fraction) << "\n";
  }
}

}  // namespace cbdt
