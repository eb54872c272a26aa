#include "cbdt/meta.hpp"

#include <fstream>

namespace cbdt {

MetaLearnerKind meta_kind_from_string(const std::string& s) {
  if (s == "s" || s == "S") return MetaLearnerKind::kS;
  if (s == "t" || s == "T") return MetaLearnerKind::kT;
  if (s == "x" || s == "X") return MetaLearnerKind::kX;
  if (s == "dr" || s == "DR") return MetaLearnerKind::kDR;
  throw ValidationError("unknown meta-learner kind '" + s + "' (expected s|t|x|dr)");
}

std::string to_string(MetaLearnerKind k) {
  switch (k) {
    case MetaLearnerKind::kS: return "s";
    case MetaLearnerKind::kT: return "t";
    case MetaLearnerKind::kX: return "x";
    case MetaLearnerKind::kDR: return "dr";
  }
  return "t";
}

namespace {

struct ArmData {
  Matrix x;
  std::vector<double> y;
  std::vector<int> rows;
};

ArmData gather_arm(const CausalDataset& ds, int arm) {
  ArmData a;
  for (int i = 0; i < ds.n(); ++i)
    if (ds.treatment[i] == arm) a.rows.push_back(i);
  a.x = Matrix(int(a.rows.size()), ds.d());
  a.y.resize(a.rows.size());
  for (size_t k = 0; k < a.rows.size(); ++k) {
    for (int j = 0; j < ds.d(); ++j) a.x(int(k), j) = ds.features(a.rows[k], j);
    a.y[k] = ds.outcome[a.rows[k]];
  }
  return a;
}

void check_arm_size(const ArmData& a, const char* name, int min_size) {
  if (int(a.rows.size()) < min_size)
    throw ValidationError(std::string(name) + " arm too small for its model (" +
                          std::to_string(a.rows.size()) + " < " + std::to_string(min_size) + ")");
}

PlainBoostParams plain_params(const MetaLearnerSpec& spec, BoostLoss loss) {
  PlainBoostParams p;
  p.rounds = spec.rounds;
  p.learning_rate = spec.learning_rate;
  p.tree = spec.base_tree;
  p.loss = loss;
  return p;
}

}  // namespace

MetaLearner fit_meta(const MetaLearnerSpec& spec, const CausalDataset& ds) {
  spec.validate();
  ds.validate();

  MetaLearner m;
  m.spec = spec;
  const int min_arm = std::max(2, spec.base_tree.min_samples_leaf);

  switch (spec.kind) {
    case MetaLearnerKind::kS: {
      const Matrix aug = augment_with_treatment(ds.features, ds.treatment);
      m.s_model = train_gbdt(aug, ds.outcome, plain_params(spec, BoostLoss::kSquared));
      break;
    }
    case MetaLearnerKind::kT: {
      const ArmData a0 = gather_arm(ds, 0);
      const ArmData a1 = gather_arm(ds, 1);
      check_arm_size(a0, "control", min_arm);
      check_arm_size(a1, "treated", min_arm);
      m.model0 = train_gbdt(a0.x, a0.y, plain_params(spec, BoostLoss::kSquared));
      m.model1 = train_gbdt(a1.x, a1.y, plain_params(spec, BoostLoss::kSquared));
      break;
    }
    case MetaLearnerKind::kX: {
      const ArmData a0 = gather_arm(ds, 0);
      const ArmData a1 = gather_arm(ds, 1);
      check_arm_size(a0, "control", min_arm);
      check_arm_size(a1, "treated", min_arm);
      m.model0 = train_gbdt(a0.x, a0.y, plain_params(spec, BoostLoss::kSquared));
      m.model1 = train_gbdt(a1.x, a1.y, plain_params(spec, BoostLoss::kSquared));

      // imputed individual effects, regressed per arm
      std::vector<double> d1(a1.rows.size()), d0(a0.rows.size());
      const auto mu0_on_treated = m.model0.predict(a1.x);
      const auto mu1_on_control = m.model1.predict(a0.x);
      for (size_t k = 0; k < a1.rows.size(); ++k) d1[k] = a1.y[k] - mu0_on_treated[k];
      for (size_t k = 0; k < a0.rows.size(); ++k) d0[k] = mu1_on_control[k] - a0.y[k];
      m.tau1_model = train_gbdt(a1.x, d1, plain_params(spec, BoostLoss::kSquared));
      m.tau0_model = train_gbdt(a0.x, d0, plain_params(spec, BoostLoss::kSquared));

      std::vector<double> t(ds.n());
      for (int i = 0; i < ds.n(); ++i) t[i] = double(ds.treatment[i]);
      m.propensity = train_gbdt(ds.features, t, plain_params(spec, BoostLoss::kLogistic));
      break;
    }
    case MetaLearnerKind::kDR: {
      const NuisanceModels nuis = fit_nuisance(ds, spec.rounds, spec.seed);
      m.dr_pseudo_outcomes = aipw_pseudo_outcomes(nuis, ds);
      m.dr_model = train_gbdt(ds.features, m.dr_pseudo_outcomes,
                              plain_params(spec, BoostLoss::kSquared));
      break;
    }
  }
  return m;
}

std::vector<double> MetaLearner::predict_cate(const Matrix& x) const {
  switch (spec.kind) {
    case MetaLearnerKind::kS: {
      const Matrix aug1 = augment_with_treatment(x, 1.0);
      const Matrix aug0 = augment_with_treatment(x, 0.0);
      auto y1 = s_model.predict(aug1);
      const auto y0 = s_model.predict(aug0);
      for (int i = 0; i < x.rows(); ++i) y1[i] -= y0[i];
      return y1;
    }
    case MetaLearnerKind::kT: {
      auto y1 = model1.predict(x);
      const auto y0 = model0.predict(x);
      for (int i = 0; i < x.rows(); ++i) y1[i] -= y0[i];
      return y1;
    }
    case MetaLearnerKind::kX: {
      const auto t1 = tau1_model.predict(x);
      const auto t0 = tau0_model.predict(x);
      const auto g = propensity.predict(x);
      std::vector<double> tau(x.rows());
      for (int i = 0; i < x.rows(); ++i) {
        const double w = clamp(g[i], 0.01, 0.99);
        tau[i] = w * t0[i] + (1.0 - w) * t1[i];
      }
      return tau;
    }
    case MetaLearnerKind::kDR:
      return dr_model.predict(x);
  }
  throw ValidationError("meta-learner not fitted");
}

std::vector<double> predict_meta(const MetaLearner& learner, const Matrix& x) {
  return learner.predict_cate(x);
}

nlohmann::json MetaLearner::to_json() const {
  nlohmann::json j{{"format", kMetaFormatTag},
                   {"kind", cbdt::to_string(spec.kind)},
                   {"rounds", spec.rounds},
                   {"learning_rate", spec.learning_rate},
                   {"seed", spec.seed},
                   {"tree",
                    {{"max_depth", spec.base_tree.max_depth},
                     {"min_samples_leaf", spec.base_tree.min_samples_leaf},
                     {"split_reg_lambda", spec.base_tree.split_reg_lambda},
                     {"max_bins", spec.base_tree.max_bins},
                     {"mode", cbdt::to_string(spec.base_tree.mode)}}}};
  switch (spec.kind) {
    case MetaLearnerKind::kS:
      j["s_model"] = s_model.to_json();
      break;
    case MetaLearnerKind::kT:
      j["model0"] = model0.to_json();
      j["model1"] = model1.to_json();
      break;
    case MetaLearnerKind::kX:
      j["model0"] = model0.to_json();
      j["model1"] = model1.to_json();
      j["tau0_model"] = tau0_model.to_json();
      j["tau1_model"] = tau1_model.to_json();
      j["propensity"] = propensity.to_json();
      break;
    case MetaLearnerKind::kDR:
      j["dr_model"] = dr_model.to_json();
      break;
  }
  return j;
}

MetaLearner MetaLearner::from_json(const nlohmann::json& j) {
  const std::string tag = j.value("format", "");
  if (tag != kMetaFormatTag)
    throw IoError("unsupported meta-learner format tag '" + tag + "'");
  MetaLearner m;
  m.spec.kind = meta_kind_from_string(j.at("kind").get<std::string>());
  m.spec.rounds = j.value("rounds", m.spec.rounds);
  m.spec.learning_rate = j.value("learning_rate", m.spec.learning_rate);
  m.spec.seed = j.value("seed", m.spec.seed);
  if (j.contains("tree")) {
    const auto& t = j.at("tree");
    m.spec.base_tree.max_depth = t.value("max_depth", 3);
    m.spec.base_tree.min_samples_leaf = t.value("min_samples_leaf", 5);
    m.spec.base_tree.split_reg_lambda = t.value("split_reg_lambda", 0.0);
    m.spec.base_tree.max_bins = t.value("max_bins", 255);
    if (t.contains("mode"))
      m.spec.base_tree.mode = split_mode_from_string(t.at("mode").get<std::string>());
  }
  if (j.contains("s_model")) m.s_model = BoostedTrees::from_json(j.at("s_model"));
  if (j.contains("model0")) m.model0 = BoostedTrees::from_json(j.at("model0"));
  if (j.contains("model1")) m.model1 = BoostedTrees::from_json(j.at("model1"));
  if (j.contains("tau0_model")) m.tau0_model = BoostedTrees::from_json(j.at("tau0_model"));
  if (j.contains("tau1_model")) m.tau1_model = BoostedTrees::from_json(j.at("tau1_model"));
  if (j.contains("propensity")) m.propensity = BoostedTrees::from_json(j.at("propensity"));
  if (j.contains("dr_model")) m.dr_model = BoostedTrees::from_json(j.at("dr_model"));
  return m;
}

void save_meta(const MetaLearner& learner, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << learner.to_json().dump(2) << "\n";
}

MetaLearner load_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return MetaLearner::from_json(j);
}

}  // namespace cbdt
