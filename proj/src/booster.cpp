#include "cbdt/booster.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "cbdt/csv.hpp"

namespace cbdt {

ResidualMode residual_mode_from_string(const std::string& s) {
  if (s == "outcome_contrast") return ResidualMode::kOutcomeContrast;
  if (s == "doubly_robust") return ResidualMode::kDoublyRobust;
  throw ValidationError("unknown residual_mode '" + s +
                        "' (expected outcome_contrast|doubly_robust)");
}

std::string to_string(ResidualMode m) {
  return m == ResidualMode::kOutcomeContrast ? "outcome_contrast" : "doubly_robust";
}

TauRefSource tau_ref_source_from_string(const std::string& s) {
  if (s == "doubly_robust") return TauRefSource::kDoublyRobust;
  if (s == "ground_truth") return TauRefSource::kGroundTruth;
  if (s == "fixed") return TauRefSource::kFixed;
  throw ValidationError("unknown tau_ref source '" + s +
                        "' (expected doubly_robust|ground_truth|fixed)");
}

std::string to_string(TauRefSource s) {
  switch (s) {
    case TauRefSource::kDoublyRobust: return "doubly_robust";
    case TauRefSource::kGroundTruth: return "ground_truth";
    case TauRefSource::kFixed: return "fixed";
  }
  return "doubly_robust";
}

RefinementMode refinement_mode_from_string(const std::string& s) {
  if (s == "regularizers") return RefinementMode::kRegularizers;
  if (s == "full_gradient") return RefinementMode::kFullGradient;
  if (s == "off") return RefinementMode::kOff;
  throw ValidationError("unknown refinement mode '" + s +
                        "' (expected regularizers|full_gradient|off)");
}

std::string to_string(RefinementMode m) {
  switch (m) {
    case RefinementMode::kRegularizers: return "regularizers";
    case RefinementMode::kFullGradient: return "full_gradient";
    case RefinementMode::kOff: return "off";
  }
  return "regularizers";
}

void BoosterConfig::validate() const {
  require(num_rounds >= 1, "num_rounds must be >= 1");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
  require(nuisance_rounds >= 1, "nuisance_rounds must be >= 1");
  require(std::isfinite(eta) && eta >= 0.0, "eta must be finite and >= 0");
  require(std::isfinite(eta_prime) && eta_prime >= 0.0, "eta_prime must be finite and >= 0");
  loss.validate();
  tree.validate();
}

nlohmann::json BoosterConfig::to_json() const {
  return {{"num_rounds", num_rounds},
          {"learning_rate", learning_rate},
          {"residual_mode", cbdt::to_string(residual_mode)},
          {"loss",
           {{"lambda", loss.lambda},
            {"gamma", loss.gamma},
            {"alpha", loss.alpha},
            {"tau_ref", loss.tau_ref},
            {"exact_chain_gradients", loss.exact_chain_gradients}}},
          {"scheduler", {{"mode", cbdt::to_string(schedule_mode)}, {"eta", eta}, {"eta_prime", eta_prime}}},
          {"tree",
           {{"max_depth", tree.max_depth},
            {"min_samples_leaf", tree.min_samples_leaf},
            {"split_reg_lambda", tree.split_reg_lambda},
            {"leaf_penalty_gamma", tree.leaf_penalty_gamma},
            {"max_bins", tree.max_bins},
            {"mode", cbdt::to_string(tree.mode)}}},
          {"nuisance_rounds", nuisance_rounds},
          {"seed", seed},
          {"tau_ref_source", cbdt::to_string(tau_ref_source)},
          {"couple_split_lambda", couple_split_lambda},
          {"refinement", cbdt::to_string(refinement)},
          {"trace_predictions", trace_predictions}};
}

BoosterConfig BoosterConfig::from_json(const nlohmann::json& j) {
  BoosterConfig c;
  c.num_rounds = j.value("num_rounds", c.num_rounds);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("residual_mode"))
    c.residual_mode = residual_mode_from_string(j.at("residual_mode").get<std::string>());
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    c.loss.lambda = l.value("lambda", c.loss.lambda);
    c.loss.gamma = l.value("gamma", c.loss.gamma);
    c.loss.alpha = l.value("alpha", c.loss.alpha);
    c.loss.tau_ref = l.value("tau_ref", c.loss.tau_ref);
    c.loss.exact_chain_gradients = l.value("exact_chain_gradients", false);
  }
  if (j.contains("scheduler")) {
    const auto& s = j.at("scheduler");
    if (s.contains("mode")) c.schedule_mode = schedule_mode_from_string(s.at("mode").get<std::string>());
    c.eta = s.value("eta", c.eta);
    c.eta_prime = s.value("eta_prime", c.eta);  // defaults to eta
  }
  if (j.contains("tree")) {
    const auto& t = j.at("tree");
    c.tree.max_depth = t.value("max_depth", c.tree.max_depth);
    c.tree.min_samples_leaf = t.value("min_samples_leaf", c.tree.min_samples_leaf);
    c.tree.split_reg_lambda = t.value("split_reg_lambda", c.tree.split_reg_lambda);
    c.tree.leaf_penalty_gamma = t.value("leaf_penalty_gamma", c.tree.leaf_penalty_gamma);
    c.tree.max_bins = t.value("max_bins", c.tree.max_bins);
    if (t.contains("mode")) c.tree.mode = split_mode_from_string(t.at("mode").get<std::string>());
  }
  c.nuisance_rounds = j.value("nuisance_rounds", c.nuisance_rounds);
  c.seed = j.value("seed", c.seed);
  if (j.contains("tau_ref_source"))
    c.tau_ref_source = tau_ref_source_from_string(j.at("tau_ref_source").get<std::string>());
  c.couple_split_lambda = j.value("couple_split_lambda", c.couple_split_lambda);
  if (j.contains("refinement"))
    c.refinement = refinement_mode_from_string(j.at("refinement").get<std::string>());
  c.trace_predictions = j.value("trace_predictions", false);
  c.validate();
  return c;
}

// ============================================================================
// Helpers
// ============================================================================

Matrix augment_with_treatment(const Matrix& x, std::span<const uint8_t> t) {
  require(int(t.size()) == x.rows(), "treatment length must match row count");
  Matrix out(x.rows(), x.cols() + 1);
  for (int i = 0; i < x.rows(); ++i) {
    out(i, 0) = double(t[i]);
    for (int j = 0; j < x.cols(); ++j) out(i, j + 1) = x(i, j);
  }
  return out;
}

Matrix augment_with_treatment(const Matrix& x, double t) {
  Matrix out(x.rows(), x.cols() + 1);
  for (int i = 0; i < x.rows(); ++i) {
    out(i, 0) = t;
    for (int j = 0; j < x.cols(); ++j) out(i, j + 1) = x(i, j);
  }
  return out;
}

std::vector<double> BoostedModel::predict_outcome(const Matrix& x,
                                                  std::span<const uint8_t> t) const {
  require(config.residual_mode == ResidualMode::kOutcomeContrast,
          "outcome head is only available in outcome_contrast mode");
  const Matrix aug = augment_with_treatment(x, t);
  std::vector<double> out(x.rows(), base_score);
  for (const auto& tree : outcome_trees) {
    const auto p = predict_tree(tree, aug);
    for (int i = 0; i < x.rows(); ++i) out[i] += config.learning_rate * p[i];
  }
  return out;
}

std::vector<double> BoostedModel::predict_outcome(const Matrix& x, double t) const {
  require(config.residual_mode == ResidualMode::kOutcomeContrast,
          "outcome head is only available in outcome_contrast mode");
  const Matrix aug = augment_with_treatment(x, t);
  std::vector<double> out(x.rows(), base_score);
  for (const auto& tree : outcome_trees) {
    const auto p = predict_tree(tree, aug);
    for (int i = 0; i < x.rows(); ++i) out[i] += config.learning_rate * p[i];
  }
  return out;
}

std::vector<double> BoostedModel::predict_cate(const Matrix& x) const {
  if (config.residual_mode == ResidualMode::kDoublyRobust) {
    std::vector<double> tau(x.rows(), 0.0);
    for (const auto& tree : effect_trees) {
      const auto p = predict_tree(tree, x);
      for (int i = 0; i < x.rows(); ++i) tau[i] += config.learning_rate * p[i];
    }
    return tau;
  }
  const auto y1 = predict_outcome(x, 1.0);
  const auto y0 = predict_outcome(x, 0.0);
  std::vector<double> tau(x.rows());
  for (int i = 0; i < x.rows(); ++i) tau[i] = y1[i] - y0[i];
  return tau;
}

nlohmann::json BoostedModel::to_json() const {
  nlohmann::json jo = nlohmann::json::array();
  for (const auto& t : outcome_trees) jo.push_back(t.to_json());
  nlohmann::json je = nlohmann::json::array();
  for (const auto& t : effect_trees) je.push_back(t.to_json());
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& r : trace)
    jt.push_back({{"k", r.k},
                  {"loss", r.loss},
                  {"grad_variance", r.grad_variance},
                  {"lambda", r.lambda},
                  {"alpha", r.alpha}});
  return {{"format", kModelFormatTag},
          {"config", config.to_json()},
          {"base_score", base_score},
          {"tau_ref_used", tau_ref_used},
          {"tau_ref_provenance", tau_ref_provenance},
          {"outcome_trees", jo},
          {"effect_trees", je},
          {"trace", jt}};
}

BoostedModel BoostedModel::from_json(const nlohmann::json& j) {
  const std::string tag = j.value("format", "");
  if (tag != kModelFormatTag)
    throw IoError("unsupported model format tag '" + tag + "' (expected " +
                  std::string(kModelFormatTag) + ")");
  BoostedModel m;
  m.config = BoosterConfig::from_json(j.at("config"));
  m.base_score = j.at("base_score").get<double>();
  m.tau_ref_used = j.value("tau_ref_used", 0.0);
  m.tau_ref_provenance = j.value("tau_ref_provenance", "");
  for (const auto& e : j.at("outcome_trees")) m.outcome_trees.push_back(RegressionTree::from_json(e));
  for (const auto& e : j.at("effect_trees")) m.effect_trees.push_back(RegressionTree::from_json(e));
  for (const auto& e : j.at("trace")) {
    TraceRow r;
    r.k = e.at("k").get<int>();
    r.loss = e.at("loss").get<double>();
    r.grad_variance = e.at("grad_variance").get<double>();
    r.lambda = e.at("lambda").get<double>();
    r.alpha = e.at("alpha").get<double>();
    m.trace.push_back(r);
  }
  return m;
}

void save_model(const BoostedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << model.to_json().dump(2) << "\n";
  if (!out) throw IoError("model write failed: " + path);
}

BoostedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return BoostedModel::from_json(j);
}

void write_trace_csv(const BoostedModel& model, const std::string& path) {
  CsvTable t;
  t.columns = {"k", "loss", "grad_variance", "lambda", "alpha", "seconds"};
  for (const auto& r : model.trace)
    t.rows.push_back({double(r.k), r.loss, r.grad_variance, r.lambda, r.alpha, r.seconds});
  write_csv(path, t);
}

// ============================================================================
// Residuals
// ============================================================================

std::vector<double> residuals_outcome_contrast(const BoostedModel& model,
                                               const CausalDataset& ds) {
  const auto factual = model.predict_outcome(ds.features, ds.treatment);
  const auto contrast = model.predict_cate(ds.features);
  std::vector<double> r(ds.n());
  for (int i = 0; i < ds.n(); ++i)
    r[i] = (ds.outcome[i] - factual[i]) - contrast[i];
  return r;
}

std::vector<double> residuals_doubly_robust(const BoostedModel& model,
                                            const NuisanceModels& nuis, const CausalDataset& ds) {
  require(int(nuis.m_values.size()) == ds.n(), "nuisance values not aligned with dataset");
  const auto tau = model.predict_cate(ds.features);
  std::vector<double> r(ds.n());
  for (int i = 0; i < ds.n(); ++i) {
    const double e = nuis.e_values[i];
    if (!(e > 0.0 && e < 1.0))
      throw NumericError("propensity estimate outside (0,1) after clipping");
    r[i] = ds.outcome[i] - nuis.m_values[i] - tau[i] * (double(ds.treatment[i]) - e);
  }
  return r;
}

// ============================================================================
// Nuisances
// ============================================================================

NuisanceModels fit_nuisance(const CausalDataset& ds, int rounds, uint64_t seed) {
  require(ds.n() >= 20, "nuisance fitting needs n >= 20");
  require(rounds >= 1, "nuisance rounds must be >= 1");
  ds.validate();
  const int n = ds.n();

  // seeded fold assignment, stratified by arm
  NuisanceModels nuis;
  nuis.fold_of.assign(n, 0);
  Rng rng(seed ^ 0xeadbeefcafef00dULL);
  for (int arm = 0; arm <= 1; ++arm) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (ds.treatment[i] == arm) idx.push_back(i);
    rng.shuffle(idx);
    for (size_t k = 0; k < idx.size(); ++k) nuis.fold_of[idx[k]] = int(k % 2);
  }

  PlainBoostParams params;
  params.rounds = rounds;
  params.learning_rate = 0.1;
  params.tree.max_depth = 3;
  params.tree.min_samples_leaf = 5;
  params.tree.split_reg_lambda = 1.0;

  for (int fold = 0; fold < 2; ++fold) {
    std::vector<int> train_rows, treated_rows, control_rows;
    for (int i = 0; i < n; ++i) {
      if (nuis.fold_of[i] == fold) continue;  // model for `fold` trains on the rest
      train_rows.push_back(i);
      (ds.treatment[i] ? treated_rows : control_rows).push_back(i);
    }
    if (treated_rows.empty() || control_rows.empty())
      throw ValidationError("cross-fitting fold is missing a treatment arm");

    auto gather = [&](const std::vector<int>& rows) {
      Matrix x(int(rows.size()), ds.d());
      std::vector<double> y(rows.size());
      std::vector<double> t(rows.size());
      for (size_t k = 0; k < rows.size(); ++k) {
        for (int j = 0; j < ds.d(); ++j) x(int(k), j) = ds.features(rows[k], j);
        y[k] = ds.outcome[rows[k]];
        t[k] = double(ds.treatment[rows[k]]);
      }
      return std::tuple{std::move(x), std::move(y), std::move(t)};
    };

    auto [x_all, y_all, t_all] = gather(train_rows);
    auto [x_tr, y_tr, t_tr] = gather(treated_rows);
    auto [x_co, y_co, t_co] = gather(control_rows);

    params.loss = BoostLoss::kSquared;
    nuis.m_hat[fold] = train_gbdt(x_all, y_all, params);
    nuis.mu1_hat[fold] = train_gbdt(x_tr, y_tr, params);
    nuis.mu0_hat[fold] = train_gbdt(x_co, y_co, params);
    params.loss = BoostLoss::kLogistic;
    nuis.e_hat[fold] = train_gbdt(x_all, t_all, params);
  }

  nuis.m_values.resize(n);
  nuis.mu0_values.resize(n);
  nuis.mu1_values.resize(n);
  nuis.e_values.resize(n);
  for (int i = 0; i < n; ++i) {
    const int fold = nuis.fold_of[i];
    const auto row = ds.features.row(i);
    nuis.m_values[i] = nuis.m_hat[fold].predict_row(row);
    nuis.mu0_values[i] = nuis.mu0_hat[fold].predict_row(row);
    nuis.mu1_values[i] = nuis.mu1_hat[fold].predict_row(row);
    nuis.e_values[i] = clamp(nuis.e_hat[fold].predict_row(row), 0.01, 0.99);
  }
  return nuis;
}

std::vector<double> aipw_pseudo_outcomes(const NuisanceModels& nuis, const CausalDataset& ds) {
  require(int(nuis.m_values.size()) == ds.n(), "nuisance values not aligned with dataset");
  std::vector<double> psi(ds.n());
  for (int i = 0; i < ds.n(); ++i) {
    const double e = nuis.e_values[i];
    const double m1 = nuis.mu1_values[i];
    const double m0 = nuis.mu0_values[i];
    const double t = double(ds.treatment[i]);
    psi[i] = m1 - m0 + t * (ds.outcome[i] - m1) / e -
             (1.0 - t) * (ds.outcome[i] - m0) / (1.0 - e);
  }
  return psi;
}

double aipw_ate(const NuisanceModels& nuis, const CausalDataset& ds) {
  const auto psi = aipw_pseudo_outcomes(nuis, ds);
  return mean_of(psi);
}

// ============================================================================
// Training loop
// ============================================================================

namespace {

double resolve_tau_ref(const BoosterConfig& config, const CausalDataset& ds,
                       std::string* provenance) {
  switch (config.tau_ref_source) {
    case TauRefSource::kFixed:
      *provenance = "fixed";
      return config.loss.tau_ref;
    case TauRefSource::kGroundTruth:
      require(ds.has_ground_truth(),
              "tau_ref_source=ground_truth requires mu0/mu1 columns in the dataset");
      *provenance = "ground_truth";
      return ds.true_ate();
    case TauRefSource::kDoublyRobust:
    default: {
      *provenance = "doubly_robust_plugin";
      const NuisanceModels nuis = fit_nuisance(ds, config.nuisance_rounds, config.seed);
      return aipw_ate(nuis, ds);
    }
  }
}

BoostedModel fit_outcome_contrast(const BoosterConfig& config, const CausalDataset& ds) {
  const int n = ds.n();
  const double nu = config.learning_rate;

  BoostedModel model;
  model.config = config;
  model.tau_ref_used = config.loss.tau_ref;
  model.tau_ref_provenance = "unresolved";
  CompositeLossParams loss = config.loss;
  loss.tau_ref = resolve_tau_ref(config, ds, &model.tau_ref_provenance);
  model.tau_ref_used = loss.tau_ref;
  model.config.loss.tau_ref = loss.tau_ref;

  model.base_score = mean_of(ds.outcome);

  const Matrix aug_factual = augment_with_treatment(ds.features, ds.treatment);
  const Matrix aug1 = augment_with_treatment(ds.features, 1.0);
  const Matrix aug0 = augment_with_treatment(ds.features, 0.0);

  std::vector<double> head_pred(n, model.base_score);  // factual outcome-head value
  std::vector<double> contrast(n, 0.0);                // head(1,x) - head(0,x)
  std::vector<double> correction(n, 0.0);              // accumulated descent steps

  SchedulerState sched = SchedulerState::make(config.loss.lambda, config.loss.alpha, config.eta,
                                              config.eta_prime, config.schedule_mode);

  std::vector<double> work(n), residual(n);
  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);

  for (int k = 1; k <= config.num_rounds; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lambda_k = sched.lambda_k;
    const double alpha_k = sched.alpha_k;
    loss.lambda = lambda_k;
    loss.alpha = alpha_k;

    for (int i = 0; i < n; ++i) {
      work[i] = head_pred[i] + correction[i];
      residual[i] = (ds.outcome[i] - work[i]) - contrast[i];
    }

    // second-order target: squared error against the residual target plus the
    // regularizer geometry evaluated at the working predictions
    const GradHess extras = regularizer_grad_hess(work, ds.outcome, ds.treatment, loss);
    for (int i = 0; i < n; ++i) {
      gh.g[i] = -2.0 * residual[i] + extras.g[i];
      gh.h[i] = 2.0 + extras.h[i];
    }

    TreeParams tp = config.tree;
    if (config.couple_split_lambda) tp.split_reg_lambda = lambda_k;
    RegressionTree tree = fit_tree(aug_factual, gh, tp);

    const auto df = predict_tree(tree, aug_factual);
    const auto d1 = predict_tree(tree, aug1);
    const auto d0 = predict_tree(tree, aug0);
    for (int i = 0; i < n; ++i) {
      head_pred[i] += nu * df[i];
      contrast[i] += nu * (d1[i] - d0[i]);
      work[i] = head_pred[i] + correction[i];
    }
    model.outcome_trees.push_back(std::move(tree));

    const double gv = mse_gradient_variance(work, ds.outcome);
    sched = scheduler_step(std::move(sched), gv);

    if (config.refinement != RefinementMode::kOff) {
      CompositeLossParams updated = loss;
      updated.lambda = sched.lambda_k;
      updated.alpha = sched.alpha_k;
      const GradHess step =
          config.refinement == RefinementMode::kFullGradient
              ? loss_grad_hess(work, ds.outcome, ds.treatment, updated)
              : regularizer_grad_hess(work, ds.outcome, ds.treatment, updated);
      for (int i = 0; i < n; ++i) {
        correction[i] -= nu * step.g[i];
        work[i] = head_pred[i] + correction[i];
      }
    }

    const double loss_k = loss_value(work, ds.outcome, ds.treatment, loss);
    if (!std::isfinite(loss_k))
      throw NumericError("training diverged: non-finite loss at iteration " + std::to_string(k) +
                         " (trace length " + std::to_string(model.trace.size()) + ")");
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    model.trace.push_back({k, loss_k, gv, lambda_k, alpha_k, dt});
    if (config.trace_predictions) model.traced_predictions.push_back(work);
  }
  return model;
}

BoostedModel fit_doubly_robust(const BoosterConfig& config, const CausalDataset& ds) {
  const int n = ds.n();
  const double nu = config.learning_rate;

  BoostedModel model;
  model.config = config;
  CompositeLossParams loss = config.loss;
  loss.tau_ref = resolve_tau_ref(config, ds, &model.tau_ref_provenance);
  model.tau_ref_used = loss.tau_ref;
  model.config.loss.tau_ref = loss.tau_ref;
  model.base_score = 0.0;  // effect head starts at zero

  const NuisanceModels nuis = fit_nuisance(ds, config.nuisance_rounds, config.seed);

  std::vector<double> tau_pred(n, 0.0);
  std::vector<double> implied(n), residual(n);
  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);

  SchedulerState sched = SchedulerState::make(config.loss.lambda, config.loss.alpha, config.eta,
                                              config.eta_prime, config.schedule_mode);

  for (int k = 1; k <= config.num_rounds; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lambda_k = sched.lambda_k;
    const double alpha_k = sched.alpha_k;
    loss.lambda = lambda_k;
    loss.alpha = alpha_k;

    // the effect head enters the factual prediction through m + tau * (t - e),
    // so composite-loss gradients chain into tau-space with factor (t - e);
    // the squared-error part reduces to -2 * residual * (t - e)
    for (int i = 0; i < n; ++i) {
      const double te = double(ds.treatment[i]) - nuis.e_values[i];
      residual[i] = ds.outcome[i] - nuis.m_values[i] - tau_pred[i] * te;
      implied[i] = nuis.m_values[i] + tau_pred[i] * te;
    }
    const GradHess at_implied = loss_grad_hess(implied, ds.outcome, ds.treatment, loss);
    for (int i = 0; i < n; ++i) {
      const double te = double(ds.treatment[i]) - nuis.e_values[i];
      gh.g[i] = at_implied.g[i] * te;
      gh.h[i] = at_implied.h[i] * te * te;
    }

    TreeParams tp = config.tree;
    if (config.couple_split_lambda) tp.split_reg_lambda = lambda_k;
    RegressionTree tree = fit_tree(ds.features, gh, tp);
    const auto delta = predict_tree(tree, ds.features);
    for (int i = 0; i < n; ++i) tau_pred[i] += nu * delta[i];
    model.effect_trees.push_back(std::move(tree));

    for (int i = 0; i < n; ++i)
      implied[i] = nuis.m_values[i] + tau_pred[i] * (double(ds.treatment[i]) - nuis.e_values[i]);
    const double gv = mse_gradient_variance(implied, ds.outcome);
    sched = scheduler_step(std::move(sched), gv);

    const double loss_k = loss_value(implied, ds.outcome, ds.treatment, loss);
    if (!std::isfinite(loss_k))
      throw NumericError("training diverged: non-finite loss at iteration " + std::to_string(k));
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    model.trace.push_back({k, loss_k, gv, lambda_k, alpha_k, dt});
    if (config.trace_predictions) model.traced_predictions.push_back(implied);
  }
  return model;
}

}  // namespace

BoostedModel fit(const BoosterConfig& config, const CausalDataset& ds) {
  config.validate();
  ds.validate();
  require(ds.n() >= 2 * config.tree.min_samples_leaf,
          "dataset too small for the configured min_samples_leaf");
  if (config.residual_mode == ResidualMode::kDoublyRobust)
    return fit_doubly_robust(config, ds);
  return fit_outcome_contrast(config, ds);
}

}  // namespace cbdt
