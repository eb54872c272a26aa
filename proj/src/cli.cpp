#include "cbdt/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cbdt/booster.hpp"
#include "cbdt/kernels.hpp"
#include "cbdt/meta.hpp"
#include "cbdt/metrics.hpp"
#include "cbdt/report.hpp"
#include "cbdt/rules.hpp"

namespace cbdt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ----------------------------------------------------------------------------
// Config handling: defaults <- file <- --set overrides
// ----------------------------------------------------------------------------

json default_config() {
  return json{
      {"output_dir", "run"},
      {"seeds", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}},
      {"dataset",
       {{"source", "synthetic"},
        {"path", ""},
        {"replicate", 1},
        {"n", 2000},
        {"d", 10},
        {"heterogeneity", 1.0},
        {"confounding", 1.0},
        {"noise_sigma", 1.0},
        {"preprocess", false},
        {"step", {{"breakpoint", 0.5}, {"effect_low", 1.0}, {"effect_high", 3.0}, {"noise_sigma", 0.5}}}}},
      {"booster", BoosterConfig().to_json()},
      {"baseline",
       {{"rounds", 200}, {"learning_rate", 0.1}, {"max_depth", 3}, {"min_samples_leaf", 5},
        {"split_reg_lambda", 1.0}}},
      {"methods", {"cbdt", "x"}},
      {"external_methods", json::array()},
      {"benchmark",
       {{"train_fraction", 0.8}, {"timing_repetitions", 3}, {"timing_warmup", 1}, {"alpha", 0.05},
        {"trimmed", true}}},
      {"rules",
       {{"surrogate_depth", 3}, {"min_support", 0.05}, {"bootstrap_draws", 500},
        {"ci_level", 0.95}, {"min_split_gain", 0.01}}},
      {"grid",
       {{"lambda", {0.01, 0.1, 1.0, 10.0}},
        {"alpha", {0.5, 1.0, 2.0}},
        {"eta", {0.01, 0.05, 0.1, 0.2}},
        {"seeds_per_cell", 2}}}};
}

void merge_json(json& base, const json& overlay) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge_json(base[it.key()], *it);
    else
      base[it.key()] = *it;
  }
}

json load_config(const std::string& path, const std::vector<std::string>& sets) {
  json cfg = default_config();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json file_cfg;
    try {
      in >> file_cfg;
    } catch (const std::exception& e) {
      throw ValidationError("config parse error in " + path + ": " + e.what());
    }
    merge_json(cfg, file_cfg);
  }
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ValidationError("--set expects key.path=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    for (auto& c : key)
      if (c == '.') c = '/';
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (...) {
      parsed = value;  // bare strings allowed
    }
    cfg[json::json_pointer("/" + key)] = parsed;
  }
  return cfg;
}

fs::path resolve_output_dir(const json& cfg, const std::string& flag_override) {
  fs::path dir = flag_override.empty() ? fs::path(cfg.at("output_dir").get<std::string>())
                                       : fs::path(flag_override);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("CBDT_OUTPUT_ROOT")) dir = fs::path(root) / dir;
  }
  fs::create_directories(dir);
  return dir;
}

struct RunContext {
  json cfg;
  fs::path out;
  std::vector<std::string> files;

  void emit(const std::string& name) { files.push_back(name); }
  void finish(const std::string& command) {
    {
      std::ofstream f(out / "resolved_config.json");
      f << cfg.dump(2) << "\n";
    }
    json manifest{{"format", "cbdt-run/1"}, {"command", command}, {"files", files}};
    manifest["files"].push_back("resolved_config.json");
    manifest["files"].push_back("manifest.json");
    std::ofstream f(out / "manifest.json");
    f << manifest.dump(2) << "\n";
  }
};

// ----------------------------------------------------------------------------
// Dataset plumbing
// ----------------------------------------------------------------------------

CausalDataset preprocess_loaded(const CausalDataset& ds, const json& dcfg) {
  RawTable raw;
  raw.columns.push_back("treatment");
  raw.columns.push_back("y_factual");
  raw.treatment_col = 0;
  raw.outcome_col = 1;
  int next = 2;
  if (!ds.y_cf.empty()) {
    raw.columns.push_back("y_cfactual");
    raw.passthrough["y_cf"] = next++;
  }
  if (ds.has_ground_truth()) {
    raw.columns.push_back("mu0");
    raw.passthrough["mu0"] = next++;
    raw.columns.push_back("mu1");
    raw.passthrough["mu1"] = next++;
  }
  for (int j = 0; j < ds.d(); ++j) raw.columns.push_back(ds.feature_names[j]);
  for (int i = 0; i < ds.n(); ++i) {
    std::vector<double> row;
    row.push_back(double(ds.treatment[i]));
    row.push_back(ds.outcome[i]);
    if (!ds.y_cf.empty()) row.push_back(ds.y_cf[i]);
    if (ds.has_ground_truth()) {
      row.push_back(ds.mu0[i]);
      row.push_back(ds.mu1[i]);
    }
    for (int j = 0; j < ds.d(); ++j) row.push_back(ds.features(i, j));
    raw.rows.push_back(std::move(row));
  }
  PreprocessSpec spec;
  spec.seed = dcfg.value("seed", 1);
  PreprocessResult res = preprocess(raw, spec);
  for (const auto& w : res.warnings) std::cerr << "preprocess: " << w << "\n";
  return res.data;
}

CausalDataset dataset_for_seed(const json& dcfg, uint64_t seed) {
  const std::string source = dcfg.value("source", "synthetic");
  CausalDataset ds;
  if (source == "synthetic") {
    SyntheticSpec spec;
    spec.n = dcfg.value("n", 2000);
    spec.d = dcfg.value("d", 10);
    spec.heterogeneity = dcfg.value("heterogeneity", 1.0);
    spec.confounding = dcfg.value("confounding", 1.0);
    spec.noise_sigma = dcfg.value("noise_sigma", 1.0);
    spec.seed = seed;
    ds = generate_synthetic(spec);
  } else if (source == "step") {
    StepEffectSpec spec;
    spec.n = dcfg.value("n", 4000);
    spec.d = dcfg.value("d", 5);
    const json& st = dcfg.value("step", json::object());
    spec.breakpoint = st.value("breakpoint", 0.5);
    spec.effect_low = st.value("effect_low", 1.0);
    spec.effect_high = st.value("effect_high", 3.0);
    spec.noise_sigma = st.value("noise_sigma", 0.5);
    spec.seed = seed;
    ds = generate_step_effect(spec);
  } else if (source == "ihdp_like") {
    ds = generate_ihdp_like(int(seed));
  } else if (source == "ihdp") {
    ds = load_ihdp_csv(dcfg.at("path").get<std::string>(), int(seed));
  } else if (source == "csv") {
    ds = load_dataset_csv(dcfg.at("path").get<std::string>());
  } else {
    throw ValidationError("dataset.source: unknown value '" + source +
                          "' (expected synthetic|step|ihdp_like|ihdp|csv)");
  }
  if (dcfg.value("preprocess", false)) ds = preprocess_loaded(ds, dcfg);
  return ds;
}

// ----------------------------------------------------------------------------
// Method runners
// ----------------------------------------------------------------------------

BoosterConfig booster_from_cfg(const json& cfg, uint64_t seed) {
  BoosterConfig bc = BoosterConfig::from_json(cfg.at("booster"));
  bc.seed = seed;
  return bc;
}

MetaLearnerSpec meta_spec_from_cfg(const json& cfg, MetaLearnerKind kind, uint64_t seed) {
  const json& b = cfg.at("baseline");
  MetaLearnerSpec spec;
  spec.kind = kind;
  spec.rounds = b.value("rounds", 200);
  spec.learning_rate = b.value("learning_rate", 0.1);
  spec.base_tree.max_depth = b.value("max_depth", 3);
  spec.base_tree.min_samples_leaf = b.value("min_samples_leaf", 5);
  spec.base_tree.split_reg_lambda = b.value("split_reg_lambda", 1.0);
  spec.seed = seed;
  return spec;
}

struct SeedMetrics {
  double pehe_sqrt = 0.0, pehe_sq = 0.0, ate_err = 0.0, rmse = 0.0;
};

SeedMetrics score_predictions(const CausalDataset& test, const std::vector<double>& tau_hat,
                              const std::vector<double>* factual_pred) {
  SeedMetrics out;
  const auto tau_true = test.true_cate();
  const PeheResult p = pehe(tau_hat, tau_true);
  out.pehe_sqrt = p.pehe_sqrt;
  out.pehe_sq = p.pehe_sq;
  out.ate_err = ate_error(mean_of(tau_hat), test.true_ate());
  if (factual_pred) {
    double s = 0.0;
    for (int i = 0; i < test.n(); ++i) {
      const double d = (*factual_pred)[i] - test.outcome[i];
      s += d * d;
    }
    out.rmse = std::sqrt(s / test.n());
  }
  return out;
}

// one method on one seed; returns metrics and fills timing on request
SeedMetrics run_method_on_seed(const std::string& method, const json& cfg, uint64_t seed,
                               double* train_s, double* infer_ms_per_sample) {
  const json& bench = cfg.at("benchmark");
  const double fraction = bench.value("train_fraction", 0.8);
  CausalDataset ds = dataset_for_seed(cfg.at("dataset"), seed);
  auto [train, test] = split_train_test(ds, fraction, seed);

  const int reps = train_s ? bench.value("timing_repetitions", 3) : 1;
  const int warmup = train_s ? bench.value("timing_warmup", 1) : 0;

  if (method == "cbdt") {
    BoosterConfig bc = booster_from_cfg(cfg, seed);
    BoostedModel model;
    auto fit_once = [&] { model = fit(bc, train); };
    if (train_s)
      *train_s = measure_timing(fit_once, reps, warmup);
    else
      fit_once();
    std::vector<double> tau_hat;
    auto infer_once = [&] { tau_hat = model.predict_cate(test.features); };
    if (infer_ms_per_sample)
      *infer_ms_per_sample = measure_timing(infer_once, reps, warmup) * 1000.0 / test.n();
    else
      infer_once();
    const auto factual = model.predict_outcome(test.features, test.treatment);
    return score_predictions(test, tau_hat, &factual);
  }

  const MetaLearnerKind kind = meta_kind_from_string(method);
  MetaLearnerSpec spec = meta_spec_from_cfg(cfg, kind, seed);
  MetaLearner learner;
  auto fit_once = [&] { learner = fit_meta(spec, train); };
  if (train_s)
    *train_s = measure_timing(fit_once, reps, warmup);
  else
    fit_once();
  std::vector<double> tau_hat;
  auto infer_once = [&] { tau_hat = learner.predict_cate(test.features); };
  if (infer_ms_per_sample)
    *infer_ms_per_sample = measure_timing(infer_once, reps, warmup) * 1000.0 / test.n();
  else
    infer_once();
  return score_predictions(test, tau_hat, nullptr);
}

std::vector<uint64_t> seeds_from_cfg(const json& cfg) {
  std::vector<uint64_t> seeds;
  for (const auto& s : cfg.at("seeds")) seeds.push_back(s.get<uint64_t>());
  require(!seeds.empty(), "config: seeds list is empty");
  return seeds;
}

// ----------------------------------------------------------------------------
// Commands
// ----------------------------------------------------------------------------

int cmd_generate_data(RunContext& ctx) {
  const json& dcfg = ctx.cfg.at("dataset");
  const auto seeds = seeds_from_cfg(ctx.cfg);
  for (uint64_t seed : seeds) {
    CausalDataset ds = dataset_for_seed(dcfg, seed);
    const std::string name = dcfg.value("source", "synthetic") == "ihdp_like"
                                 ? "ihdp_npci_" + std::to_string(seed) + ".csv"
                                 : "data_seed" + std::to_string(seed) + ".csv";
    save_dataset_csv(ds, (ctx.out / name).string());
    ctx.emit(name);
  }
  ctx.finish("generate-data");
  std::cout << "wrote " << seeds.size() << " dataset file(s) to " << ctx.out << "\n";
  return 0;
}

int cmd_train(RunContext& ctx) {
  const auto seeds = seeds_from_cfg(ctx.cfg);
  const uint64_t seed = seeds.front();
  CausalDataset ds = dataset_for_seed(ctx.cfg.at("dataset"), seed);
  BoosterConfig bc = booster_from_cfg(ctx.cfg, seed);
  BoostedModel model = fit(bc, ds);
  save_model(model, (ctx.out / "model.json").string());
  write_trace_csv(model, (ctx.out / "trace.csv").string());
  ctx.emit("model.json");
  ctx.emit("trace.csv");
  ctx.finish("train");
  std::cout << "trained " << model.outcome_trees.size() + model.effect_trees.size()
            << " trees; final loss " << model.trace.back().loss << "; tau_ref "
            << model.tau_ref_used << " (" << model.tau_ref_provenance << ")\n";
  return 0;
}

int cmd_benchmark(RunContext& ctx) {
  const auto seeds = seeds_from_cfg(ctx.cfg);
  std::vector<std::string> methods;
  for (const auto& m : ctx.cfg.at("methods")) methods.push_back(m.get<std::string>());
  require(!methods.empty(), "config: methods list is empty");
  for (const auto& m : methods)
    require(m == "cbdt" || m == "s" || m == "t" || m == "x" || m == "dr",
            "methods must be drawn from {cbdt, s, t, x, dr}, got '" + m + "'");

  std::vector<MethodResult> results;
  for (const auto& method : methods) {
    MethodResult r;
    r.name = method;
    for (size_t si = 0; si < seeds.size(); ++si) {
      double train_s = 0.0, infer_ms = 0.0;
      const bool timed = si == 0;  // timing measured on the first seed
      const SeedMetrics m = run_method_on_seed(method, ctx.cfg, seeds[si],
                                               timed ? &train_s : nullptr,
                                               timed ? &infer_ms : nullptr);
      if (timed) {
        r.train_time_s = train_s;
        r.infer_ms_per_sample = infer_ms;
      }
      r.pehe_sqrt.push_back(m.pehe_sqrt);
      r.pehe_sq.push_back(m.pehe_sq);
      r.ate_err.push_back(m.ate_err);
      r.rmse.push_back(m.rmse);
    }
    results.push_back(std::move(r));
  }
  for (const auto& ext : ctx.cfg.at("external_methods")) {
    MethodResult r;
    r.name = ext.at("name").get<std::string>();
    r.external = true;
    r.pehe_sqrt.push_back(ext.value("pehe_sqrt", 0.0));
    r.pehe_sq.push_back(ext.value("pehe_sqrt", 0.0) * ext.value("pehe_sqrt", 0.0));
    r.ate_err.push_back(ext.value("ate_error", 0.0));
    r.train_time_s = ext.value("train_s", 0.0);
    r.infer_ms_per_sample = ext.value("infer_ms", 0.0);
    results.push_back(std::move(r));
  }

  const json& bench = ctx.cfg.at("benchmark");
  EvaluationReport rep = assemble_report(results, seeds, bench.value("alpha", 0.05),
                                         bench.value("trimmed", true), ctx.cfg);
  write_report_text(rep, (ctx.out / "report.txt").string());
  write_report_csv(rep, (ctx.out / "report.csv").string());
  write_per_seed_csv(rep, (ctx.out / "per_seed.csv").string());
  write_scatter_svg(rep, (ctx.out / "time_vs_pehe.svg").string());
  write_bars_svg(rep, (ctx.out / "method_bars.svg").string());
  for (const char* f : {"report.txt", "report.csv", "per_seed.csv", "time_vs_pehe.svg",
                        "method_bars.svg"})
    ctx.emit(f);
  ctx.finish("benchmark");
  std::cout << render_report_text(rep);
  return 0;
}

int cmd_ablate(RunContext& ctx) {
  const auto seeds = seeds_from_cfg(ctx.cfg);
  struct Variant {
    std::string name;
    std::function<void(json&)> apply;
  };
  const std::vector<Variant> variants = {
      {"full", [](json&) {}},
      {"no_intra_group_variance", [](json& c) { c["booster"]["loss"]["lambda"] = 0.0; }},
      {"no_ate_calibration", [](json& c) { c["booster"]["loss"]["alpha"] = 0.0; }},
      {"static_scheduler", [](json& c) { c["booster"]["scheduler"]["mode"] = "static"; }}};

  std::vector<std::vector<double>> pehe(variants.size()), ate(variants.size());
  for (size_t v = 0; v < variants.size(); ++v) {
    json cfg = ctx.cfg;
    variants[v].apply(cfg);
    for (uint64_t seed : seeds) {
      const SeedMetrics m = run_method_on_seed("cbdt", cfg, seed, nullptr, nullptr);
      pehe[v].push_back(m.pehe_sqrt);
      ate[v].push_back(m.ate_err);
    }
  }

  const double full_pehe = trimmed_mean(pehe[0]);
  const double full_ate = trimmed_mean(ate[0]);
  std::ofstream txt(ctx.out / "ablation.txt");
  std::ofstream csv(ctx.out / "ablation.csv");
  csv << "variant,pehe_sqrt,ate_error,pehe_change_pct,ate_change_pct\n";
  txt << "variant                      sqrt-PEHE   ATE err     dPEHE%   dATE%\n";
  for (size_t v = 0; v < variants.size(); ++v) {
    const double p = trimmed_mean(pehe[v]);
    const double a = trimmed_mean(ate[v]);
    const double dp = full_pehe > 0.0 ? 100.0 * (p - full_pehe) / full_pehe : 0.0;
    const double da = full_ate > 0.0 ? 100.0 * (a - full_ate) / full_ate : 0.0;
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s %-11.4f %-11.4f %+-8.1f %+-8.1f\n",
                  variants[v].name.c_str(), p, a, dp, da);
    txt << line;
    csv << variants[v].name << "," << format_double(p) << "," << format_double(a) << ","
        << format_double(dp) << "," << format_double(da) << "\n";
  }
  ctx.emit("ablation.txt");
  ctx.emit("ablation.csv");
  ctx.finish("ablate");
  std::cout << "ablation table written to " << ctx.out << "\n";
  return 0;
}

int cmd_sensitivity(RunContext& ctx) {
  const json& grid = ctx.cfg.at("grid");
  std::vector<double> lambdas, alphas, etas;
  for (const auto& v : grid.at("lambda")) lambdas.push_back(v.get<double>());
  for (const auto& v : grid.at("alpha")) alphas.push_back(v.get<double>());
  for (const auto& v : grid.at("eta")) etas.push_back(v.get<double>());
  const int seeds_per_cell = grid.value("seeds_per_cell", 2);
  const auto seeds = seeds_from_cfg(ctx.cfg);

  struct Cell {
    double lambda, alpha, eta;
  };
  std::vector<Cell> cells;
  for (double l : lambdas)
    for (double a : alphas)
      for (double e : etas) cells.push_back({l, a, e});

  std::vector<GridCell> results(cells.size());
  std::exception_ptr first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int c = 0; c < int(cells.size()); ++c) {
    try {
      json cfg = ctx.cfg;
      cfg["booster"]["loss"]["lambda"] = cells[c].lambda;
      cfg["booster"]["loss"]["alpha"] = cells[c].alpha;
      cfg["booster"]["scheduler"]["eta"] = cells[c].eta;
      cfg["booster"]["scheduler"]["eta_prime"] = cells[c].eta;
      double ps = 0.0, as = 0.0, rs = 0.0;
      for (int s = 0; s < seeds_per_cell; ++s) {
        const uint64_t seed = seeds[s % seeds.size()];
        const SeedMetrics m = run_method_on_seed("cbdt", cfg, seed, nullptr, nullptr);
        ps += m.pehe_sqrt;
        as += m.ate_err;
        rs += m.rmse;
      }
      results[c] = {cells[c].lambda, cells[c].alpha, cells[c].eta,
                    ps / seeds_per_cell, as / seeds_per_cell, rs / seeds_per_cell};
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  write_grid_csv(results, (ctx.out / "grid.csv").string());
  write_grid_heatmap_svg(results, (ctx.out / "heatmap.svg").string());

  // ranked table
  std::vector<GridCell> ranked = results;
  std::sort(ranked.begin(), ranked.end(),
            [](const GridCell& a, const GridCell& b) { return a.pehe_sqrt < b.pehe_sqrt; });
  std::ofstream txt(ctx.out / "ranked.txt");
  txt << "rank  lambda   alpha   eta     sqrt-PEHE  ATE err   RMSE\n";
  for (size_t r = 0; r < ranked.size(); ++r) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-5zu %-8.2f %-7.2f %-7.3f %-10.4f %-9.4f %-9.4f\n", r + 1,
                  ranked[r].lambda, ranked[r].alpha, ranked[r].eta, ranked[r].pehe_sqrt,
                  ranked[r].ate_error, ranked[r].rmse);
    txt << line;
  }
  ctx.emit("grid.csv");
  ctx.emit("heatmap.svg");
  ctx.emit("ranked.txt");
  ctx.finish("sensitivity");
  std::cout << "sensitivity grid (" << results.size() << " cells) written to " << ctx.out << "\n";
  return 0;
}

int cmd_rules(RunContext& ctx, const std::string& model_path) {
  const auto seeds = seeds_from_cfg(ctx.cfg);
  const uint64_t seed = seeds.front();
  CausalDataset ds = dataset_for_seed(ctx.cfg.at("dataset"), seed);

  BoostedModel model;
  if (!model_path.empty()) {
    model = load_model(model_path);
  } else {
    model = fit(booster_from_cfg(ctx.cfg, seed), ds);
  }

  const json& rcfg = ctx.cfg.at("rules");
  RuleExtractionSpec spec;
  spec.surrogate_depth = rcfg.value("surrogate_depth", 3);
  spec.min_support = rcfg.value("min_support", 0.05);
  spec.bootstrap_draws = rcfg.value("bootstrap_draws", 500);
  spec.ci_level = rcfg.value("ci_level", 0.95);
  spec.min_split_gain = rcfg.value("min_split_gain", 0.01);
  spec.seed = seed;

  const RuleSet rules = extract_rules(model, ds, spec);
  const FidelityResult fid = rule_fidelity(rules, model, ds);

  write_rules_text(rules, ds.feature_names, (ctx.out / "rules.txt").string());
  write_rules_csv(rules, (ctx.out / "rules.csv").string());
  {
    std::ofstream f(ctx.out / "rules.json");
    f << rules.to_json().dump(2) << "\n";
  }
  json summary{{"rule_count", rules.rules.size()},
               {"fidelity", fid.fidelity},
               {"uncovered_fraction", fid.uncovered_fraction},
               {"diagnostic", rules.diagnostic}};
  if (ds.has_ground_truth()) {
    const auto checks = rule_truth_check(rules, ds);
    json jc = json::array();
    for (const auto& c : checks)
      jc.push_back({{"true_effect", c.true_effect},
                    {"abs_deviation", c.abs_deviation},
                    {"ci_covers", c.ci_covers}});
    summary["truth_check"] = jc;
  }
  {
    std::ofstream f(ctx.out / "rules_summary.json");
    f << summary.dump(2) << "\n";
  }
  for (const char* f : {"rules.txt", "rules.csv", "rules.json", "rules_summary.json"}) ctx.emit(f);
  ctx.finish("rules");
  std::cout << rules.rules.size() << " rule(s), fidelity " << fid.fidelity << "\n";
  for (const auto& r : rules.rules) std::cout << "  " << r.to_text(ds.feature_names) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"gradient-boosted heterogeneous treatment effect estimation"};
  app.require_subcommand(1);

  std::string config_path, output_override, model_path;
  std::vector<std::string> sets;
  bool serial = false;
  app.add_option("--config,-c", config_path, "JSON configuration file");
  app.add_option("--output,-o", output_override, "output directory (overrides config)");
  app.add_option("--set", sets, "override a config field, e.g. --set booster.num_rounds=100");
  app.add_flag("--serial", serial, "disable the OpenMP kernel paths");

  CLI::App* c_gen = app.add_subcommand("generate-data", "write synthetic benchmark files");
  CLI::App* c_train = app.add_subcommand("train", "fit one model and persist it with its trace");
  CLI::App* c_bench = app.add_subcommand("benchmark", "multi-seed method comparison with report");
  CLI::App* c_abl = app.add_subcommand("ablate", "full model vs single-component ablations");
  CLI::App* c_sens = app.add_subcommand("sensitivity", "hyperparameter grid with heatmaps");
  CLI::App* c_rules = app.add_subcommand("rules", "extract effect rules from a model");
  c_rules->add_option("--model", model_path, "existing model file (otherwise trains first)");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    kernels::set_parallel(!serial);
    RunContext ctx;
    ctx.cfg = load_config(config_path, sets);
    ctx.out = resolve_output_dir(ctx.cfg, output_override);

    if (c_gen->parsed()) return cmd_generate_data(ctx);
    if (c_train->parsed()) return cmd_train(ctx);
    if (c_bench->parsed()) return cmd_benchmark(ctx);
    if (c_abl->parsed()) return cmd_ablate(ctx);
    if (c_sens->parsed()) return cmd_sensitivity(ctx);
    if (c_rules->parsed()) return cmd_rules(ctx, model_path);
    std::cerr << "no command given\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace cbdt
