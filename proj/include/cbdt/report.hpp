#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbdt/stats.hpp"
#include "json.hpp"

namespace cbdt {

// Per-seed metric vectors for one method. External methods carry published
// point values only (no per-seed data) and join the tables for context.
struct MethodResult {
  std::string name;
  std::vector<double> pehe_sqrt;
  std::vector<double> pehe_sq;
  std::vector<double> ate_err;
  std::vector<double> rmse;  // on factual outcomes
  double train_time_s = 0.0;
  double infer_ms_per_sample = 0.0;
  bool external = false;
};

struct MethodSummary {
  std::string name;
  double pehe_sqrt_mean = 0.0, pehe_lo = 0.0, pehe_hi = 0.0;
  double ate_mean = 0.0, ate_lo = 0.0, ate_hi = 0.0;
  double rmse_mean = 0.0;
  double train_time_s = 0.0;
  double infer_ms_per_sample = 0.0;
  std::optional<double> eap;  // unset when the time product leaves the valid domain
  std::string eap_note;
  bool external = false;
};

struct PairwiseTest {
  std::string method_a, method_b;
  std::string metric;  // "pehe" or "ate"
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;  // after Bonferroni over the whole family
  bool degenerate = false;
};

struct EvaluationReport {
  std::vector<MethodResult> methods;
  std::vector<MethodSummary> summaries;
  std::vector<PairwiseTest> tests;  // first internal method is the reference
  double alpha = 0.05;
  int family_size = 0;
  double bonferroni_threshold = 0.0;
  bool trimmed = true;
  std::vector<uint64_t> seeds;
  std::string notes;
  nlohmann::json config_snapshot;
};

// Summaries use the trimmed mean (drop one high, one low) when enabled and
// at least three seeds exist; intervals are t-based over the raw per-seed
// values. Pairwise t-tests run against the first non-external method, on
// both PEHE and ATE error, with Bonferroni over all tests performed.
EvaluationReport assemble_report(const std::vector<MethodResult>& methods,
                                 const std::vector<uint64_t>& seeds, double alpha, bool trimmed,
                                 nlohmann::json config_snapshot);

std::string render_report_text(const EvaluationReport& report);
void write_report_text(const EvaluationReport& report, const std::string& path);
void write_report_csv(const EvaluationReport& report, const std::string& path);
void write_per_seed_csv(const EvaluationReport& report, const std::string& path);

// Scatter of train time vs PEHE (log-log) with bubble area giving ATE error.
void write_scatter_svg(const EvaluationReport& report, const std::string& path);
// Per-method bars of log10 PEHE and train time with the efficiency score overlaid.
void write_bars_svg(const EvaluationReport& report, const std::string& path);

// ----------------------------------------------------------------------------
// Hyperparameter grids
// ----------------------------------------------------------------------------

struct GridCell {
  double lambda = 0.0, alpha = 0.0, eta = 0.0;
  double pehe_sqrt = 0.0, ate_error = 0.0, rmse = 0.0;
};

void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path);
// One heatmap panel per eta value, lambda x alpha cells colored by PEHE.
void write_grid_heatmap_svg(const std::vector<GridCell>& cells, const std::string& path);

}  // namespace cbdt
