#include "cbdt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace cbdt {

int CausalDataset::n_treated() const {
  int c = 0;
  for (uint8_t t : treatment) c += t;
  return c;
}

int CausalDataset::n_control() const { return n() - n_treated(); }

std::vector<double> CausalDataset::true_cate() const {
  require(has_ground_truth(), "dataset has no ground-truth potential outcomes");
  std::vector<double> tau(mu1.size());
  for (size_t i = 0; i < tau.size(); ++i) tau[i] = mu1[i] - mu0[i];
  return tau;
}

double CausalDataset::true_ate() const {
  const auto tau = true_cate();
  return mean_of(tau);
}

void CausalDataset::validate() const {
  const size_t nn = size_t(n());
  require(treatment.size() == nn, "treatment length mismatch");
  require(outcome.size() == nn, "outcome length mismatch");
  require(mu0.empty() || mu0.size() == nn, "mu0 length mismatch");
  require(mu1.empty() || mu1.size() == nn, "mu1 length mismatch");
  require(y_cf.empty() || y_cf.size() == nn, "y_cf length mismatch");
  require(mu0.empty() == mu1.empty(), "mu0 and mu1 must be present together");
  for (size_t i = 0; i < nn; ++i)
    require(treatment[i] == 0 || treatment[i] == 1,
            "treatment must be 0/1 (row " + std::to_string(i) + ")");
  require(n_treated() >= 1 && n_control() >= 1, "both treatment arms must be non-empty");
  require(all_finite(features.data()), "features contain non-finite values");
  require(all_finite(outcome), "outcomes contain non-finite values");
  if (!feature_names.empty())
    require(int(feature_names.size()) == d(), "feature_names length mismatch");
}

CausalDataset subset_rows(const CausalDataset& ds, const std::vector<int>& rows) {
  CausalDataset out;
  out.features = Matrix(int(rows.size()), ds.d());
  out.treatment.resize(rows.size());
  out.outcome.resize(rows.size());
  if (!ds.mu0.empty()) {
    out.mu0.resize(rows.size());
    out.mu1.resize(rows.size());
  }
  if (!ds.y_cf.empty()) out.y_cf.resize(rows.size());
  out.feature_names = ds.feature_names;
  for (size_t k = 0; k < rows.size(); ++k) {
    const int i = rows[k];
    for (int j = 0; j < ds.d(); ++j) out.features(int(k), j) = ds.features(i, j);
    out.treatment[k] = ds.treatment[i];
    out.outcome[k] = ds.outcome[i];
    if (!ds.mu0.empty()) {
      out.mu0[k] = ds.mu0[i];
      out.mu1[k] = ds.mu1[i];
    }
    if (!ds.y_cf.empty()) out.y_cf[k] = ds.y_cf[i];
  }
  return out;
}

// ============================================================================
// Preprocessing
// ============================================================================

double quantile_sorted(const std::vector<double>& sorted, double p) {
  require(!sorted.empty(), "quantile of empty vector");
  if (sorted.size() == 1) return sorted[0];
  const double pos = double(sorted.size() - 1) * p;
  const size_t lo = size_t(pos);
  const double frac = pos - double(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

// Fill NaNs in one column. Median imputation uses the column median of the
// observed values; multiple imputation averages several seeded draws from the
// observed empirical distribution.
void impute_column(std::vector<double>& col, Imputation mode, uint64_t seed) {
  std::vector<double> observed;
  for (double v : col)
    if (!std::isnan(v)) observed.push_back(v);
  if (observed.empty()) throw ValidationError("column has no observed values to impute from");
  if (observed.size() == col.size()) return;

  if (mode == Imputation::kMedian) {
    const double med = median_of(observed);
    for (double& v : col)
      if (std::isnan(v)) v = med;
  } else {
    Rng rng(seed);
    constexpr int kDraws = 5;
    for (double& v : col) {
      if (!std::isnan(v)) continue;
      double s = 0.0;
      for (int m = 0; m < kDraws; ++m) s += observed[rng.uniform_int(int(observed.size()))];
      v = s / kDraws;
    }
  }
}

}  // namespace

PreprocessResult preprocess(const RawTable& raw, const PreprocessSpec& spec) {
  spec.validate();
  require(raw.treatment_col >= 0 && raw.treatment_col < int(raw.columns.size()),
          "raw table: treatment column not identified");
  require(raw.outcome_col >= 0 && raw.outcome_col < int(raw.columns.size()),
          "raw table: outcome column not identified");
  const int n_raw = int(raw.rows.size());
  require(n_raw > 0, "raw table is empty");
  const int ncol = int(raw.columns.size());

  std::set<int> categorical(spec.categorical_columns.begin(), spec.categorical_columns.end());
  std::set<int> special;
  special.insert(raw.treatment_col);
  special.insert(raw.outcome_col);
  for (const auto& [role, col] : raw.passthrough) special.insert(col);

  // column-major copy with imputation applied to covariate columns
  std::vector<std::vector<double>> cols(ncol, std::vector<double>(n_raw));
  for (int j = 0; j < ncol; ++j) {
    bool all_missing = true;
    for (int i = 0; i < n_raw; ++i) {
      cols[j][i] = raw.rows[i][j];
      if (!std::isnan(cols[j][i])) all_missing = false;
    }
    if (all_missing) throw ValidationError("column '" + raw.columns[j] + "' is entirely missing");
    if (special.count(j)) {
      for (int i = 0; i < n_raw; ++i)
        if (std::isnan(cols[j][i]))
          throw ValidationError("missing value in column '" + raw.columns[j] + "' at row " +
                                std::to_string(i));
      continue;
    }
    auto it = spec.imputation_overrides.find(j);
    const Imputation mode = it != spec.imputation_overrides.end() ? it->second
                                                                  : spec.default_imputation;
    impute_column(cols[j], mode, spec.seed + uint64_t(j) * 7919ULL);
  }

  // validate treatment before any row filtering so the reported index matches
  // the input file
  for (int i = 0; i < n_raw; ++i) {
    const double t = cols[raw.treatment_col][i];
    if (t != 0.0 && t != 1.0)
      throw ValidationError("non-binary treatment value " + format_double(t) + " at row " +
                            std::to_string(i));
  }

  // IQR fences per continuous covariate column; a row outside any fence goes
  std::vector<char> drop(n_raw, 0);
  for (int j = 0; j < ncol; ++j) {
    if (special.count(j) || categorical.count(j)) continue;
    std::vector<double> sorted = cols[j];
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - spec.iqr_multiplier * iqr;
    const double hi = q3 + spec.iqr_multiplier * iqr;
    for (int i = 0; i < n_raw; ++i)
      if (cols[j][i] < lo || cols[j][i] > hi) drop[i] = 1;
  }

  PreprocessResult result;
  for (int i = 0; i < n_raw; ++i)
    if (!drop[i]) result.kept_rows.push_back(i);
  result.rows_removed = n_raw - int(result.kept_rows.size());
  const int n = int(result.kept_rows.size());
  require(n > 0, "preprocessing removed every row");

  // output feature columns, in original column order
  std::vector<std::string> out_names;
  std::vector<std::vector<double>> out_cols;
  for (int j = 0; j < ncol; ++j) {
    if (special.count(j)) continue;
    std::vector<double> kept(n);
    for (int i = 0; i < n; ++i) kept[i] = cols[j][result.kept_rows[i]];

    if (categorical.count(j)) {
      std::set<double> levels(kept.begin(), kept.end());
      for (double level : levels) {
        std::vector<double> ind(n);
        for (int i = 0; i < n; ++i) ind[i] = kept[i] == level ? 1.0 : 0.0;
        out_names.push_back(raw.columns[j] + "=" + format_double(level));
        out_cols.push_back(std::move(ind));
      }
      continue;
    }

    const double m = mean_of(kept);
    double sd = 0.0;
    for (double v : kept) sd += (v - m) * (v - m);
    sd = std::sqrt(sd / n);
    if (sd == 0.0) {
      result.warnings.push_back("column '" + raw.columns[j] +
                                "' has zero variance; passed through as constant zero");
      std::fill(kept.begin(), kept.end(), 0.0);
    } else {
      for (double& v : kept) v = clamp((v - m) / sd, -spec.zscore_clip_sigma, spec.zscore_clip_sigma);
    }
    out_names.push_back(raw.columns[j]);
    out_cols.push_back(std::move(kept));
  }

  CausalDataset ds;
  ds.features = Matrix(n, int(out_cols.size()));
  for (int j = 0; j < int(out_cols.size()); ++j)
    for (int i = 0; i < n; ++i) ds.features(i, j) = out_cols[j][i];
  ds.feature_names = out_names;
  ds.treatment.resize(n);
  ds.outcome.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.treatment[i] = uint8_t(cols[raw.treatment_col][result.kept_rows[i]]);
    ds.outcome[i] = cols[raw.outcome_col][result.kept_rows[i]];
  }
  for (const auto& [role, col] : raw.passthrough) {
    std::vector<double> kept(n);
    for (int i = 0; i < n; ++i) kept[i] = cols[col][result.kept_rows[i]];
    if (role == "mu0")
      ds.mu0 = std::move(kept);
    else if (role == "mu1")
      ds.mu1 = std::move(kept);
    else if (role == "y_cf")
      ds.y_cf = std::move(kept);
    else
      throw ValidationError("unknown passthrough role '" + role + "'");
  }
  ds.validate();
  result.data = std::move(ds);
  return result;
}

// ============================================================================
// CSV layout
// ============================================================================

static CausalDataset dataset_from_table(const CsvTable& t, int n_covariates_required) {
  const int jt = t.require_col("treatment");
  const int jy = t.require_col("y_factual");
  const int jcf = t.col_index("y_cfactual");
  const int jm0 = t.col_index("mu0");
  const int jm1 = t.col_index("mu1");
  if (n_covariates_required > 0) {
    for (int k = 1; k <= n_covariates_required; ++k) t.require_col("x" + std::to_string(k));
    if (jcf < 0) t.require_col("y_cfactual");
    if (jm0 < 0) t.require_col("mu0");
    if (jm1 < 0) t.require_col("mu1");
  }

  std::vector<int> xcols;
  std::vector<std::string> xnames;
  for (int k = 1;; ++k) {
    const int j = t.col_index("x" + std::to_string(k));
    if (j < 0) break;
    xcols.push_back(j);
    xnames.push_back("x" + std::to_string(k));
  }
  require(!xcols.empty(), "no covariate columns x1..xd found");

  const int n = int(t.rows.size());
  require(n > 0, "dataset file has no rows");
  CausalDataset ds;
  ds.features = Matrix(n, int(xcols.size()));
  ds.feature_names = xnames;
  ds.treatment.resize(n);
  ds.outcome.resize(n);
  if (jm0 >= 0 && jm1 >= 0) {
    ds.mu0.resize(n);
    ds.mu1.resize(n);
  }
  if (jcf >= 0) ds.y_cf.resize(n);
  for (int i = 0; i < n; ++i) {
    const double tv = t.rows[i][jt];
    if (tv != 0.0 && tv != 1.0)
      throw ValidationError("non-binary treatment value " + format_double(tv) + " at row " +
                            std::to_string(i + 1));
    ds.treatment[i] = uint8_t(tv);
    ds.outcome[i] = t.rows[i][jy];
    for (size_t j = 0; j < xcols.size(); ++j) ds.features(i, int(j)) = t.rows[i][xcols[j]];
    if (jm0 >= 0 && jm1 >= 0) {
      ds.mu0[i] = t.rows[i][jm0];
      ds.mu1[i] = t.rows[i][jm1];
    }
    if (jcf >= 0) ds.y_cf[i] = t.rows[i][jcf];
  }
  ds.validate();
  return ds;
}

CausalDataset load_dataset_csv(const std::string& path) {
  return dataset_from_table(read_csv(path), 0);
}

CausalDataset load_ihdp_csv(const std::string& path, int replicate) {
  namespace fs = std::filesystem;
  std::string file = path;
  if (fs::is_directory(path))
    file = (fs::path(path) / ("ihdp_npci_" + std::to_string(replicate) + ".csv")).string();
  CsvTable t = read_csv(file);

  const int jrep = t.col_index("replicate");
  if (jrep >= 0) {
    CsvTable filtered;
    filtered.columns = t.columns;
    for (const auto& row : t.rows)
      if (int(row[jrep]) == replicate) filtered.rows.push_back(row);
    require(!filtered.rows.empty(), "no rows for replicate " + std::to_string(replicate));
    t = std::move(filtered);
  }
  return dataset_from_table(t, 25);
}

void save_dataset_csv(const CausalDataset& ds, const std::string& path) {
  CsvTable t;
  t.columns = {"treatment", "y_factual"};
  const bool cf = !ds.y_cf.empty();
  const bool mu = ds.has_ground_truth();
  if (cf) t.columns.push_back("y_cfactual");
  if (mu) {
    t.columns.push_back("mu0");
    t.columns.push_back("mu1");
  }
  for (int j = 0; j < ds.d(); ++j)
    t.columns.push_back(ds.feature_names.empty() ? "x" + std::to_string(j + 1)
                                                 : ds.feature_names[j]);
  for (int i = 0; i < ds.n(); ++i) {
    std::vector<double> row;
    row.push_back(double(ds.treatment[i]));
    row.push_back(ds.outcome[i]);
    if (cf) row.push_back(ds.y_cf[i]);
    if (mu) {
      row.push_back(ds.mu0[i]);
      row.push_back(ds.mu1[i]);
    }
    for (int j = 0; j < ds.d(); ++j) row.push_back(ds.features(i, j));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

// ============================================================================
// Synthetic generators
// ============================================================================

static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double synthetic_true_ate(const SyntheticSpec& spec) {
  spec.validate();
  // both heterogeneity terms have zero mean under standard-normal covariates
  return 2.0;
}

CausalDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed * 0x100000001b3ULL + 14695981039346656037ULL);
  const int n = spec.n, d = spec.d;
  const int ia = 0, ib = 1 % d, ic = 2 % d;

  CausalDataset ds;
  ds.features = Matrix(n, d);
  ds.treatment.resize(n);
  ds.outcome.resize(n);
  ds.mu0.resize(n);
  ds.mu1.resize(n);
  ds.y_cf.resize(n);
  for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.normal();

  for (int i = 0; i < n; ++i) {
    const double xa = ds.features(i, ia), xb = ds.features(i, ib), xc = ds.features(i, ic);
    const double tau = 2.0 + spec.heterogeneity * (0.6 * xa + 0.8 * std::sin(xb));
    const double m0 = xa + 0.5 * (xc * xc - 1.0) + 0.3 * xb;
    ds.mu0[i] = m0;
    ds.mu1[i] = m0 + tau;
    const double e = clamp(sigmoid(spec.confounding * (0.5 * xa + 0.5 * xc)), 0.05, 0.95);
    ds.treatment[i] = uint8_t(rng.bernoulli(e));
    const double eps = spec.noise_sigma * rng.normal();
    const double eps_cf = spec.noise_sigma * rng.normal();
    ds.outcome[i] = (ds.treatment[i] ? ds.mu1[i] : ds.mu0[i]) + eps;
    ds.y_cf[i] = (ds.treatment[i] ? ds.mu0[i] : ds.mu1[i]) + eps_cf;
  }

  // guarantee both arms are inhabited (possible miss at tiny n)
  if (ds.n_treated() == 0) ds.treatment[0] = 1;
  if (ds.n_control() == 0) ds.treatment[n - 1] = 0;
  ds.validate();
  return ds;
}

CausalDataset generate_step_effect(const StepEffectSpec& spec) {
  require(spec.n >= 10, "step spec: n must be >= 10");
  require(spec.d >= 1, "step spec: d must be >= 1");
  require(spec.noise_sigma > 0.0, "step spec: noise_sigma must be > 0");
  Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  const int n = spec.n, d = spec.d;
  const int ib = 1 % d, ic = 2 % d;

  CausalDataset ds;
  ds.features = Matrix(n, d);
  ds.treatment.resize(n);
  ds.outcome.resize(n);
  ds.mu0.resize(n);
  ds.mu1.resize(n);
  for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.normal();
  for (int i = 0; i < n; ++i) {
    const double tau =
        ds.features(i, 0) > spec.breakpoint ? spec.effect_high : spec.effect_low;
    const double m0 = 0.4 * ds.features(i, ic) + 0.3 * ds.features(i, ib);
    ds.mu0[i] = m0;
    ds.mu1[i] = m0 + tau;
    ds.treatment[i] = uint8_t(rng.bernoulli(0.5));
    ds.outcome[i] = (ds.treatment[i] ? ds.mu1[i] : ds.mu0[i]) + spec.noise_sigma * rng.normal();
  }
  if (ds.n_treated() == 0) ds.treatment[0] = 1;
  if (ds.n_control() == 0) ds.treatment[n - 1] = 0;
  ds.validate();
  return ds;
}

CausalDataset generate_ihdp_like(int replicate) {
  require(replicate >= 1, "replicate index must be >= 1");
  Rng rng(0x51700a11d2b5ULL + uint64_t(replicate) * 0x9e3779b97f4a7c15ULL);
  const int n = 747, d = 25, n_cont = 6;

  CausalDataset ds;
  ds.features = Matrix(n, d);
  ds.treatment.resize(n);
  ds.outcome.resize(n);
  ds.mu0.resize(n);
  ds.mu1.resize(n);
  ds.y_cf.resize(n);
  for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));

  // 6 continuous + 19 binary covariates
  std::vector<double> pj(d, 0.0);
  for (int j = n_cont; j < d; ++j) pj[j] = 0.15 + 0.35 * ((j * 37) % 10) / 10.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n_cont; ++j) ds.features(i, j) = rng.normal();
    for (int j = n_cont; j < d; ++j) ds.features(i, j) = double(rng.bernoulli(pj[j]));
  }

  for (int i = 0; i < n; ++i) {
    const double z1 = ds.features(i, 0), z2 = ds.features(i, 1), z3 = ds.features(i, 2);
    const double z4 = ds.features(i, 3);
    const double b1 = ds.features(i, n_cont), b2 = ds.features(i, n_cont + 1);
    const double b3 = ds.features(i, n_cont + 2);

    // effect surface reuses the interaction structure of the baseline surface
    const double ridge = (z1 > 0.0 ? 1.0 : 0.0) * (z3 > -0.3 ? 1.0 : 0.0);
    const double tau = 0.8 + 1.1 * ridge + 0.6 * std::sin(z2) + 0.5 * b2;
    const double m0 = 2.0 + 1.0 * ridge * z1 - 0.6 * z4 + 0.8 * std::sin(z2) + 0.6 * b1 -
                      0.4 * b3 + 0.3 * (z3 * z3 - 1.0);
    ds.mu0[i] = m0;
    ds.mu1[i] = m0 + tau;
    const double e = clamp(sigmoid(-1.4 + 0.7 * z1 + 0.5 * b1 - 0.4 * z4), 0.05, 0.95);
    ds.treatment[i] = uint8_t(rng.bernoulli(e));
    ds.outcome[i] = (ds.treatment[i] ? ds.mu1[i] : ds.mu0[i]) + 1.0 * rng.normal();
    ds.y_cf[i] = (ds.treatment[i] ? ds.mu0[i] : ds.mu1[i]) + 1.0 * rng.normal();
  }
  if (ds.n_treated() == 0) ds.treatment[0] = 1;
  if (ds.n_control() == 0) ds.treatment[n - 1] = 0;
  ds.validate();
  return ds;
}

std::pair<CausalDataset, CausalDataset> split_train_test(const CausalDataset& ds, double fraction,
                                                         uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, "fraction must be in (0, 1)");
  ds.validate();
  Rng rng(seed ^ 0xa5a5a5a55a5a5a5aULL);

  std::vector<int> train_idx, test_idx;
  for (int arm = 0; arm <= 1; ++arm) {
    std::vector<int> idx;
    for (int i = 0; i < ds.n(); ++i)
      if (ds.treatment[i] == arm) idx.push_back(i);
    rng.shuffle(idx);
    const int take = int(fraction * double(idx.size()));
    if (take < 1 || take >= int(idx.size()))
      throw ValidationError("split would empty a treatment arm (arm " + std::to_string(arm) +
                            ", size " + std::to_string(idx.size()) + ")");
    for (int k = 0; k < int(idx.size()); ++k)
      (k < take ? train_idx : test_idx).push_back(idx[k]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset_rows(ds, train_idx), subset_rows(ds, test_idx)};
}

}  // namespace cbdt
