#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "cbdt/dataset.hpp"

using namespace cbdt;
namespace fs = std::filesystem;

namespace {

RawTable simple_raw(const std::vector<std::vector<double>>& rows,
                    const std::vector<std::string>& cols) {
  RawTable raw;
  raw.columns = cols;
  raw.rows = rows;
  raw.treatment_col = 0;
  raw.outcome_col = 1;
  return raw;
}

}  // namespace

TEST_CASE("linear-interpolation quantiles") {
  std::vector<double> v{1, 2, 3, 4, 100};
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(2.0));
  CHECK(quantile_sorted(v, 0.75) == doctest::Approx(4.0));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(3.0));
  std::vector<double> w{1, 2, 3, 4};
  CHECK(quantile_sorted(w, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("IQR fence removes the outlying row") {
  // fences are Q1 - 1.5 IQR = -1 and Q3 + 1.5 IQR = 7, so 100 goes
  std::vector<std::vector<double>> rows;
  const std::vector<double> xs{1, 2, 3, 4, 100};
  for (int i = 0; i < 5; ++i) rows.push_back({double(i % 2), double(i), xs[i]});
  rows[0][0] = 1;
  rows[1][0] = 0;
  const auto res = preprocess(simple_raw(rows, {"t", "y", "x"}), PreprocessSpec{});
  CHECK(res.rows_removed == 1);
  CHECK(res.data.n() == 4);
  CHECK(res.kept_rows == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("clean column is unchanged up to the z-score map") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 8; ++i) rows.push_back({double(i % 2), 0.5 * i, double(i)});
  const auto res = preprocess(simple_raw(rows, {"t", "y", "x"}), PreprocessSpec{});
  REQUIRE(res.data.n() == 8);
  // z-scored copy of 0..7: mean 3.5, population sd sqrt(5.25)
  const double sd = std::sqrt(5.25);
  for (int i = 0; i < 8; ++i)
    CHECK(res.data.features(i, 0) == doctest::Approx((i - 3.5) / sd).epsilon(1e-12));
  // outcome and treatment untouched
  for (int i = 0; i < 8; ++i) CHECK(res.data.outcome[i] == doctest::Approx(0.5 * i));
}

TEST_CASE("categorical column expands to one indicator per level") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 9; ++i) rows.push_back({double(i % 2), 1.0, double(i % 3)});
  PreprocessSpec spec;
  spec.categorical_columns = {2};
  const auto res = preprocess(simple_raw(rows, {"t", "y", "c"}), spec);
  REQUIRE(res.data.d() == 3);
  for (int i = 0; i < res.data.n(); ++i) {
    double sum = 0;
    for (int j = 0; j < 3; ++j) {
      const double v = res.data.features(i, j);
      CHECK((v == 0.0 || v == 1.0));
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("missing values are median-imputed before anything else") {
  std::vector<std::vector<double>> rows = {
      {1, 1.0, 2.0}, {0, 2.0, std::nan("")}, {1, 3.0, 4.0}, {0, 4.0, 6.0}};
  const auto res = preprocess(simple_raw(rows, {"t", "y", "x"}), PreprocessSpec{});
  CHECK(res.data.n() == 4);  // imputed median 4 is inside the fences
}

TEST_CASE("zero-variance column becomes constant zero with a warning") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({double(i % 2), double(i), 7.0});
  const auto res = preprocess(simple_raw(rows, {"t", "y", "x"}), PreprocessSpec{});
  REQUIRE(res.warnings.size() == 1);
  for (int i = 0; i < 6; ++i) CHECK(res.data.features(i, 0) == 0.0);
}

TEST_CASE("entirely missing column and bad treatment are rejected") {
  std::vector<std::vector<double>> rows = {{1, 1.0, std::nan("")}, {0, 2.0, std::nan("")}};
  CHECK_THROWS_AS(preprocess(simple_raw(rows, {"t", "y", "x"}), PreprocessSpec{}),
                  ValidationError);
  std::vector<std::vector<double>> rows2 = {{2, 1.0, 0.5}, {0, 2.0, 0.25}};
  CHECK_THROWS_WITH_AS(preprocess(simple_raw(rows2, {"t", "y", "x"}), PreprocessSpec{}),
                       doctest::Contains("row 0"), ValidationError);
}

TEST_CASE("preprocessing its own output is a fixed point up to re-centering") {
  // bounded, fence-free data: uniform grid has no IQR outliers, and after
  // z-scoring nothing reaches the clip bound
  std::vector<std::vector<double>> rows;
  Rng rng(11);
  for (int i = 0; i < 64; ++i)
    rows.push_back({double(i % 2), rng.normal(), -1.0 + 2.0 * (i / 63.0), rng.uniform(-1, 1)});
  const auto once = preprocess(simple_raw(rows, {"t", "y", "x1", "x2"}), PreprocessSpec{});

  std::vector<std::vector<double>> again;
  for (int i = 0; i < once.data.n(); ++i)
    again.push_back({double(once.data.treatment[i]), once.data.outcome[i],
                     once.data.features(i, 0), once.data.features(i, 1)});
  const auto twice = preprocess(simple_raw(again, {"t", "y", "x1", "x2"}), PreprocessSpec{});
  REQUIRE(twice.data.n() == once.data.n());
  double max_change = 0.0;
  for (int i = 0; i < once.data.n(); ++i)
    for (int j = 0; j < 2; ++j)
      max_change = std::max(max_change,
                            std::abs(twice.data.features(i, j) - once.data.features(i, j)));
  CHECK(max_change < 1e-9);
}

TEST_CASE("synthetic generator is deterministic and honors its contract") {
  SyntheticSpec spec;
  spec.n = 500;
  spec.seed = 42;
  const CausalDataset a = generate_synthetic(spec);
  const CausalDataset b = generate_synthetic(spec);
  CHECK(a.features.data() == b.features.data());
  CHECK(a.outcome == b.outcome);
  CHECK(a.treatment == b.treatment);

  SyntheticSpec other = spec;
  other.seed = 43;
  const CausalDataset c = generate_synthetic(other);
  CHECK(a.outcome != c.outcome);

  SyntheticSpec bad = spec;
  bad.n = 5;
  CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);
}

TEST_CASE("zero heterogeneity means a constant effect of 2") {
  SyntheticSpec spec;
  spec.n = 300;
  spec.heterogeneity = 0.0;
  spec.seed = 3;
  const CausalDataset ds = generate_synthetic(spec);
  for (double tau : ds.true_cate()) CHECK(tau == doctest::Approx(2.0));
  CHECK(synthetic_true_ate(spec) == doctest::Approx(2.0));
}

TEST_CASE("zero confounding keeps treatment assignment near 50/50") {
  // difference of group outcome means is then unbiased for the ATE; check the
  // treated fraction against its binomial error over repeated draws
  int treated = 0, total = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    SyntheticSpec spec;
    spec.n = 400;
    spec.confounding = 0.0;
    spec.seed = seed;
    const CausalDataset ds = generate_synthetic(spec);
    treated += ds.n_treated();
    total += ds.n();
  }
  const double frac = double(treated) / total;
  const double se = std::sqrt(0.25 / total);
  CHECK(std::abs(frac - 0.5) < 3.0 * se);
}

TEST_CASE("effect surface mean converges to the analytic ATE") {
  SyntheticSpec spec;
  spec.n = 100000;
  spec.heterogeneity = 1.0;
  spec.seed = 17;
  const CausalDataset ds = generate_synthetic(spec);
  const double ate = ds.true_ate();
  CHECK(std::abs(ate - synthetic_true_ate(spec)) / synthetic_true_ate(spec) < 0.02);
}

TEST_CASE("dataset csv round-trip is exact") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.d = 4;
  spec.seed = 9;
  const CausalDataset ds = generate_synthetic(spec);
  const std::string path = (fs::temp_directory_path() / "cbdt_ds_roundtrip.csv").string();
  save_dataset_csv(ds, path);
  const CausalDataset back = load_dataset_csv(path);
  CHECK(back.n() == ds.n());
  CHECK(back.d() == ds.d());
  CHECK(back.features.data() == ds.features.data());
  CHECK(back.outcome == ds.outcome);
  CHECK(back.mu0 == ds.mu0);
  CHECK(back.mu1 == ds.mu1);
  CHECK(back.y_cf == ds.y_cf);
  std::remove(path.c_str());
}

TEST_CASE("benchmark-layout loader validates the header and treatment column") {
  const auto dir = fs::temp_directory_path() / "cbdt_ihdp_test";
  fs::create_directories(dir);
  const CausalDataset ds = generate_ihdp_like(1);
  CHECK(ds.n() == 747);
  CHECK(ds.d() == 25);
  save_dataset_csv(ds, (dir / "ihdp_npci_1.csv").string());
  const CausalDataset back = load_ihdp_csv(dir.string(), 1);
  CHECK(back.n() == 747);
  CHECK(back.d() == 25);
  CHECK(back.has_ground_truth());

  // header missing a covariate column
  {
    CausalDataset trimmed = ds;
    trimmed.features = Matrix(ds.n(), 24);
    for (int i = 0; i < ds.n(); ++i)
      for (int j = 0; j < 24; ++j) trimmed.features(i, j) = ds.features(i, j);
    trimmed.feature_names.assign(ds.feature_names.begin(), ds.feature_names.end() - 1);
    save_dataset_csv(trimmed, (dir / "bad_header.csv").string());
    CHECK_THROWS_WITH_AS(load_ihdp_csv((dir / "bad_header.csv").string(), 1),
                         doctest::Contains("x25"), IoError);
  }
  // non-binary treatment value
  {
    CsvTable t = read_csv((dir / "ihdp_npci_1.csv").string());
    t.rows[3][t.require_col("treatment")] = 2.0;
    write_csv((dir / "bad_treatment.csv").string(), t);
    CHECK_THROWS_WITH_AS(load_ihdp_csv((dir / "bad_treatment.csv").string(), 1),
                         doctest::Contains("row 4"), ValidationError);
  }
  fs::remove_all(dir);
}

TEST_CASE("stratified split keeps both arms and is deterministic") {
  SyntheticSpec spec;
  spec.n = 100;
  spec.confounding = 0.0;
  spec.seed = 12;
  CausalDataset ds = generate_synthetic(spec);
  // force exactly 50/50 arms
  for (int i = 0; i < 100; ++i) ds.treatment[i] = uint8_t(i % 2);

  auto [train, test] = split_train_test(ds, 0.8, 5);
  CHECK(train.n() == 80);
  CHECK(test.n() == 20);
  CHECK(train.n_treated() == 40);
  CHECK(train.n_control() == 40);

  auto [train2, test2] = split_train_test(ds, 0.8, 5);
  CHECK(train2.features.data() == train.features.data());

  auto [train3, test3] = split_train_test(ds, 0.8, 6);
  CHECK(train3.features.data() != train.features.data());
}

TEST_CASE("degenerate split fractions raise an error") {
  CausalDataset ds;
  ds.features = Matrix(3, 1);
  ds.treatment = {1, 0, 0};
  ds.outcome = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(split_train_test(ds, 0.99, 1), ValidationError);
}

TEST_CASE("operations leave their input dataset untouched") {
  SyntheticSpec spec;
  spec.n = 80;
  spec.seed = 2;
  const CausalDataset ds = generate_synthetic(spec);
  const auto features_copy = ds.features.data();
  const auto outcome_copy = ds.outcome;
  (void)split_train_test(ds, 0.5, 3);
  (void)subset_rows(ds, {0, 5, 9});
  CHECK(ds.features.data() == features_copy);
  CHECK(ds.outcome == outcome_copy);
}
