#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "cbdt/metrics.hpp"

using namespace cbdt;

TEST_CASE("pehe on pinned cases") {
  {
    std::vector<double> t{1.0, -2.0, 0.5};
    const PeheResult r = pehe(t, t);
    CHECK(r.pehe_sq == 0.0);
    CHECK(r.pehe_sqrt == 0.0);
  }
  {
    std::vector<double> hat{0.8, 1.3, -0.2}, truth{0.5, 1.0, -0.5};
    const PeheResult r = pehe(hat, truth);  // uniform offset of 0.3
    CHECK(r.pehe_sqrt == doctest::Approx(0.3).epsilon(1e-12));
  }
  {
    std::vector<double> hat{1, 2}, truth{0, 0};
    const PeheResult r = pehe(hat, truth);
    CHECK(r.pehe_sq == doctest::Approx(2.5));
    CHECK(r.pehe_sqrt == doctest::Approx(1.5811).epsilon(1e-4));
    CHECK(r.pehe_sqrt * r.pehe_sqrt == doctest::Approx(r.pehe_sq).epsilon(1e-12));
  }
}

TEST_CASE("ate error is the absolute deviation") {
  CHECK(ate_error(1.5, 1.5) == 0.0);
  CHECK(ate_error(2.5, 2.0) == doctest::Approx(0.5));
  CHECK(ate_error(2.0, 2.5) == doctest::Approx(0.5));
}

TEST_CASE("efficiency-adjusted score reproduces the published table entries") {
  CHECK(eap(0.5504, 0.3300, 1.8) == doctest::Approx(0.1707).epsilon(0.002));
  CHECK(eap(0.6695, 0.9686, 12.8) == doctest::Approx(0.3509).epsilon(0.003));
  CHECK(eap(12.0435, 0.5392, 1.9) == doctest::Approx(4.0290).epsilon(0.001));
  CHECK(eap(0.0, 0.5, 2.0) == 0.0);
}

TEST_CASE("eap rejects time products outside its domain") {
  CHECK_THROWS_AS(eap(0.5, 50.0, 25.0), NumericError);  // product 1.25
  CHECK_THROWS_AS(eap(0.5, 1000.0, 1.0), NumericError); // product exactly 1
  CHECK_THROWS_AS(eap(0.5, 0.0, 1.0), ValidationError);
}

TEST_CASE("eap grows with pehe and with each time argument") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = rng.uniform(0.01, 5.0);
    const double tr = rng.uniform(0.01, 5.0);
    const double inf = rng.uniform(0.01, 100.0);
    if (tr * inf / 1000.0 >= 0.9) continue;
    const double base = eap(p, tr, inf);
    CHECK(eap(p * 1.1, tr, inf) > base);
    CHECK(eap(p, tr * 1.1, inf) > base);
    CHECK(eap(p, tr, inf * 1.1) > base);
  }
}

TEST_CASE("timing harness averages post-warmup repetitions") {
  int calls = 0;
  const double mean = measure_timing(
      [&] {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      },
      6, 2);
  CHECK(calls == 6);
  CHECK(mean > 0.004);
  CHECK(mean < 0.1);  // generous bound for scheduler jitter
  CHECK_THROWS_AS(measure_timing([] {}, 2, 2), ValidationError);
  const double tiny = measure_timing([] {}, 3, 1);
  CHECK(tiny > 0.0);  // monotonic clock still advances
}

TEST_CASE("bootstrap interval on degenerate estimators") {
  SyntheticSpec spec;
  spec.n = 200;
  spec.seed = 31;
  const CausalDataset ds = generate_synthetic(spec);

  const AteEstimator exact = [](const std::vector<int>&) { return 2.0; };
  const BootstrapCi ci = bootstrap_ci(exact, ds, 60, 0.95, 7);
  CHECK(ci.lo == doctest::Approx(2.0));
  CHECK(ci.hi == doctest::Approx(2.0));

  // resamples keep both arms by construction
  const AteEstimator check_arms = [&](const std::vector<int>& rows) {
    int treated = 0;
    for (int r : rows) treated += ds.treatment[r];
    REQUIRE(treated > 0);
    REQUIRE(treated < int(rows.size()));
    return 0.0;
  };
  (void)bootstrap_ci(check_arms, ds, 60, 0.9, 8);
}

TEST_CASE("coverage is 1 for a perfect estimator and 0 for a biased one") {
  auto source = [](uint64_t seed) {
    SyntheticSpec spec;
    spec.n = 120;
    spec.seed = seed;
    return generate_synthetic(spec);
  };
  const double truth = 2.0;

  const AteEstimatorFactory perfect = [](const CausalDataset&) -> AteEstimator {
    return [](const std::vector<int>&) { return 2.0; };
  };
  CHECK(bootstrap_coverage(perfect, source, truth, 5, 50, 0.95, 1) == doctest::Approx(1.0));

  const AteEstimatorFactory biased = [](const CausalDataset& ds) -> AteEstimator {
    // tiny spread far from the truth
    return [&ds](const std::vector<int>& rows) {
      double s = 0.0;
      for (int r : rows) s += ds.outcome[r];
      return 12.0 + 1e-6 * (s / rows.size());
    };
  };
  CHECK(bootstrap_coverage(biased, source, truth, 5, 50, 0.95, 1) == doctest::Approx(0.0));
}
