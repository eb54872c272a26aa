#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cbdt/objective.hpp"
#include "test_util.hpp"

using namespace cbdt;

namespace {

struct Instance {
  std::vector<double> yhat, y;
  std::vector<uint8_t> w;
};

Instance random_instance(int n, uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  inst.yhat.resize(n);
  inst.y.resize(n);
  inst.w.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.yhat[i] = rng.normal();
    inst.y[i] = rng.normal();
    inst.w[i] = uint8_t(rng.bernoulli(0.4));
  }
  inst.w[0] = 1;
  inst.w[1] = 0;
  return inst;
}

}  // namespace

TEST_CASE("group stats on two-point and hand-computed cases") {
  {
    std::vector<double> yhat{1, 3};
    std::vector<uint8_t> w{1, 0};
    const GroupStats s = group_stats(yhat, w);
    CHECK(s.mean_t == doctest::Approx(1.0));
    CHECK(s.mean_c == doctest::Approx(3.0));
    CHECK(s.ate_hat == doctest::Approx(-2.0));
  }
  {
    std::vector<double> yhat{2, 4, 6, 8};
    std::vector<uint8_t> w{1, 1, 0, 0};
    const GroupStats s = group_stats(yhat, w);
    CHECK(s.mean_t == doctest::Approx(3.0));
    CHECK(s.mean_c == doctest::Approx(7.0));
    CHECK(s.ate_hat == doctest::Approx(-4.0));
    CHECK(s.n_t + s.n_c == 4);
  }
  {
    // constant predictions imply zero estimated effect
    std::vector<double> yhat{5, 5, 5};
    std::vector<uint8_t> w{1, 0, 1};
    CHECK(group_stats(yhat, w).ate_hat == doctest::Approx(0.0));
  }
  {
    std::vector<double> yhat{1.0};
    std::vector<uint8_t> w{1};
    CHECK_THROWS_AS(group_stats(yhat, w), ValidationError);
  }
}

TEST_CASE("loss value matches hand evaluation") {
  CompositeLossParams params;
  {
    std::vector<double> v{0.5, -1.25, 2.0};
    std::vector<uint8_t> w{1, 0, 1};
    CHECK(loss_value(v, v, w, params) == doctest::Approx(0.0));
  }
  {
    std::vector<double> yhat{1, 0}, y{0, 0};
    std::vector<uint8_t> w{1, 0};
    params.lambda = 1.0;
    params.gamma = 1.0;
    params.alpha = 1.0;
    params.tau_ref = 0.0;
    // 1 (mse) + 0 (singleton arms) + 0.25 (global) + 1 (ate gap)
    CHECK(loss_value(yhat, y, w, params) == doctest::Approx(2.25).epsilon(1e-12));
  }
  {
    // perfect fit with matched reference effect: every term vanishes
    std::vector<double> y{2, 2, 1, 1};
    std::vector<uint8_t> w{1, 1, 0, 0};
    params.tau_ref = 1.0;
    CHECK(loss_value(y, y, w, params) == doctest::Approx(0.0));
  }
}

TEST_CASE("loss value is non-negative on random instances") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = random_instance(30, seed);
    CompositeLossParams params;
    Rng rng(seed * 31);
    params.lambda = rng.uniform(0, 3);
    params.gamma = rng.uniform(0, 3);
    params.alpha = rng.uniform(0, 3);
    params.tau_ref = rng.normal();
    CHECK(loss_value(inst.yhat, inst.y, inst.w, params) >= 0.0);
  }
}

TEST_CASE("gradients at the stationary point of each term") {
  CompositeLossParams params;
  {
    // pure squared error at the optimum
    std::vector<double> y{1, 2, 3, 4};
    std::vector<uint8_t> w{1, 0, 1, 0};
    const GradHess gh = loss_grad_hess(y, y, w, params);
    for (int i = 0; i < 4; ++i) {
      CHECK(gh.g[i] == doctest::Approx(0.0));
      CHECK(gh.h[i] == doctest::Approx(2.0));
    }
  }
  {
    // sample at its arm mean with matched effect and calibration: only the
    // squared-error pull remains
    params.lambda = 2.0;
    params.gamma = 1.5;
    params.alpha = 0.7;
    std::vector<double> yhat{3, 3, 1, 1};
    std::vector<double> y{3, 3, 1, 1};
    std::vector<uint8_t> w{1, 1, 0, 0};
    params.tau_ref = 2.0;  // equals ate_hat
    const GradHess gh = loss_grad_hess(yhat, y, w, params);
    for (int i = 0; i < 4; ++i) CHECK(gh.g[i] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match frozen-statistics finite differences") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = random_instance(20, seed);
    CompositeLossParams params;
    Rng rng(seed * 101);
    params.lambda = rng.uniform(0.1, 3);
    params.gamma = rng.uniform(0.1, 3);
    params.alpha = rng.uniform(0.1, 3);
    params.tau_ref = rng.normal();

    const GradHess gh = loss_grad_hess(inst.yhat, inst.y, inst.w, params);
    std::vector<int> points;
    for (int i = 0; i < 10; ++i) points.push_back(rng.uniform_int(20));
    const auto fd = testutil::fd_gradient_frozen(inst.yhat, inst.y, inst.w, params, points, 1e-5);
    for (size_t k = 0; k < points.size(); ++k)
      CHECK(testutil::rel_err(gh.g[points[k]], fd[k]) < 1e-6);
  }
}

TEST_CASE("fully chained gradient equals the frozen-statistics gradient") {
  // the chain corrections through the arm means cancel exactly (deviations
  // from a mean sum to zero), so both conventions give one gradient; the
  // discrepancy stays at finite-difference noise for any n
  for (int n : {100, 200}) {
    const Instance inst = random_instance(n, uint64_t(n) * 7);
    CompositeLossParams params;
    params.lambda = 1.5;
    params.gamma = 0.8;
    params.alpha = 1.2;
    params.tau_ref = 0.5;
    const GradHess gh = loss_grad_hess(inst.yhat, inst.y, inst.w, params);
    std::vector<int> points{0, 1, n / 2, n - 1};
    const auto fd = testutil::fd_gradient_chain(inst.yhat, inst.y, inst.w, params, points, 1e-5);
    for (size_t k = 0; k < points.size(); ++k)
      CHECK(testutil::rel_err(gh.g[points[k]], fd[k]) < 1e-6);
  }
}

TEST_CASE("exact-chain option changes Hessians, not gradients") {
  const Instance inst = random_instance(60, 99);
  CompositeLossParams frozen;
  frozen.lambda = 2.0;
  frozen.gamma = 1.0;
  frozen.alpha = 1.0;
  frozen.tau_ref = 0.3;
  CompositeLossParams chained = frozen;
  chained.exact_chain_gradients = true;

  const GradHess a = loss_grad_hess(inst.yhat, inst.y, inst.w, frozen);
  const GradHess b = loss_grad_hess(inst.yhat, inst.y, inst.w, chained);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.g[i] == doctest::Approx(b.g[i]).epsilon(1e-12));
    CHECK(b.h[i] < a.h[i]);  // exact curvature is strictly smaller here
    CHECK(b.h[i] > 0.0);
  }
}

TEST_CASE("ATE-term gradients cancel over the sample") {
  const Instance inst = random_instance(50, 123);
  CompositeLossParams params;
  params.alpha = 2.5;  // isolate the effect-calibration term
  params.tau_ref = -1.0;
  const GradHess gh = regularizer_grad_hess(inst.yhat, inst.y, inst.w, params);
  double total = 0.0;
  for (double g : gh.g) total += g;
  CHECK(std::abs(total) < 1e-12 * 50);
}

TEST_CASE("Hessians stay positive whenever any weight is active") {
  const Instance inst = random_instance(40, 5);
  for (double lambda : {0.0, 1.0})
    for (double gamma : {0.0, 0.5})
      for (double alpha : {0.0, 2.0}) {
        CompositeLossParams params;
        params.lambda = lambda;
        params.gamma = gamma;
        params.alpha = alpha;
        const GradHess gh = loss_grad_hess(inst.yhat, inst.y, inst.w, params);
        for (double h : gh.h) CHECK(h >= 2.0);
      }
}

TEST_CASE("gradient variance of the squared-error term") {
  {
    std::vector<double> y{1, 2, 3};
    CHECK(mse_gradient_variance(y, y) == doctest::Approx(0.0));
  }
  {
    // constant residual shift: all gradients equal, variance zero
    std::vector<double> yhat{3, 4, 5}, y{1, 2, 3};
    CHECK(mse_gradient_variance(yhat, y) == doctest::Approx(0.0));
  }
  {
    std::vector<double> yhat{0, 1}, y{0, 0};
    CHECK(mse_gradient_variance(yhat, y) == doctest::Approx(1.0));
  }
  {
    std::vector<double> a{1, 2}, b{1};
    CHECK_THROWS_AS(mse_gradient_variance(a, b), ValidationError);
  }
}

TEST_CASE("singleton arms contribute zero variance penalty") {
  std::vector<double> yhat{4.0, -2.0};
  std::vector<double> y{0.0, 0.0};
  std::vector<uint8_t> w{1, 0};
  CompositeLossParams params;
  params.lambda = 10.0;
  // each arm's only member sits at its arm mean
  const double with_lambda = loss_value(yhat, y, w, params);
  params.lambda = 0.0;
  CHECK(with_lambda == doctest::Approx(loss_value(yhat, y, w, params)));
}
