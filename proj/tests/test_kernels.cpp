#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cbdt/dataset.hpp"
#include "cbdt/kernels.hpp"
#include "cbdt/objective.hpp"
#include "cbdt/tree.hpp"

using namespace cbdt;

// The OpenMP paths must reproduce the serial reference bit for bit: every
// kernel writes disjoint per-index outputs and reductions happen serially.

namespace {

struct Fixture {
  CausalDataset ds;
  std::vector<double> yhat;
  GradHess gh;

  explicit Fixture(int n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = 8;
    spec.seed = 1234;
    ds = generate_synthetic(spec);
    yhat = ds.outcome;
    Rng rng(5);
    for (double& v : yhat) v = 0.8 * v + 0.2 * rng.normal();
    gh.g.resize(n);
    gh.h.resize(n);
    for (int i = 0; i < n; ++i) {
      gh.g[i] = 2.0 * (yhat[i] - ds.outcome[i]);
      gh.h[i] = 2.0;
    }
  }
};

}  // namespace

TEST_CASE("composite gradient fill: parallel equals serial bitwise") {
  const Fixture f(5000);
  CompositeLossParams params;
  params.lambda = 1.3;
  params.gamma = 0.6;
  params.alpha = 0.9;
  params.tau_ref = 1.5;

  const GroupStats s = group_stats(f.yhat, f.ds.treatment);
  kernels::CompositeGradTerms terms;
  terms.var_coef_t = 2.0 * params.lambda / s.n_t;
  terms.var_coef_c = 2.0 * params.lambda / s.n_c;
  terms.h_var_t = terms.var_coef_t;
  terms.h_var_c = terms.var_coef_c;
  terms.global_pull = 2.0 * params.gamma / f.ds.n() * (s.mean_all - mean_of(f.ds.outcome));
  terms.h_global = 2.0 * params.gamma / f.ds.n();
  terms.ate_pull_t = 2.0 * params.alpha / s.n_t * (s.ate_hat - params.tau_ref);
  terms.ate_pull_c = -2.0 * params.alpha / s.n_c * (s.ate_hat - params.tau_ref);
  terms.h_ate_t = terms.h_ate_c =
      2.0 * params.alpha / (double(s.n_t) * s.n_t) + 2.0 * params.alpha / (double(s.n_c) * s.n_c);
  terms.mean_t = s.mean_t;
  terms.mean_c = s.mean_c;

  std::vector<double> g_par(f.ds.n()), h_par(f.ds.n()), g_ser(f.ds.n()), h_ser(f.ds.n());
  kernels::composite_grad_fill(f.yhat, f.ds.outcome, f.ds.treatment, terms, g_par, h_par);
  kernels::composite_grad_fill_serial(f.yhat, f.ds.outcome, f.ds.treatment, terms, g_ser, h_ser);
  CHECK(g_par == g_ser);
  CHECK(h_par == h_ser);
}

TEST_CASE("tree fit: feature-parallel scan equals serial scan") {
  const Fixture f(3000);
  TreeParams par;
  par.max_depth = 5;
  par.mode = SplitMode::kHistogram;
  TreeParams ser = par;
  ser.parallel = false;
  const RegressionTree a = fit_tree(f.ds.features, f.gh, par);
  const RegressionTree b = fit_tree(f.ds.features, f.gh, ser);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
    CHECK(a.nodes[i].weight == b.nodes[i].weight);
    CHECK(a.nodes[i].gain == b.nodes[i].gain);
  }
}

TEST_CASE("tree fit in exact mode: parallel equals serial") {
  const Fixture f(800);
  TreeParams par;
  par.max_depth = 4;
  par.mode = SplitMode::kExact;
  TreeParams ser = par;
  ser.parallel = false;
  const RegressionTree a = fit_tree(f.ds.features, f.gh, par);
  const RegressionTree b = fit_tree(f.ds.features, f.gh, ser);
  CHECK(a.same_structure(b, 0.0));
}

TEST_CASE("batch prediction: parallel equals serial bitwise") {
  const Fixture f(4000);
  TreeParams tp;
  tp.max_depth = 6;
  const RegressionTree tree = fit_tree(f.ds.features, f.gh, tp);
  CHECK(predict_tree(tree, f.ds.features) == predict_tree_serial(tree, f.ds.features));
}

TEST_CASE("global parallel switch falls back to serial execution") {
  const Fixture f(1000);
  kernels::set_parallel(false);
  CHECK(kernels::num_threads() == 1);
  TreeParams tp;
  const RegressionTree a = fit_tree(f.ds.features, f.gh, tp);
  kernels::set_parallel(true);
  const RegressionTree b = fit_tree(f.ds.features, f.gh, tp);
  CHECK(a.same_structure(b, 0.0));
}
