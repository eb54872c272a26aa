// Timing comparison between the serial reference kernels and the OpenMP
// paths: gradient fill, batch tree prediction, split search, and an
// end-to-end booster fit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cbdt/booster.hpp"
#include "cbdt/dataset.hpp"
#include "cbdt/kernels.hpp"
#include "cbdt/objective.hpp"
#include "cbdt/tree.hpp"

using namespace cbdt;

namespace {

double time_best_of(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s serial %9.4f ms   parallel %9.4f ms   speedup %.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 200000;
  int d = 20;
  int reps = 5;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--n") n = std::atoi(argv[i + 1]);
    if (flag == "--d") d = std::atoi(argv[i + 1]);
    if (flag == "--reps") reps = std::atoi(argv[i + 1]);
  }
  std::printf("n=%d d=%d threads=%d\n\n", n, d, kernels::num_threads());

  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.seed = 7;
  const CausalDataset ds = generate_synthetic(spec);

  // gradient fill ------------------------------------------------------------
  CompositeLossParams params;
  params.lambda = 1.0;
  params.gamma = 0.5;
  params.alpha = 1.0;
  params.tau_ref = 2.0;
  std::vector<double> yhat(ds.outcome);
  for (double& v : yhat) v *= 0.9;
  {
    kernels::CompositeGradTerms terms;
    const GroupStats gs = group_stats(yhat, ds.treatment);
    terms.var_coef_t = 2.0 * params.lambda / gs.n_t;
    terms.var_coef_c = 2.0 * params.lambda / gs.n_c;
    terms.h_var_t = terms.var_coef_t;
    terms.h_var_c = terms.var_coef_c;
    terms.mean_t = gs.mean_t;
    terms.mean_c = gs.mean_c;
    std::vector<double> g(n), h(n);
    const double ser = time_best_of(
        [&] { kernels::composite_grad_fill_serial(yhat, ds.outcome, ds.treatment, terms, g, h); },
        reps);
    const double par = time_best_of(
        [&] { kernels::composite_grad_fill(yhat, ds.outcome, ds.treatment, terms, g, h); }, reps);
    report("composite gradient fill", ser, par);
  }

  // tree fit (feature-parallel split search) ---------------------------------
  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);
  for (int i = 0; i < n; ++i) {
    gh.g[i] = 2.0 * (yhat[i] - ds.outcome[i]);
    gh.h[i] = 2.0;
  }
  TreeParams tp;
  tp.max_depth = 6;
  tp.mode = SplitMode::kHistogram;
  RegressionTree tree;
  {
    TreeParams serial_tp = tp;
    serial_tp.parallel = false;
    const double ser = time_best_of([&] { tree = fit_tree(ds.features, gh, serial_tp); }, reps);
    const double par = time_best_of([&] { tree = fit_tree(ds.features, gh, tp); }, reps);
    report("tree fit (histogram)", ser, par);
  }

  // batch prediction ----------------------------------------------------------
  {
    std::vector<double> out;
    const double ser = time_best_of([&] { out = predict_tree_serial(tree, ds.features); }, reps);
    const double par = time_best_of([&] { out = predict_tree(tree, ds.features); }, reps);
    report("batch tree prediction", ser, par);
  }

  // end-to-end fit -------------------------------------------------------------
  {
    SyntheticSpec small = spec;
    small.n = std::min(n, 20000);
    const CausalDataset sds = generate_synthetic(small);
    BoosterConfig bc;
    bc.num_rounds = 40;
    bc.loss.lambda = 1.0;
    bc.loss.alpha = 1.0;
    bc.loss.gamma = 0.5;
    bc.tau_ref_source = TauRefSource::kGroundTruth;
    const double ser = time_best_of(
        [&] {
          kernels::set_parallel(false);
          fit(bc, sds);
          kernels::set_parallel(true);
        },
        std::max(2, reps / 2));
    const double par = time_best_of([&] { fit(bc, sds); }, std::max(2, reps / 2));
    report("booster fit (n=20k, K=40)", ser, par);
  }
  return 0;
}
