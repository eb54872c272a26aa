#include "cbdt/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "cbdt/booster.hpp"

namespace cbdt {

PeheResult pehe(std::span<const double> tau_hat, std::span<const double> tau_true) {
  require(tau_hat.size() == tau_true.size(), "effect vectors must have equal length");
  require(!tau_hat.empty(), "pehe needs at least one sample");
  double s = 0.0;
  for (size_t i = 0; i < tau_hat.size(); ++i) {
    const double d = tau_hat[i] - tau_true[i];
    s += d * d;
  }
  PeheResult r;
  r.pehe_sq = s / double(tau_hat.size());
  r.pehe_sqrt = std::sqrt(r.pehe_sq);
  return r;
}

double ate_error(double tau_hat_ate, double tau_true_ate) {
  return std::abs(tau_hat_ate - tau_true_ate);
}

double eap(double pehe_value, double train_time_s, double infer_time_ms) {
  require(pehe_value >= 0.0, "PEHE must be >= 0");
  require(train_time_s > 0.0 && infer_time_ms > 0.0, "times must be > 0");
  const double product = train_time_s * infer_time_ms / 1000.0;
  if (product >= 1.0)
    throw NumericError(
        "EAP undefined: train_time_s * inference_time_ms/1000 = " + std::to_string(product) +
        " >= 1, so the log denominator is not positive");
  return pehe_value / (-std::log10(product));
}

double measure_timing(const std::function<void()>& run, int repetitions, int warmup) {
  require(warmup >= 0, "warmup must be >= 0");
  require(repetitions > warmup, "repetitions must exceed warmup count");
  double total = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r >= warmup) total += dt;
  }
  return total / double(repetitions - warmup);
}

// ============================================================================
// Bootstrap
// ============================================================================

namespace {

std::vector<int> stratified_resample(const CausalDataset& ds, Rng& rng) {
  constexpr int kMaxRetries = 100;
  std::vector<int> treated, control;
  for (int i = 0; i < ds.n(); ++i) (ds.treatment[i] ? treated : control).push_back(i);

  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::vector<int> rows;
    rows.reserve(ds.n());
    for (size_t k = 0; k < treated.size(); ++k)
      rows.push_back(treated[rng.uniform_int(int(treated.size()))]);
    for (size_t k = 0; k < control.size(); ++k)
      rows.push_back(control[rng.uniform_int(int(control.size()))]);
    // stratified draws keep both arms by construction
    if (!rows.empty()) return rows;
  }
  throw NumericError("bootstrap resampling failed to produce a usable sample");
}

}  // namespace

BootstrapCi bootstrap_ci(const AteEstimator& estimator, const CausalDataset& ds, int draws,
                         double level, uint64_t seed) {
  require(draws >= 50, "bootstrap needs at least 50 draws");
  require(level > 0.0 && level < 1.0, "level must be in (0, 1)");
  Rng rng(seed ^ 0xb00757a9c0ffee11ULL);

  std::vector<int> all(ds.n());
  for (int i = 0; i < ds.n(); ++i) all[i] = i;

  BootstrapCi out;
  out.point = estimator(all);

  std::vector<double> estimates(draws);
  for (int b = 0; b < draws; ++b) estimates[b] = estimator(stratified_resample(ds, rng));
  std::sort(estimates.begin(), estimates.end());

  const double tail = (1.0 - level) / 2.0;
  out.lo = quantile_sorted(estimates, tail);
  out.hi = quantile_sorted(estimates, 1.0 - tail);
  return out;
}

double bootstrap_coverage(const AteEstimatorFactory& factory,
                          const std::function<CausalDataset(uint64_t)>& dataset_for_seed,
                          double true_ate, int outer_seeds, int draws, double level,
                          uint64_t root_seed) {
  require(outer_seeds >= 1, "need at least one outer seed");
  int covered = 0;
  for (int s = 0; s < outer_seeds; ++s) {
    const uint64_t seed = root_seed + uint64_t(s);
    const CausalDataset ds = dataset_for_seed(seed);
    const AteEstimator estimator = factory(ds);
    const BootstrapCi ci = bootstrap_ci(estimator, ds, draws, level, seed * 977ULL + 13ULL);
    if (ci.lo <= true_ate && true_ate <= ci.hi) ++covered;
  }
  return double(covered) / double(outer_seeds);
}

AteEstimatorFactory dr_ate_estimator_factory(int nuisance_rounds, uint64_t seed) {
  return [nuisance_rounds, seed](const CausalDataset& ds) -> AteEstimator {
    // nuisances fit once per dataset; resamples re-aggregate pseudo-outcomes
    const NuisanceModels nuis = fit_nuisance(ds, nuisance_rounds, seed);
    auto psi = std::make_shared<std::vector<double>>(aipw_pseudo_outcomes(nuis, ds));
    return [psi](const std::vector<int>& rows) {
      double s = 0.0;
      for (int r : rows) s += (*psi)[r];
      return s / double(rows.size());
    };
  };
}

}  // namespace cbdt
