#include "cbdt/objective.hpp"

#include "cbdt/kernels.hpp"

namespace cbdt {

GroupStats group_stats(std::span<const double> yhat, std::span<const uint8_t> treatment) {
  require(yhat.size() == treatment.size(), "yhat and treatment must have equal length");
  GroupStats s;
  double sum_t = 0.0, sum_c = 0.0;
  for (size_t i = 0; i < yhat.size(); ++i) {
    if (treatment[i]) {
      sum_t += yhat[i];
      ++s.n_t;
    } else {
      sum_c += yhat[i];
      ++s.n_c;
    }
  }
  require(s.n_t >= 1 && s.n_c >= 1, "both treatment arms must be non-empty");
  s.mean_t = sum_t / s.n_t;
  s.mean_c = sum_c / s.n_c;
  s.mean_all = (sum_t + sum_c) / double(s.n_t + s.n_c);
  s.ate_hat = s.mean_t - s.mean_c;
  return s;
}

double loss_value(std::span<const double> yhat, std::span<const double> y,
                  std::span<const uint8_t> treatment, const CompositeLossParams& params) {
  require(yhat.size() == y.size(), "yhat and y must have equal length");
  params.validate();
  const GroupStats s = group_stats(yhat, treatment);
  const size_t n = yhat.size();

  double mse = 0.0, var_t = 0.0, var_c = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = yhat[i] - y[i];
    mse += e * e;
    if (treatment[i]) {
      const double d = yhat[i] - s.mean_t;
      var_t += d * d;
    } else {
      const double d = yhat[i] - s.mean_c;
      var_c += d * d;
    }
  }
  const double ybar = mean_of(y);
  const double global = s.mean_all - ybar;
  const double ate_gap = s.ate_hat - params.tau_ref;
  return mse + params.lambda * (var_t / s.n_t + var_c / s.n_c) + params.gamma * global * global +
         params.alpha * ate_gap * ate_gap;
}

static GradHess grad_hess_impl(std::span<const double> yhat, std::span<const double> y,
                               std::span<const uint8_t> treatment,
                               const CompositeLossParams& params, bool include_mse) {
  require(yhat.size() == y.size(), "yhat and y must have equal length");
  params.validate();
  const GroupStats s = group_stats(yhat, treatment);
  const double ybar = mean_of(y);

  kernels::CompositeGradTerms terms;
  const size_t n = yhat.size();
  terms.include_mse = include_mse;
  terms.global_pull = 2.0 * params.gamma / double(n) * (s.mean_all - ybar);
  terms.h_global = 2.0 * params.gamma / double(n);
  const double ate_gap = s.ate_hat - params.tau_ref;
  terms.ate_pull_t = 2.0 * params.alpha / s.n_t * ate_gap;
  terms.ate_pull_c = -2.0 * params.alpha / s.n_c * ate_gap;
  terms.var_coef_t = 2.0 * params.lambda / s.n_t;
  terms.var_coef_c = 2.0 * params.lambda / s.n_c;
  terms.mean_t = s.mean_t;
  terms.mean_c = s.mean_c;
  if (params.exact_chain_gradients) {
    // Exact second derivatives of each term. The gradient corrections from
    // the arm means sum to zero, so only the curvature changes.
    terms.h_var_t = terms.var_coef_t * (1.0 - 1.0 / s.n_t);
    terms.h_var_c = terms.var_coef_c * (1.0 - 1.0 / s.n_c);
    terms.h_global = 2.0 * params.gamma / (double(n) * double(n));
    terms.h_ate_t = 2.0 * params.alpha / (double(s.n_t) * s.n_t);
    terms.h_ate_c = 2.0 * params.alpha / (double(s.n_c) * s.n_c);
  } else {
    terms.h_var_t = terms.var_coef_t;
    terms.h_var_c = terms.var_coef_c;
    const double h_ate =
        2.0 * params.alpha / (double(s.n_t) * s.n_t) + 2.0 * params.alpha / (double(s.n_c) * s.n_c);
    terms.h_ate_t = h_ate;
    terms.h_ate_c = h_ate;
  }

  GradHess gh;
  gh.g.resize(n);
  gh.h.resize(n);
  kernels::composite_grad_fill(yhat, y, treatment, terms, gh.g, gh.h);
  return gh;
}

GradHess loss_grad_hess(std::span<const double> yhat, std::span<const double> y,
                        std::span<const uint8_t> treatment, const CompositeLossParams& params) {
  return grad_hess_impl(yhat, y, treatment, params, /*include_mse=*/true);
}

GradHess regularizer_grad_hess(std::span<const double> yhat, std::span<const double> y,
                               std::span<const uint8_t> treatment,
                               const CompositeLossParams& params) {
  return grad_hess_impl(yhat, y, treatment, params, /*include_mse=*/false);
}

double mse_gradient_variance(std::span<const double> yhat, std::span<const double> y) {
  require(yhat.size() == y.size(), "yhat and y must have equal length");
  require(!yhat.empty(), "need at least one sample");
  const size_t n = yhat.size();
  double mu = 0.0;
  for (size_t i = 0; i < n; ++i) mu += 2.0 * (yhat[i] - y[i]);
  mu /= double(n);
  double v = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = 2.0 * (yhat[i] - y[i]) - mu;
    v += d * d;
  }
  return v / double(n);
}

}  // namespace cbdt
