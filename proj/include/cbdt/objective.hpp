#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbdt/common.hpp"

namespace cbdt {

// First/second-order gradients of a twice-differentiable objective, per sample.
struct GradHess {
  std::vector<double> g;
  std::vector<double> h;

  size_t size() const { return g.size(); }
};

// Weights of the composite training objective:
//   sum_i (yhat_i - y_i)^2                                      squared error
//   + lambda * [ mean over treated of (yhat_i - mean_t)^2
//              + mean over control of (yhat_i - mean_c)^2 ]     intra-arm variance
//   + gamma  * (mean(yhat) - mean(y))^2                         global calibration
//   + alpha  * (ate_hat - tau_ref)^2                            ATE calibration
// The squared-error term is an unnormalized sum while the remaining terms are
// normalized, so the effective weight of the regularizers shrinks as n grows.
struct CompositeLossParams {
  double lambda = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double tau_ref = 0.0;
  // When set, gradients/Hessians carry the full chain-rule dependence of the
  // arm means on each prediction instead of treating them as constants. The
  // gradient corrections cancel algebraically (deviations from a mean sum to
  // zero); the Hessians genuinely change.
  bool exact_chain_gradients = false;

  void validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
    require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be finite and >= 0");
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
    require(std::isfinite(tau_ref), "tau_ref must be finite");
  }
};

// Arm-wise prediction means and the implied ATE estimate.
struct GroupStats {
  double mean_t = 0.0;
  double mean_c = 0.0;
  double mean_all = 0.0;
  int n_t = 0;
  int n_c = 0;
  double ate_hat = 0.0;  // mean_t - mean_c
};

GroupStats group_stats(std::span<const double> yhat, std::span<const uint8_t> treatment);

double loss_value(std::span<const double> yhat, std::span<const double> y,
                  std::span<const uint8_t> treatment, const CompositeLossParams& params);

// Per-sample gradients/Hessians of the composite loss. Arm means enter the
// expressions as constants except where the term itself differentiates them
// (global and ATE terms keep their 1/n chain factors).
GradHess loss_grad_hess(std::span<const double> yhat, std::span<const double> y,
                        std::span<const uint8_t> treatment, const CompositeLossParams& params);

// Gradients/Hessians of the three regularization terms only (no squared-error
// part). Used by the booster to combine residual-based fitting targets with
// the regularizer geometry, and for the per-sample descent pass.
GradHess regularizer_grad_hess(std::span<const double> yhat, std::span<const double> y,
                               std::span<const uint8_t> treatment,
                               const CompositeLossParams& params);

// Population variance of the squared-error gradients 2*(yhat_i - y_i).
double mse_gradient_variance(std::span<const double> yhat, std::span<const double> y);

}  // namespace cbdt
