#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cbdt/common.hpp"
#include "cbdt/objective.hpp"

namespace testutil {

// ----------------------------------------------------------------------------
// Independent best-split oracle: enumerates every (feature, midpoint between
// consecutive distinct values at the node) candidate and computes child sums
// directly from the rows. Tie-break mirrors the documented contract: highest
// gain, then lowest feature index, then lowest threshold.
// ----------------------------------------------------------------------------

struct OracleSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = -1e300;
};

inline OracleSplit brute_force_best_split(const cbdt::Matrix& x, const std::vector<double>& g,
                                          const std::vector<double>& h,
                                          const std::vector<int>& rows, double lambda,
                                          double gamma, int min_leaf) {
  OracleSplit best;
  for (int f = 0; f < x.cols(); ++f) {
    std::set<double> values;
    for (int r : rows) values.insert(x(r, f));
    std::vector<double> sorted(values.begin(), values.end());
    for (size_t k = 0; k + 1 < sorted.size(); ++k) {
      const double lo = sorted[k], hi = sorted[k + 1];
      double thr = lo + (hi - lo) * 0.5;
      if (!(thr < hi)) thr = lo;
      double gl = 0, hl = 0, gr = 0, hr = 0;
      int cl = 0, cr = 0;
      for (int r : rows) {
        if (x(r, f) <= thr) {
          gl += g[r];
          hl += h[r];
          ++cl;
        } else {
          gr += g[r];
          hr += h[r];
          ++cr;
        }
      }
      if (cl < min_leaf || cr < min_leaf) continue;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                 (gl + gr) * (gl + gr) / (hl + hr + lambda)) -
                          gamma;
      if (!best.found || gain > best.gain) {
        best = {true, f, thr, gain};
      }
    }
  }
  return best;
}

// ----------------------------------------------------------------------------
// Finite-difference gradient oracles for the composite objective
// ----------------------------------------------------------------------------

// Loss with the intra-arm variance penalty evaluated against externally fixed
// arm means; the calibration terms recompute their means from yhat. This is
// the differentiation convention the analytic gradients use.
inline double frozen_stats_loss(const std::vector<double>& yhat, const std::vector<double>& y,
                                const std::vector<uint8_t>& w,
                                const cbdt::CompositeLossParams& params, double frozen_mean_t,
                                double frozen_mean_c) {
  const size_t n = yhat.size();
  int nt = 0, nc = 0;
  double sum_t = 0, sum_c = 0, sum_all = 0, sum_y = 0, mse = 0, var_t = 0, var_c = 0;
  for (size_t i = 0; i < n; ++i) {
    const double e = yhat[i] - y[i];
    mse += e * e;
    sum_all += yhat[i];
    sum_y += y[i];
    if (w[i]) {
      ++nt;
      sum_t += yhat[i];
      const double d = yhat[i] - frozen_mean_t;
      var_t += d * d;
    } else {
      ++nc;
      sum_c += yhat[i];
      const double d = yhat[i] - frozen_mean_c;
      var_c += d * d;
    }
  }
  const double ate_hat = sum_t / nt - sum_c / nc;
  const double global = sum_all / double(n) - sum_y / double(n);
  const double gap = ate_hat - params.tau_ref;
  return mse + params.lambda * (var_t / nt + var_c / nc) + params.gamma * global * global +
         params.alpha * gap * gap;
}

inline std::vector<double> fd_gradient_frozen(const std::vector<double>& yhat,
                                              const std::vector<double>& y,
                                              const std::vector<uint8_t>& w,
                                              const cbdt::CompositeLossParams& params,
                                              const std::vector<int>& points, double step) {
  const cbdt::GroupStats s = cbdt::group_stats(yhat, w);
  std::vector<double> grad(points.size());
  for (size_t k = 0; k < points.size(); ++k) {
    std::vector<double> up = yhat, dn = yhat;
    up[points[k]] += step;
    dn[points[k]] -= step;
    grad[k] = (frozen_stats_loss(up, y, w, params, s.mean_t, s.mean_c) -
               frozen_stats_loss(dn, y, w, params, s.mean_t, s.mean_c)) /
              (2.0 * step);
  }
  return grad;
}

// Central differences straight through loss_value: every statistic recomputed.
inline std::vector<double> fd_gradient_chain(const std::vector<double>& yhat,
                                             const std::vector<double>& y,
                                             const std::vector<uint8_t>& w,
                                             const cbdt::CompositeLossParams& params,
                                             const std::vector<int>& points, double step) {
  std::vector<double> grad(points.size());
  for (size_t k = 0; k < points.size(); ++k) {
    std::vector<double> up = yhat, dn = yhat;
    up[points[k]] += step;
    dn[points[k]] -= step;
    grad[k] =
        (cbdt::loss_value(up, y, w, params) - cbdt::loss_value(dn, y, w, params)) / (2.0 * step);
  }
  return grad;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testutil
