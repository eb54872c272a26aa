#pragma once

#include <cstdint>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbdt::kernels {

// Process-wide switch for the OpenMP paths. The serial reference
// implementations stay available regardless; tests compare the two and the
// bench tool times them against each other.
void set_parallel(bool enabled);
bool parallel_enabled();
int num_threads();

// Parallel loop over [0, n). Results must not depend on iteration order;
// every parallel kernel in this project writes disjoint outputs per index.
// Nested calls fall back to serial so outer experiment loops can own the pool.
template <typename Fn>
inline void parallel_for(int n, Fn&& fn) {
#ifdef _OPENMP
  if (parallel_enabled() && !omp_in_parallel() && n > 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

template <typename Fn>
inline void serial_for(int n, Fn&& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

// Precomputed per-arm terms of the composite objective. The fill is
// elementwise, so the parallel and serial paths are bit-identical.
struct CompositeGradTerms {
  bool include_mse = true;
  double var_coef_t = 0.0;  // gradient pull toward the treated-arm mean
  double var_coef_c = 0.0;
  double h_var_t = 0.0;
  double h_var_c = 0.0;
  double global_pull = 0.0;  // shared calibration gradient, same for every sample
  double h_global = 0.0;
  double ate_pull_t = 0.0;
  double ate_pull_c = 0.0;
  double h_ate_t = 0.0;
  double h_ate_c = 0.0;
  double mean_t = 0.0;
  double mean_c = 0.0;
};

void composite_grad_fill(std::span<const double> yhat, std::span<const double> y,
                         std::span<const uint8_t> treatment, const CompositeGradTerms& terms,
                         std::span<double> g_out, std::span<double> h_out);

void composite_grad_fill_serial(std::span<const double> yhat, std::span<const double> y,
                                std::span<const uint8_t> treatment,
                                const CompositeGradTerms& terms, std::span<double> g_out,
                                std::span<double> h_out);

}  // namespace cbdt::kernels
