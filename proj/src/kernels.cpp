#include "cbdt/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace cbdt::kernels {

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

int num_threads() {
#ifdef _OPENMP
  return parallel_enabled() ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

namespace {

template <bool kSerial>
void grad_fill(std::span<const double> yhat, std::span<const double> y,
               std::span<const uint8_t> treatment, const CompositeGradTerms& t,
               std::span<double> g_out, std::span<double> h_out) {
  const int n = int(yhat.size());
  auto body = [&](int i) {
    double g = 0.0, h = 0.0;
    if (t.include_mse) {
      g = 2.0 * (yhat[i] - y[i]);
      h = 2.0;
    }
    if (treatment[i]) {
      g += t.var_coef_t * (yhat[i] - t.mean_t) + t.global_pull + t.ate_pull_t;
      h += t.h_var_t + t.h_global + t.h_ate_t;
    } else {
      g += t.var_coef_c * (yhat[i] - t.mean_c) + t.global_pull + t.ate_pull_c;
      h += t.h_var_c + t.h_global + t.h_ate_c;
    }
    g_out[i] = g;
    h_out[i] = h;
  };
  if constexpr (kSerial)
    serial_for(n, body);
  else
    parallel_for(n, body);
}

}  // namespace

void composite_grad_fill(std::span<const double> yhat, std::span<const double> y,
                         std::span<const uint8_t> treatment, const CompositeGradTerms& terms,
                         std::span<double> g_out, std::span<double> h_out) {
  grad_fill<false>(yhat, y, treatment, terms, g_out, h_out);
}

void composite_grad_fill_serial(std::span<const double> yhat, std::span<const double> y,
                                std::span<const uint8_t> treatment,
                                const CompositeGradTerms& terms, std::span<double> g_out,
                                std::span<double> h_out) {
  grad_fill<true>(yhat, y, treatment, terms, g_out, h_out);
}

}  // namespace cbdt::kernels
