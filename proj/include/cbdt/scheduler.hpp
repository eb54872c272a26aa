#pragma once

#include <string>
#include <vector>

#include "cbdt/common.hpp"

namespace cbdt {

enum class ScheduleMode { kDynamic, kDecay, kStatic };

ScheduleMode schedule_mode_from_string(const std::string& s);
std::string to_string(ScheduleMode m);

struct ScheduleRecord {
  int k = 0;
  double grad_variance = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};

// Regularization-weight schedule. Dynamic mode shrinks both weights
// multiplicatively by exp(-rate * gradient variance); decay mode follows
// initial / sqrt(k); static mode leaves them untouched. All modes count
// steps and keep a per-step history (values recorded after the update).
struct SchedulerState {
  double lambda_k = 0.0;
  double alpha_k = 0.0;
  double eta = 0.1;        // lambda update rate
  double eta_prime = 0.1;  // alpha update rate
  ScheduleMode mode = ScheduleMode::kDynamic;
  int k = 0;
  double lambda0 = 0.0;
  double alpha0 = 0.0;
  bool floor_hit = false;
  std::vector<ScheduleRecord> history;

  static SchedulerState make(double lambda0, double alpha0, double eta, double eta_prime,
                             ScheduleMode mode);
  void validate() const;
};

// One schedule update driven by the current gradient variance. Weights never
// increase and never reach exact zero when started positive: a 1e-8 floor
// guards the split-gain denominators against underflow.
SchedulerState scheduler_step(SchedulerState state, double grad_variance);

// History as CSV (k, grad_variance, lambda, alpha) for training-trace plots.
void write_schedule_csv(const SchedulerState& state, const std::string& path);

}  // namespace cbdt
