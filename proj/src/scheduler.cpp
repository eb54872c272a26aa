#include "cbdt/scheduler.hpp"

#include <cmath>

#include "cbdt/csv.hpp"

namespace cbdt {

namespace {
constexpr double kWeightFloor = 1e-8;
}

ScheduleMode schedule_mode_from_string(const std::string& s) {
  if (s == "dynamic") return ScheduleMode::kDynamic;
  if (s == "decay") return ScheduleMode::kDecay;
  if (s == "static") return ScheduleMode::kStatic;
  throw ValidationError("unknown scheduler mode '" + s + "' (expected dynamic|decay|static)");
}

std::string to_string(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::kDynamic: return "dynamic";
    case ScheduleMode::kDecay: return "decay";
    case ScheduleMode::kStatic: return "static";
  }
  return "dynamic";
}

SchedulerState SchedulerState::make(double lambda0, double alpha0, double eta, double eta_prime,
                                    ScheduleMode mode) {
  SchedulerState s;
  s.lambda_k = lambda0;
  s.alpha_k = alpha0;
  s.lambda0 = lambda0;
  s.alpha0 = alpha0;
  s.eta = eta;
  s.eta_prime = eta_prime;
  s.mode = mode;
  s.validate();
  return s;
}

void SchedulerState::validate() const {
  require(std::isfinite(lambda_k) && lambda_k >= 0.0, "lambda must be finite and >= 0");
  require(std::isfinite(alpha_k) && alpha_k >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(eta) && eta >= 0.0, "eta must be finite and >= 0");
  require(std::isfinite(eta_prime) && eta_prime >= 0.0, "eta_prime must be finite and >= 0");
  require(int(history.size()) == k, "history length must equal step count");
}

static double apply_floor(double value, double initial, bool* hit) {
  if (initial > 0.0 && value < kWeightFloor) {
    *hit = true;
    return kWeightFloor;
  }
  return value;
}

SchedulerState scheduler_step(SchedulerState state, double grad_variance) {
  if (!std::isfinite(grad_variance))
    throw NumericError("scheduler received non-finite gradient variance");
  require(grad_variance >= 0.0, "gradient variance must be >= 0");

  state.k += 1;
  switch (state.mode) {
    case ScheduleMode::kDynamic:
      state.lambda_k *= std::exp(-state.eta * grad_variance);
      state.alpha_k *= std::exp(-state.eta_prime * grad_variance);
      break;
    case ScheduleMode::kDecay: {
      const double root = std::sqrt(double(state.k));
      state.lambda_k = state.lambda0 / root;
      state.alpha_k = state.alpha0 / root;
      break;
    }
    case ScheduleMode::kStatic:
      break;
  }
  state.lambda_k = apply_floor(state.lambda_k, state.lambda0, &state.floor_hit);
  state.alpha_k = apply_floor(state.alpha_k, state.alpha0, &state.floor_hit);
  state.history.push_back({state.k, grad_variance, state.lambda_k, state.alpha_k});
  return state;
}

void write_schedule_csv(const SchedulerState& state, const std::string& path) {
  CsvTable t;
  t.columns = {"k", "grad_variance", "lambda", "alpha"};
  for (const auto& r : state.history)
    t.rows.push_back({double(r.k), r.grad_variance, r.lambda, r.alpha});
  write_csv(path, t);
}

}  // namespace cbdt
