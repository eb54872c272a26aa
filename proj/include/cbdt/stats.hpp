#pragma once

#include <span>
#include <vector>

#include "cbdt/common.hpp"

namespace cbdt {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, absolute accuracy around 1e-12 on double inputs.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct PairedTTest {
  double t_stat = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero variance of differences
  bool all_equal = false;   // every difference exactly zero
};

// Two-sided paired t-test; inputs are paired by position (seed).
PairedTTest paired_ttest(std::span<const double> a, std::span<const double> b);

// flags[i] = p_values[i] < alpha / family_size
std::vector<bool> bonferroni(std::span<const double> p_values, int family_size, double alpha);
double bonferroni_threshold(double alpha, int family_size);

// Mean after dropping the single highest and lowest value (needs n >= 3;
// plain mean otherwise).
double trimmed_mean(std::span<const double> values);

double sample_std(std::span<const double> values);  // n-1 denominator

// Mean +- t-based 95%-style interval over per-seed values.
struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
MeanCi mean_ci(std::span<const double> values, double level);

}  // namespace cbdt
