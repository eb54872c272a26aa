#include "cbdt/stats.hpp"

#include <algorithm>
#include <cmath>

namespace cbdt {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete_beta: a and b must be > 0");
  require(x >= 0.0 && x <= 1.0, "incomplete_beta: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  require(df > 0.0, "degrees of freedom must be > 0");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(df / 2.0, 0.5, x);
}

PairedTTest paired_ttest(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "paired samples must have equal length");
  require(a.size() >= 2, "paired t-test needs at least 2 pairs");
  const int n = int(a.size());
  std::vector<double> diff(n);
  for (int i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double mean = mean_of(diff);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1));

  PairedTTest out;
  if (sd == 0.0) {
    out.degenerate = true;
    out.all_equal = mean == 0.0;
    out.t_stat = 0.0;
    out.p_value = out.all_equal ? 1.0 : 0.0;
    return out;
  }
  out.t_stat = mean / (sd / std::sqrt(double(n)));
  out.p_value = student_t_two_sided_p(out.t_stat, double(n - 1));
  return out;
}

double bonferroni_threshold(double alpha, int family_size) {
  require(family_size >= 1, "family_size must be >= 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
  return alpha / double(family_size);
}

std::vector<bool> bonferroni(std::span<const double> p_values, int family_size, double alpha) {
  const double threshold = bonferroni_threshold(alpha, family_size);
  std::vector<bool> flags(p_values.size());
  for (size_t i = 0; i < p_values.size(); ++i) flags[i] = p_values[i] < threshold;
  return flags;
}

double trimmed_mean(std::span<const double> values) {
  require(!values.empty(), "trimmed_mean of empty vector");
  if (values.size() < 3) return mean_of(values);
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s / double(v.size() - 2);
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double x : values) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(values.size() - 1));
}

MeanCi mean_ci(std::span<const double> values, double level) {
  require(!values.empty(), "mean_ci of empty vector");
  require(level > 0.0 && level < 1.0, "level must be in (0, 1)");
  MeanCi out;
  out.mean = mean_of(values);
  if (values.size() < 2) {
    out.lo = out.hi = out.mean;
    return out;
  }
  const double se = sample_std(values) / std::sqrt(double(values.size()));
  // invert the two-sided t tail by bisection on the monotone p(t)
  const double df = double(values.size() - 1);
  const double target = 1.0 - level;
  double lo = 0.0, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_two_sided_p(mid, df) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double tcrit = 0.5 * (lo + hi);
  out.lo = out.mean - tcrit * se;
  out.hi = out.mean + tcrit * se;
  return out;
}

}  // namespace cbdt
