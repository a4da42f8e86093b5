#include "remkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "remkit/error.hpp"

namespace remkit {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  // Centered on the first sample; constant samples come back exactly.
  const double origin = values.front();
  CompensatedSum total;
  for (double v : values) total.add(v - origin);
  s.mean = origin + total.value() / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  CompensatedSum squares;
  for (double v : values) {
    const double d = v - s.mean;
    squares.add(d * d);
  }
  s.stddev = std::sqrt(squares.value() / static_cast<double>(values.size() - 1));
  s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(values.size()));
  return s;
}

double ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ParameterError("ks_two_sample: empty sample");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<double> simpson_weights(std::size_t points, double width) {
  if (points < 2) throw ParameterError("simpson_weights: need at least 2 nodes");
  std::vector<double> w(points, 0.0);
  const std::size_t intervals = points - 1;
  const double h = width / static_cast<double>(intervals);
  if (intervals == 1) {
    w[0] = w[1] = h / 2.0;
    return w;
  }
  // Simpson 1/3 over an even number of intervals, then a 3/8 panel if one
  // interval-triple remains.
  const std::size_t simpson_intervals = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (std::size_t k = 0; k + 2 <= simpson_intervals; k += 2) {
    w[k] += h / 3.0;
    w[k + 1] += 4.0 * h / 3.0;
    w[k + 2] += h / 3.0;
  }
  if (simpson_intervals != intervals) {
    const std::size_t k = simpson_intervals;
    w[k] += 3.0 * h / 8.0;
    w[k + 1] += 9.0 * h / 8.0;
    w[k + 2] += 9.0 * h / 8.0;
    w[k + 3] += 3.0 * h / 8.0;
  }
  return w;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  CompensatedSum s;
  for (double v : values) s.add(std::exp(v - top));
  return top + std::log(s.value());
}

}  // namespace remkit
