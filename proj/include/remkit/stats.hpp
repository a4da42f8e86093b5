#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace remkit {

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct SampleSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1 denominator)
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

// Mean and standard error of the mean. Summation runs in index order, so the
// result depends only on the values, not on how they were produced.
SampleSummary summarize(std::span<const double> values);

// Largest absolute gap between the two empirical CDFs.
double ks_two_sample(std::span<const double> x, std::span<const double> y);

// Composite Simpson weights for a uniform grid of `points` nodes spanning
// `width`. An even node count closes with a Simpson 3/8 panel.
std::vector<double> simpson_weights(std::size_t points, double width);

// Numerically stable log(sum(exp(v))) over the values.
double log_sum_exp(std::span<const double> values);

}  // namespace remkit
