#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "remkit/bounds.hpp"
#include "remkit/model.hpp"
#include "remkit/rng.hpp"

namespace remkit {

// The K largest points y_1 > y_2 > ... > y_K of a Poisson point process on
// the real line with intensity e^{-y} dy. Generated exactly as
// y_k = -ln S_k with S_k = E_1 + ... + E_k, E_j i.i.d. standard exponential.
struct PppRealization {
  std::vector<double> points;    // y_k, strictly decreasing
  std::vector<double> arrivals;  // S_k, strictly increasing
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  // Fixture constructor from explicit arrival times.
  static PppRealization from_arrivals(std::vector<double> arrivals);
};

PppRealization sample_ppp(std::size_t K, std::uint64_t seed);

// Integral bound on the weight mass beyond the K-th point:
// int_{S_K}^inf s^{-1/m} ds = S_K^{1 - 1/m} / (1/m - 1).
double ppp_tail_estimate(double last_arrival, double m);

enum class TailPolicy { kReport, kThrow };

struct WeightSum {
  double partial = 0.0;  // sum_{k <= K} e^{y_k / m}
  double tail = 0.0;     // ppp_tail_estimate at S_K
  bool tail_flag = false;
  double relative_tail() const noexcept { return tail / partial; }
};

// Truncated sum of the weights e^{y/m}. The flag is raised when the tail
// estimate exceeds rel_tol times the partial sum; TailPolicy::kThrow turns
// that into a TailTooLargeError.
WeightSum weight_sum(const PppRealization& ppp, double m, double rel_tol = 1e-6,
                     TailPolicy policy = TailPolicy::kReport);

// Law of the i.i.d. marks f_alpha used with the invariance property.
class FDistribution {
 public:
  enum class Kind { kConstant, kGaussian, kUniform, kRemLogPartition };

  static FDistribution constant(double value);
  static FDistribution gaussian(double mean, double variance);
  static FDistribution uniform(double lo, double hi);
  // f = ln Z_N(beta) of an independent REM realization. Its moment
  // generating function has no closed form and is estimated by Monte Carlo
  // with moment_samples draws.
  static FDistribution rem_log_partition(int N, double beta, std::size_t moment_samples = 20000,
                                         std::uint64_t moment_seed = 0x5eed);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  double sample(CounterRng& rng) const;
  // ln E[e^{m f}].
  double log_mgf(double m) const;
  // ln c with c = (E[e^{m f}])^{1/m}.
  double log_invariance_constant(double m) const { return log_mgf(m) / m; }

 private:
  FDistribution(Kind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {}

  Kind kind_;
  double p0_;
  double p1_;
  int rem_size_ = 0;
  std::size_t moment_samples_ = 0;
  std::uint64_t moment_seed_ = 0;
};

struct InvarianceOptions {
  double rel_tol = 1e-6;
  double threshold = 0.02;
  // Realizations are extended past K, up to this many points, until the tail
  // flag clears. 0 means "exactly K points".
  std::size_t max_points = 0;
  TailPolicy tail_policy = TailPolicy::kThrow;
  // Evaluate both sides on the same point process in each trial (common
  // random numbers). The comparison stays one of marginal laws.
  bool shared_ppp = true;
};

struct InvarianceReport {
  std::string distribution;
  double m = 0.0;
  double ks = 0.0;
  double log_c = 0.0;
  double c = 0.0;
  double threshold = 0.0;
  bool tail_clear = false;
  double max_relative_tail = 0.0;
  std::size_t trials = 0;
  std::size_t min_points = 0;
  std::size_t max_points_used = 0;
  double mean_points = 0.0;
  bool pass = false;  // ks < threshold and tail_clear
};

// Two-sample KS comparison of ln sum_alpha e^{y_alpha/m} e^{f_alpha} against
// ln c + ln sum_alpha e^{y_alpha/m} over independent trials.
InvarianceReport invariance_test(double m, const FDistribution& f, std::size_t K,
                                 std::size_t trials, std::uint64_t seed,
                                 const InvarianceOptions& opts = {});

// Several mark laws against one stream of point processes.
std::vector<InvarianceReport> invariance_test(double m, std::span<const FDistribution> fs,
                                              std::size_t K, std::size_t trials,
                                              std::uint64_t seed,
                                              const InvarianceOptions& opts = {});

// Nested point processes on a tree with K_branch children per node. Level i
// stores y(alpha_1, ..., alpha_{i+1}) for every node, in lexicographic order.
class CascadeRealization {
 public:
  CascadeRealization(std::vector<double> m, std::size_t branching,
                     std::vector<std::vector<double>> level_points,
                     std::vector<std::vector<double>> level_arrivals);

  int depth() const noexcept { return static_cast<int>(m_.size()); }
  std::size_t branching() const noexcept { return branching_; }
  const std::vector<double>& m() const noexcept { return m_; }
  std::size_t leaf_count() const noexcept { return level_points_.back().size(); }
  std::span<const double> level_points(int level) const {
    return level_points_[static_cast<std::size_t>(level)];
  }
  // ln w(alpha) = sum_i y(alpha_1..alpha_i) / m_i for every leaf.
  std::vector<double> leaf_log_weights() const;
  double log_total_weight() const;
  // Largest tail/partial ratio over all child processes.
  double max_relative_tail() const;

 private:
  std::vector<double> m_;
  std::size_t branching_;
  std::vector<std::vector<double>> level_points_;
  std::vector<std::vector<double>> level_arrivals_;
};

inline constexpr std::size_t kMaxCascadeLeaves = std::size_t{1} << 26;

CascadeRealization sample_cascade(const GremParams& p, const VariationalPoint& m,
                                  std::size_t K_branch, std::uint64_t seed);

// Telescoped invariance: ln sum_alpha w(alpha) exp(sum_i f_i(alpha_1..alpha_i))
// against sum_i ln c_i + ln sum_alpha w(alpha), with c_i the invariance
// constant of level i's marks at m_i.
InvarianceReport cascade_invariance_test(const GremParams& p, const VariationalPoint& m,
                                         std::span<const FDistribution> level_marks,
                                         std::size_t K_branch, std::size_t trials,
                                         std::uint64_t seed, double threshold);

}  // namespace remkit
