#include "remkit/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "remkit/error.hpp"
#include "remkit/exact.hpp"
#include "remkit/parallel.hpp"
#include "remkit/stats.hpp"

namespace remkit {

namespace {

void check_m_open(double m, const char* where) {
  if (!(m > 0.0 && m < 1.0)) throw ParameterError(std::string(where) + ": m must be in (0, 1)");
}

// ln of sum exp(v) over a contiguous range.
double lse_range(const std::vector<double>& v, std::size_t first, std::size_t count) {
  return log_sum_exp(std::span<const double>(v.data() + first, count));
}

constexpr std::size_t kTailCheckStride = 1024;

struct StreamSums {
  double log_rhs = 0.0;               // ln sum e^{y/m}
  std::vector<double> log_lhs;        // ln sum e^{y/m} e^{f_j}
  std::size_t points = 0;
  double relative_tail = 0.0;
};

// Streams one realization of the process, extending past K (up to
// max_points) until the tail estimate falls to rel_tol of the partial sum.
// Sums are carried relative to the leading weight.
StreamSums stream_realization(CounterRng& ppp_rng, std::vector<CounterRng>& f_rngs,
                              std::span<const FDistribution> fs, double m, std::size_t K,
                              std::size_t max_points, double rel_tol) {
  const double inv_m = 1.0 / m;
  double s = ppp_rng.exponential();
  const double log_s1 = std::log(s);
  double rhs = 1.0;
  std::vector<double> lhs(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) lhs[j] = std::exp(fs[j].sample(f_rngs[j]));

  auto relative_tail = [&] {
    const double scaled_tail = std::exp((1.0 - inv_m) * std::log(s) + inv_m * log_s1) / (inv_m - 1.0);
    return scaled_tail / rhs;
  };

  std::size_t k = 1;
  double rel = 0.0;
  for (;;) {
    if (k >= K && (k == K || (k - K) % kTailCheckStride == 0 || k == max_points)) {
      rel = relative_tail();
      if (rel <= rel_tol || k >= max_points) break;
    }
    s += ppp_rng.exponential();
    const double ratio = std::exp(-inv_m * (std::log(s) - log_s1));
    rhs += ratio;
    for (std::size_t j = 0; j < fs.size(); ++j) {
      lhs[j] += ratio * std::exp(fs[j].sample(f_rngs[j]));
    }
    ++k;
  }

  StreamSums out;
  const double log_w1 = -inv_m * log_s1;
  out.log_rhs = log_w1 + std::log(rhs);
  out.log_lhs.resize(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) out.log_lhs[j] = log_w1 + std::log(lhs[j]);
  out.points = k;
  out.relative_tail = rel;
  return out;
}

}  // namespace

PppRealization PppRealization::from_arrivals(std::vector<double> arrivals) {
  PppRealization r;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    if (!(arrivals[k] > 0.0) || (k > 0 && !(arrivals[k] > arrivals[k - 1]))) {
      throw ParameterError("PppRealization: arrivals must be positive and strictly increasing");
    }
  }
  r.points.resize(arrivals.size());
  for (std::size_t k = 0; k < arrivals.size(); ++k) r.points[k] = -std::log(arrivals[k]);
  r.arrivals = std::move(arrivals);
  return r;
}

PppRealization sample_ppp(std::size_t K, std::uint64_t seed) {
  if (K < 1) throw ParameterError("sample_ppp: K must be >= 1");
  CounterRng rng(seed);
  std::vector<double> arrivals(K);
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    s += rng.exponential();
    arrivals[k] = s;
  }
  auto r = PppRealization::from_arrivals(std::move(arrivals));
  r.seed = seed;
  return r;
}

double ppp_tail_estimate(double last_arrival, double m) {
  check_m_open(m, "ppp_tail_estimate");
  const double inv_m = 1.0 / m;
  return std::pow(last_arrival, 1.0 - inv_m) / (inv_m - 1.0);
}

WeightSum weight_sum(const PppRealization& ppp, double m, double rel_tol, TailPolicy policy) {
  check_m_open(m, "weight_sum");
  if (ppp.arrivals.empty()) throw ParameterError("weight_sum: empty realization");
  CompensatedSum total;
  for (double y : ppp.points) total.add(std::exp(y / m));
  WeightSum w;
  w.partial = total.value();
  w.tail = ppp_tail_estimate(ppp.arrivals.back(), m);
  w.tail_flag = w.tail > rel_tol * w.partial;
  if (w.tail_flag && policy == TailPolicy::kThrow) {
    std::ostringstream msg;
    msg << "weight_sum: tail estimate " << w.tail << " exceeds " << rel_tol
        << " of the partial sum " << w.partial << " with K = " << ppp.size() << ", m = " << m;
    throw TailTooLargeError(msg.str());
  }
  return w;
}

FDistribution FDistribution::constant(double value) {
  return FDistribution(Kind::kConstant, value, 0.0);
}

FDistribution FDistribution::gaussian(double mean, double variance) {
  if (!(variance >= 0.0)) throw ParameterError("gaussian: variance must be >= 0");
  return FDistribution(Kind::kGaussian, mean, variance);
}

FDistribution FDistribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("uniform: need lo < hi");
  return FDistribution(Kind::kUniform, lo, hi);
}

FDistribution FDistribution::rem_log_partition(int N, double beta, std::size_t moment_samples,
                                               std::uint64_t moment_seed) {
  if (N < 1 || N > kFlatEnergyCacheBits) throw ParameterError("rem_log_partition: N out of range");
  if (!(beta >= 0.0)) throw ParameterError("rem_log_partition: beta must be >= 0");
  if (moment_samples < 1) throw ParameterError("rem_log_partition: need moment samples");
  FDistribution d(Kind::kRemLogPartition, beta, 0.0);
  d.rem_size_ = N;
  d.moment_samples_ = moment_samples;
  d.moment_seed_ = moment_seed;
  return d;
}

std::string FDistribution::name() const {
  std::ostringstream s;
  switch (kind_) {
    case Kind::kConstant: s << "constant(" << p0_ << ")"; break;
    case Kind::kGaussian: s << "gaussian(" << p0_ << "," << p1_ << ")"; break;
    case Kind::kUniform: s << "uniform(" << p0_ << "," << p1_ << ")"; break;
    case Kind::kRemLogPartition: s << "rem_log_z(N=" << rem_size_ << ",beta=" << p0_ << ")"; break;
  }
  return s.str();
}

double FDistribution::sample(CounterRng& rng) const {
  switch (kind_) {
    case Kind::kConstant: return p0_;
    case Kind::kGaussian: return p0_ + std::sqrt(p1_) * rng.normal();
    case Kind::kUniform: return rng.uniform(p0_, p1_);
    case Kind::kRemLogPartition: {
      const DisorderSample d(GremParams::rem(rem_size_), rng.next_u64());
      return log_partition(d, p0_);
    }
  }
  return 0.0;
}

double FDistribution::log_mgf(double m) const {
  switch (kind_) {
    case Kind::kConstant: return m * p0_;
    case Kind::kGaussian: return m * p0_ + 0.5 * m * m * p1_;
    case Kind::kUniform: {
      const double x = m * (p1_ - p0_);
      if (std::abs(x) < 1e-12) return m * p0_;
      // ln[(e^{m hi} - e^{m lo}) / (m (hi - lo))]
      return m * p0_ + std::log(std::expm1(x) / x);
    }
    case Kind::kRemLogPartition: {
      const GremParams rem = GremParams::rem(rem_size_);
      std::vector<double> scaled(moment_samples_);
      parallel_for(moment_samples_, [&](std::size_t i) {
        const DisorderSample d(rem, derive_seed(moment_seed_, i));
        scaled[i] = m * log_partition(d, p0_);
      });
      return log_sum_exp(scaled) - std::log(static_cast<double>(moment_samples_));
    }
  }
  return 0.0;
}

std::vector<InvarianceReport> invariance_test(double m, std::span<const FDistribution> fs,
                                              std::size_t K, std::size_t trials,
                                              std::uint64_t seed, const InvarianceOptions& opts) {
  check_m_open(m, "invariance_test");
  if (trials < 1000) throw ParameterError("invariance_test: need at least 1000 trials");
  if (K < 1) throw ParameterError("invariance_test: K must be >= 1");
  if (fs.empty()) throw ParameterError("invariance_test: no mark distributions");
  const std::size_t max_points = std::max(K, opts.max_points);
  const std::size_t nf = fs.size();

  std::vector<double> log_c(nf);
  for (std::size_t j = 0; j < nf; ++j) log_c[j] = fs[j].log_invariance_constant(m);

  std::vector<double> lhs(trials * nf), rhs(trials * nf);
  std::vector<std::size_t> points(trials);
  std::vector<double> rel_tail(trials);

  parallel_for(trials, [&](std::size_t t) {
    const std::uint64_t base = derive_seed(seed, t);
    CounterRng ppp_rng(base, 0);
    std::vector<CounterRng> f_rngs;
    for (std::size_t j = 0; j < nf; ++j) f_rngs.emplace_back(base, 2 + j);
    const auto a = stream_realization(ppp_rng, f_rngs, fs, m, K, max_points, opts.rel_tol);
    double log_rhs = a.log_rhs;
    std::size_t used = a.points;
    double rel = a.relative_tail;
    if (!opts.shared_ppp) {
      CounterRng other(base, 1);
      std::vector<CounterRng> none;
      const auto b = stream_realization(other, none, {}, m, K, max_points, opts.rel_tol);
      log_rhs = b.log_rhs;
      used = std::max(used, b.points);
      rel = std::max(rel, b.relative_tail);
    }
    for (std::size_t j = 0; j < nf; ++j) {
      lhs[j * trials + t] = a.log_lhs[j];
      rhs[j * trials + t] = log_c[j] + log_rhs;
    }
    points[t] = used;
    rel_tail[t] = rel;
  });

  const double worst_tail = *std::max_element(rel_tail.begin(), rel_tail.end());
  const bool tail_clear = worst_tail <= opts.rel_tol;
  if (!tail_clear && opts.tail_policy == TailPolicy::kThrow) {
    std::ostringstream msg;
    msg << "invariance_test: tail estimate reached " << worst_tail
        << " of the partial sum (rel_tol " << opts.rel_tol << ") with at most " << max_points
        << " points, m = " << m;
    throw TailTooLargeError(msg.str());
  }

  CompensatedSum point_total;
  for (std::size_t v : points) point_total.add(static_cast<double>(v));

  std::vector<InvarianceReport> out;
  for (std::size_t j = 0; j < nf; ++j) {
    InvarianceReport r;
    r.distribution = fs[j].name();
    r.m = m;
    r.ks = ks_two_sample(std::span<const double>(lhs.data() + j * trials, trials),
                         std::span<const double>(rhs.data() + j * trials, trials));
    r.log_c = log_c[j];
    r.c = std::exp(log_c[j]);
    r.threshold = opts.threshold;
    r.tail_clear = tail_clear;
    r.max_relative_tail = worst_tail;
    r.trials = trials;
    r.min_points = *std::min_element(points.begin(), points.end());
    r.max_points_used = *std::max_element(points.begin(), points.end());
    r.mean_points = point_total.value() / static_cast<double>(trials);
    r.pass = r.ks < opts.threshold && tail_clear;
    out.push_back(std::move(r));
  }
  return out;
}

InvarianceReport invariance_test(double m, const FDistribution& f, std::size_t K,
                                 std::size_t trials, std::uint64_t seed,
                                 const InvarianceOptions& opts) {
  return invariance_test(m, std::span<const FDistribution>(&f, 1), K, trials, seed, opts)[0];
}

CascadeRealization::CascadeRealization(std::vector<double> m, std::size_t branching,
                                       std::vector<std::vector<double>> level_points,
                                       std::vector<std::vector<double>> level_arrivals)
    : m_(std::move(m)),
      branching_(branching),
      level_points_(std::move(level_points)),
      level_arrivals_(std::move(level_arrivals)) {}

std::vector<double> CascadeRealization::leaf_log_weights() const {
  std::vector<double> acc = {0.0};
  for (std::size_t i = 0; i < m_.size(); ++i) {
    std::vector<double> next(acc.size() * branching_);
    for (std::size_t q = 0; q < acc.size(); ++q) {
      for (std::size_t c = 0; c < branching_; ++c) {
        const std::size_t node = q * branching_ + c;
        next[node] = acc[q] + level_points_[i][node] / m_[i];
      }
    }
    acc = std::move(next);
  }
  return acc;
}

double CascadeRealization::log_total_weight() const { return log_sum_exp(leaf_log_weights()); }

double CascadeRealization::max_relative_tail() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const auto& y = level_points_[i];
    const auto& s = level_arrivals_[i];
    for (std::size_t first = 0; first < y.size(); first += branching_) {
      CompensatedSum partial;
      for (std::size_t c = 0; c < branching_; ++c) partial.add(std::exp(y[first + c] / m_[i]));
      const double tail = ppp_tail_estimate(s[first + branching_ - 1], m_[i]);
      worst = std::max(worst, tail / partial.value());
    }
  }
  return worst;
}

CascadeRealization sample_cascade(const GremParams& p, const VariationalPoint& m,
                                  std::size_t K_branch, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(p.levels());
  if (m.size() != n) throw ParameterError("sample_cascade: m has the wrong number of levels");
  if (!(m[n - 1] < 1.0)) throw ParameterError("sample_cascade: need m_n < 1");
  if (K_branch < 1) throw ParameterError("sample_cascade: K_branch must be >= 1");
  double leaves = 1.0;
  for (std::size_t i = 0; i < n; ++i) leaves *= static_cast<double>(K_branch);
  if (leaves > static_cast<double>(kMaxCascadeLeaves)) {
    throw CapacityError("sample_cascade: K_branch^n exceeds the leaf cap");
  }
  std::vector<std::vector<double>> points(n), arrivals(n);
  std::size_t parents = 1;
  for (std::size_t i = 0; i < n; ++i) {
    points[i].resize(parents * K_branch);
    arrivals[i].resize(parents * K_branch);
    const std::uint64_t level_seed = derive_seed(seed, i + 1);
    for (std::size_t q = 0; q < parents; ++q) {
      const auto child = sample_ppp(K_branch, derive_seed(level_seed, q));
      std::copy(child.points.begin(), child.points.end(),
                points[i].begin() + static_cast<std::ptrdiff_t>(q * K_branch));
      std::copy(child.arrivals.begin(), child.arrivals.end(),
                arrivals[i].begin() + static_cast<std::ptrdiff_t>(q * K_branch));
    }
    parents *= K_branch;
  }
  return CascadeRealization(m.values(), K_branch, std::move(points), std::move(arrivals));
}

InvarianceReport cascade_invariance_test(const GremParams& p, const VariationalPoint& m,
                                         std::span<const FDistribution> level_marks,
                                         std::size_t K_branch, std::size_t trials,
                                         std::uint64_t seed, double threshold) {
  const std::size_t n = static_cast<std::size_t>(p.levels());
  if (level_marks.size() != n) {
    throw ParameterError("cascade_invariance_test: need one mark law per level");
  }
  if (trials < 1000) throw ParameterError("cascade_invariance_test: need at least 1000 trials");
  double log_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) log_c += level_marks[i].log_invariance_constant(m[i]);

  std::vector<double> lhs(trials), rhs(trials), tails(trials);
  parallel_for(trials, [&](std::size_t t) {
    const std::uint64_t base = derive_seed(seed, t);
    const auto cascade = sample_cascade(p, m, K_branch, derive_seed(base, 0));
    CounterRng f_rng(base, 1);
    // Bottom-up: a node's value is y/m_i + f_i plus the log mass below it.
    std::vector<double> marked, plain;
    for (std::size_t level = n; level-- > 0;) {
      const auto y = cascade.level_points(static_cast<int>(level));
      std::vector<double> next_marked(y.size()), next_plain(y.size());
      for (std::size_t node = 0; node < y.size(); ++node) {
        const double base_value = y[node] / m[level];
        next_marked[node] = base_value + level_marks[level].sample(f_rng);
        next_plain[node] = base_value;
        if (!marked.empty()) {
          next_marked[node] += lse_range(marked, node * K_branch, K_branch);
          next_plain[node] += lse_range(plain, node * K_branch, K_branch);
        }
      }
      marked = std::move(next_marked);
      plain = std::move(next_plain);
    }
    lhs[t] = log_sum_exp(marked);
    rhs[t] = log_c + log_sum_exp(plain);
    tails[t] = cascade.max_relative_tail();
  });

  InvarianceReport r;
  r.distribution = "cascade";
  for (std::size_t i = 0; i < n; ++i) r.distribution += ":" + level_marks[i].name();
  r.m = m[0];
  r.ks = ks_two_sample(lhs, rhs);
  r.log_c = log_c;
  r.c = std::exp(log_c);
  r.threshold = threshold;
  r.max_relative_tail = *std::max_element(tails.begin(), tails.end());
  r.tail_clear = true;  // per-node truncation is reported, not enforced
  r.trials = trials;
  r.min_points = r.max_points_used = K_branch;
  r.mean_points = static_cast<double>(K_branch);
  r.pass = r.ks < threshold;
  return r;
}

}  // namespace remkit
