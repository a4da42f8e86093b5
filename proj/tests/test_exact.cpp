#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "remkit/bounds.hpp"
#include "remkit/error.hpp"
#include "remkit/exact.hpp"
#include "remkit/parallel.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"

using namespace remkit;

namespace {

// Direct summation oracle, independent of the blocked log-sum-exp path.
double brute_log_partition(const DisorderSample& d, double beta) {
  long double z = 0.0L;
  for (std::uint64_t s = 0; s < d.params().state_count(); ++s) {
    z += std::exp(-static_cast<long double>(beta) * d.energy(SpinConfig{s}));
  }
  return static_cast<double>(std::log(z));
}

double brute_overlap(const DisorderSample& d, double beta) {
  const std::uint64_t n = d.params().state_count();
  long double num = 0.0L, den = 0.0L;
  for (std::uint64_t s = 0; s < n; ++s) {
    for (std::uint64_t t = 0; t < n; ++t) {
      const long double w = std::exp(-static_cast<long double>(beta) *
                                     (d.energy(SpinConfig{s}) + d.energy(SpinConfig{t})));
      den += w;
      if (s == t) num += w;
    }
  }
  return static_cast<double>(num / den);
}

}  // namespace

TEST_CASE("log_partition closed cases") {
  const auto rem = GremParams::rem(1);
  const DisorderSample d(rem, {{0.3, -1.1}});
  const double e1 = d.energy(SpinConfig{0}), e2 = d.energy(SpinConfig{1});
  for (double beta : {0.0, 0.5, 2.0, 7.0}) {
    CHECK(log_partition(d, beta) ==
          doctest::Approx(std::log(std::exp(-beta * e1) + std::exp(-beta * e2))));
  }
  const auto p = GremParams::rem(12);
  CHECK(log_partition(sample_disorder(p, 3), 0.0) == 12 * std::numbers::ln2);

  const DisorderSample flat(GremParams::rem(4), {std::vector<double>(16, 0.25)});
  const double e0 = flat.energy(SpinConfig{0});
  CHECK(log_partition(flat, 1.7) == doctest::Approx(4 * std::numbers::ln2 - 1.7 * e0));
  CHECK_THROWS_AS(log_partition(flat, -1.0), ParameterError);
}

TEST_CASE("log_partition agrees with direct summation") {
  for (const auto& p : {GremParams::rem(9), GremParams::from_blocks({0.6, 0.4}, {4, 5}),
                        GremParams::from_blocks({0.2, 0.5, 0.3}, {2, 3, 4})}) {
    for (std::uint64_t seed : {1U, 2U, 3U}) {
      const auto d = sample_disorder(p, seed);
      for (double beta : {0.3, 1.0, 2.5, 6.0}) {
        CHECK(log_partition(d, beta) == doctest::Approx(brute_log_partition(d, beta)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("streamed and cached paths agree") {
  // N = 21 streams its last level; compare against the level formula.
  const auto p = GremParams::from_blocks({0.5, 0.5}, {10, 11});
  const auto d = sample_disorder(p, 17);
  const double betas[] = {0.0, 0.8, 1.9};
  const auto lz = log_partition(d, std::span<const double>(betas));
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(lz[b] == doctest::Approx(brute_log_partition(d, betas[b])).epsilon(1e-11));
  }
}

TEST_CASE("overlap ratio identity") {
  // N = 1: (x^2 + y^2) / (x + y)^2 with x = e^{-beta e1}, y = e^{-beta e2}.
  const DisorderSample d1(GremParams::rem(1), {{0.4, -0.9}});
  const double beta = 1.3;
  const double x = std::exp(-beta * d1.energy(SpinConfig{0}));
  const double y = std::exp(-beta * d1.energy(SpinConfig{1}));
  CHECK(overlap_ratio(d1, beta) == doctest::Approx((x * x + y * y) / ((x + y) * (x + y))));

  for (int N : {4, 6, 8}) {
    const auto d = sample_disorder(GremParams::rem(N), 100 + N);
    for (double b : {0.0, 0.7, 1.6, 3.0}) {
      const double ratio = overlap_ratio(d, b);
      CHECK(ratio == doctest::Approx(brute_overlap(d, b)).epsilon(1e-10));
      CHECK(ratio > 0.0);
      CHECK(ratio <= 1.0);
    }
    CHECK(overlap_ratio(d, 0.0) == doctest::Approx(std::ldexp(1.0, -N)).epsilon(1e-12));
  }
}

TEST_CASE("quenched pressure at zero temperature is ln 2 exactly") {
  const auto est = quenched_pressure(GremParams::rem(10), 0.0, 20, 5);
  CHECK(est.mean == std::numbers::ln2);
  CHECK(est.std_error == 0.0);
  CHECK(est.replicas == 20);
  CHECK_THROWS_AS(quenched_pressure(GremParams::rem(10), 0.5, 1, 5), ParameterError);
}

TEST_CASE("quenched pressure is deterministic and sweeps share disorder") {
  const auto p = GremParams::rem(10);
  const auto a = quenched_pressure(p, 1.2, 30, 77);
  const auto b = quenched_pressure(p, 1.2, 30, 77);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  const double betas[] = {0.4, 1.2};
  const auto sweep = quenched_pressure_sweep(p, std::span<const double>(betas), 30, 77);
  CHECK(sweep[1].mean == a.mean);
}

TEST_CASE("thread count does not change results") {
  const auto p = GremParams::from_blocks({0.6, 0.4}, {5, 5});
  const int saved = thread_count();
  set_thread_count(1);
  const auto one = quenched_pressure(p, 1.5, 40, 3);
  set_thread_count(4);
  const auto four = quenched_pressure(p, 1.5, 40, 3);
  set_thread_count(saved);
  CHECK(one.mean == four.mean);
  CHECK(one.std_error == four.std_error);
}

TEST_CASE("REM pressure lies below the bound and near it at N = 20") {
  const auto est = quenched_pressure(GremParams::rem(20), 1.0, 200, 11);
  const double q = q_rem(1.0);
  CHECK(q == doctest::Approx(0.25 + std::numbers::ln2));
  CHECK(est.mean <= q + 4 * est.std_error);
  CHECK(est.mean >= q - 0.08);
}

TEST_CASE("quenched pressure is monotone, convex and below the annealed value") {
  const auto p = GremParams::rem(12);
  std::vector<double> betas;
  for (int k = 0; k <= 16; ++k) betas.push_back(0.25 * k);
  const auto sweep = quenched_pressure_sweep(p, betas, 100, 8);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    CHECK(sweep[k].mean <= annealed_pressure_rem(betas[k]) + 4 * sweep[k].std_error);
    if (k > 0) CHECK(sweep[k].mean >= sweep[k - 1].mean - 4 * sweep[k].std_error);
    if (k > 0 && k + 1 < sweep.size()) {
      const double second = sweep[k + 1].mean - 2 * sweep[k].mean + sweep[k - 1].mean;
      CHECK(second >= -4 * sweep[k].std_error);
    }
  }
}

TEST_CASE("annealed pressure") {
  CHECK(annealed_pressure_rem(0.0) == std::numbers::ln2);
  CHECK(annealed_pressure_rem(beta_c()) == doctest::Approx(2 * std::numbers::ln2));
  // (1/N) ln E[Z] by Monte Carlo on E[Z], N = 10, 10^5 replicas.
  const int N = 10;
  const double beta = 0.8;
  const std::size_t R = 100000;
  const auto table = replica_log_partitions(GremParams::rem(N), std::vector<double>{beta}, R, 4);
  std::vector<double> z(R);
  for (std::size_t r = 0; r < R; ++r) z[r] = std::exp(table.at(r, 0));
  const auto s = summarize(z);
  const double expect = std::exp(N * annealed_pressure_rem(beta));
  CHECK(std::abs(s.mean - expect) <= 3 * s.stderr_mean);
}

TEST_CASE("overlap expectation and pressure derivative") {
  const auto p = GremParams::rem(8);
  const auto o0 = overlap_expectation(p, 0.0, 10, 1);
  CHECK(o0.mean == doctest::Approx(std::ldexp(1.0, -8)).epsilon(1e-12));
  const auto d0 = pressure_derivative(p, 0.0, 10, 1);
  CHECK(d0.value == 0.0);
  for (double beta : {0.5, 1.0, 2.0, 4.0}) {
    const auto o = overlap_expectation(p, beta, 50, 2);
    CHECK(o.mean > 0.0);
    CHECK(o.mean <= 1.0);
    CHECK(pressure_derivative(p, beta, 50, 2).value >= 0.0);
  }
  CHECK_THROWS_AS(pressure_derivative(GremParams::from_blocks({0.5, 0.5}, {2, 2}), 1.0, 5, 1),
                  ParameterError);
}

TEST_CASE("derivative matches finite differences on shared seeds") {
  const auto p = GremParams::rem(12);
  const double beta = 1.0, h = 1e-3;
  const std::size_t R = 100;
  const double betas[] = {beta - h, beta + h};
  const auto table = replica_log_partitions(p, std::span<const double>(betas), R, 21);
  std::vector<double> fd(R);
  for (std::size_t r = 0; r < R; ++r) fd[r] = (table.at(r, 1) - table.at(r, 0)) / (2 * h * 12);
  const auto sfd = summarize(fd);
  const auto der = pressure_derivative(p, beta, R, 21);
  const double tol = std::max(1e-4, 4 * std::hypot(sfd.stderr_mean, der.std_error));
  CHECK(std::abs(der.value - sfd.mean) <= tol);
}

TEST_CASE("per-sample entropy positivity and Hoelder step") {
  const DisorderSample zero(GremParams::rem(5), {std::vector<double>(32, 0.0)});
  CHECK(entropy_positivity_check(zero, 1.0, 0.5));
  CHECK(holder_check(zero, 1.3, 0.3));
  const auto d = sample_disorder(GremParams::rem(10), 5);
  CHECK(entropy_positivity_check(d, 2.0, 1.0));
  CHECK(entropy_positivity_check(d, 2.0, 0.5));
  CHECK(holder_check(d, 2.0, 0.5));
  CHECK_THROWS_AS(entropy_positivity_check(d, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(holder_check(d, 1.0, 1.0), ParameterError);

  CounterRng rng(12);
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const auto s = sample_disorder(GremParams::from_blocks({0.6, 0.4}, {4, 4}), rng.next_u64());
    const double beta = rng.uniform(0.0, 3.0);
    const double m = 0.1 * (1 + static_cast<int>(rng.next_u64() % 9));
    violations += !entropy_positivity_check(s, beta, m);
    violations += !holder_check(s, beta, m);
  }
  CHECK(violations == 0);
}
