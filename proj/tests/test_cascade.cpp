#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "remkit/cascade.hpp"
#include "remkit/error.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"

using namespace remkit;

namespace {

// One-sample KS distance against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double poisson_pmf(int k, double lambda) {
  return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

// Upper chi-square quantile by Wilson-Hilferty, z = 3.29 (p = 5e-4).
double chi2_critical(int dof) {
  const double z = 3.29, d = dof;
  const double c = 1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d));
  return d * c * c * c;
}

}  // namespace

TEST_CASE("point process: ordering, fixtures, determinism") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = sample_ppp(50, seed);
    REQUIRE(r.size() == 50);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(r.points[k] < r.points[k - 1]);
  }
  const auto a = sample_ppp(10, 42), b = sample_ppp(10, 42);
  CHECK(a.points == b.points);
  CHECK_THROWS_AS(sample_ppp(0, 1), ParameterError);
  CHECK_THROWS_AS(PppRealization::from_arrivals({1.0, 0.5}), ParameterError);
  const auto f = PppRealization::from_arrivals({1.0, 2.0});
  CHECK(f.points[0] == 0.0);
  CHECK(f.points[1] == doctest::Approx(-std::numbers::ln2));
}

TEST_CASE("leading point is Gumbel") {
  std::vector<double> y1(100000);
  for (std::size_t s = 0; s < y1.size(); ++s) y1[s] = sample_ppp(1, s).points[0];
  const double d = ks_one_sample(y1, [](double y) { return std::exp(-std::exp(-y)); });
  CHECK(d < 0.01);
}

TEST_CASE("counts above a level are Poisson") {
  std::size_t above_zero = 0;
  const std::size_t seeds = 100000;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto r = sample_ppp(40, 1000000 + s);
    above_zero += static_cast<std::size_t>(
        std::count_if(r.points.begin(), r.points.end(), [](double y) { return y > 0.0; }));
  }
  CHECK(static_cast<double>(above_zero) / seeds == doctest::Approx(1.0).epsilon(0.02));

  for (double level : {-1.0, 0.0, 1.0}) {
    const double lambda = std::exp(-level);
    const int cells = 12;
    std::vector<double> observed(cells, 0.0);
    const int runs = 10000;
    for (int s = 0; s < runs; ++s) {
      const auto r = sample_ppp(60, 7000000 + s);
      const auto c = std::count_if(r.points.begin(), r.points.end(),
                                   [&](double y) { return y > level; });
      observed[std::min<std::size_t>(static_cast<std::size_t>(c), cells - 1)] += 1.0;
    }
    double chi2 = 0.0, tail = 1.0;
    int dof = -1;
    for (int k = 0; k < cells; ++k) {
      const double p = k + 1 < cells ? poisson_pmf(k, lambda) : tail;
      tail -= p;
      const double expected = runs * p;
      if (expected < 5.0) continue;
      chi2 += (observed[k] - expected) * (observed[k] - expected) / expected;
      ++dof;
    }
    CHECK(chi2 < chi2_critical(dof));
  }
}

TEST_CASE("weight sums") {
  std::vector<double> s(100);
  for (int k = 0; k < 100; ++k) s[k] = k + 1.0;
  const auto fixture = PppRealization::from_arrivals(s);
  double direct = 0.0;
  for (int k = 1; k <= 100; ++k) direct += std::pow(k, -1.0 / 0.4);
  const auto w = weight_sum(fixture, 0.4, 1.0);
  CHECK(w.partial == doctest::Approx(direct).epsilon(1e-13));
  CHECK(w.tail == doctest::Approx(std::pow(100.0, 1.0 - 2.5) / 1.5).epsilon(1e-14));
  CHECK(w.partial > 0.0);

  const auto r = sample_ppp(100, 3);
  CHECK(weight_sum(r, 0.95).tail_flag);
  CHECK_THROWS_AS(weight_sum(r, 0.95, 1e-6, TailPolicy::kThrow), TailTooLargeError);
  CHECK_THROWS_AS(weight_sum(r, 1.0), ParameterError);
  CHECK_FALSE(weight_sum(sample_ppp(100000, 3), 0.3).tail_flag);
}

TEST_CASE("tail estimate tracks the mass added by doubling K") {
  const std::size_t K = 1000;
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto big = sample_ppp(2 * K, seed);
    auto small = big;
    small.points.resize(K);
    small.arrivals.resize(K);
    const auto ws = weight_sum(small, 0.5);
    const auto wb = weight_sum(big, 0.5);
    const double added = wb.partial - ws.partial;
    CHECK(added > 0.0);
    covered += added <= ws.tail;
  }
  CHECK(covered >= 475);
}

TEST_CASE("mark distributions and invariance constants") {
  CHECK(FDistribution::constant(0.7).log_invariance_constant(0.3) == doctest::Approx(0.7));
  CHECK(FDistribution::gaussian(0.0, 2.0).log_invariance_constant(0.5) == doctest::Approx(0.5));
  // Midpoint-rule oracle for the uniform moment generating function.
  const auto u = FDistribution::uniform(-1.0, 2.0);
  const double m = 0.8;
  double integral = 0.0;
  const int cells = 200000;
  for (int k = 0; k < cells; ++k) integral += std::exp(m * (-1.0 + 3.0 * (k + 0.5) / cells));
  integral /= cells;
  CHECK(u.log_mgf(m) == doctest::Approx(std::log(integral)).epsilon(1e-9));

  // Pressure shift from a Gaussian mark of variance beta^2 (b-1) N / 2.
  const double beta = 1.2, b = 3.0, N = 16;
  const auto g = FDistribution::gaussian(0.0, beta * beta * (b - 1) * N / 2);
  CHECK(g.log_invariance_constant(0.4) / N == doctest::Approx(beta * beta * (b - 1) * 0.4 / 4));

  // E[Z] = 2^N e^{N beta^2 / 4} checks the Monte Carlo mgf at m = 1.
  const auto z = FDistribution::rem_log_partition(8, 0.5, 40000, 9);
  CHECK(z.log_mgf(1.0) == doctest::Approx(8 * std::numbers::ln2 + 8 * 0.25 / 4).epsilon(2e-3));
  CounterRng rng(1);
  const double sample = z.sample(rng);
  CHECK(sample >= 8 * std::numbers::ln2 - 8 * 0.5 * 4);

  CHECK_THROWS_AS(FDistribution::uniform(1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(FDistribution::gaussian(0.0, -1.0), ParameterError);
}

TEST_CASE("invariance with constant marks is exact per realization") {
  const auto r = invariance_test(0.3, FDistribution::constant(1.3), 10000, 1000, 4);
  CHECK(r.ks <= 2e-3);
  CHECK(r.c == doctest::Approx(std::exp(1.3)));
  CHECK(r.tail_clear);
  CHECK(r.pass);
}

TEST_CASE("invariance for Gaussian and uniform marks") {
  const FDistribution fs[] = {FDistribution::gaussian(0.0, 1.0), FDistribution::uniform(-1.0, 1.0)};
  InvarianceOptions opts;
  opts.threshold = 0.062;  // 99.9% null quantile at 2000 trials
  const auto reports = invariance_test(0.3, std::span<const FDistribution>(fs), 10000, 2000, 8, opts);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.tail_clear);
    CHECK(r.pass);
  }
  // Independent processes for both sides give the same verdict.
  opts.shared_ppp = false;
  const auto indep = invariance_test(0.3, fs[0], 10000, 2000, 8, opts);
  CHECK(indep.pass);
}

TEST_CASE("omitting the constant is detected") {
  // Same comparison as the library, built by hand with c = 1 on the right.
  const double m = 0.5;
  const auto f = FDistribution::gaussian(0.0, 4.0);
  std::vector<double> lhs, wrong, right;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const auto ppp = sample_ppp(20000, derive_seed(77, t));
    CounterRng rng(t, 9);
    std::vector<double> marked(ppp.size()), plain(ppp.size());
    for (std::size_t k = 0; k < ppp.size(); ++k) {
      plain[k] = ppp.points[k] / m;
      marked[k] = plain[k] + f.sample(rng);
    }
    lhs.push_back(log_sum_exp(marked));
    wrong.push_back(log_sum_exp(plain));
    right.push_back(f.log_invariance_constant(m) + wrong.back());
  }
  CHECK(f.log_invariance_constant(m) == doctest::Approx(1.0));
  CHECK(ks_two_sample(lhs, right) < 0.062);
  CHECK(ks_two_sample(lhs, wrong) > 0.1);
}

TEST_CASE("tail policy in the invariance test") {
  const auto f = FDistribution::gaussian(0.0, 1.0);
  CHECK_THROWS_AS(invariance_test(0.8, f, 1000, 1000, 1), TailTooLargeError);
  InvarianceOptions opts;
  opts.tail_policy = TailPolicy::kReport;
  const auto r = invariance_test(0.8, f, 1000, 1000, 1, opts);
  CHECK_FALSE(r.tail_clear);
  CHECK_FALSE(r.pass);
  CHECK(r.max_relative_tail > 1e-6);
  CHECK_THROWS_AS(invariance_test(0.5, f, 100, 999, 1), ParameterError);
}

TEST_CASE("adaptive extension clears the tail") {
  InvarianceOptions opts;
  opts.max_points = 2000000;
  const auto r = invariance_test(0.4, FDistribution::constant(0.0), 100, 1000, 5, opts);
  CHECK(r.tail_clear);
  CHECK(r.max_relative_tail <= 1e-6);
  CHECK(r.mean_points > 100.0);
  CHECK(r.max_points_used <= 2000000);
}

TEST_CASE("cascade structure") {
  const auto p = GremParams::from_blocks({0.6, 0.4}, {4, 4});
  const VariationalPoint m({0.3, 0.6});
  const auto c = sample_cascade(p, m, 7, 11);
  CHECK(c.depth() == 2);
  CHECK(c.leaf_count() == 49);
  const auto w = c.leaf_log_weights();
  REQUIRE(w.size() == 49);
  for (double v : w) CHECK(std::isfinite(v));
  CHECK(w[7 * 3 + 2] == doctest::Approx(c.level_points(0)[3] / 0.3 + c.level_points(1)[7 * 3 + 2] / 0.6));
  CHECK(c.log_total_weight() == doctest::Approx(log_sum_exp(w)));
  CHECK(sample_cascade(p, m, 7, 11).leaf_log_weights() == w);

  // Depth one is the point process itself.
  const auto rem = GremParams::rem(6);
  const auto single = sample_cascade(rem, VariationalPoint({0.5}), 20, 3);
  const auto ppp = sample_ppp(20, derive_seed(derive_seed(3, 1), 0));
  const auto lw = single.leaf_log_weights();
  for (std::size_t k = 0; k < 20; ++k) CHECK(lw[k] == doctest::Approx(ppp.points[k] / 0.5));

  CHECK_THROWS_AS(sample_cascade(p, VariationalPoint({0.5, 1.0}), 5, 1), ParameterError);
  CHECK_THROWS_AS(sample_cascade(p, VariationalPoint({0.5}), 5, 1), ParameterError);
  CHECK_THROWS_AS(sample_cascade(GremParams::from_blocks({0.25, 0.25, 0.25, 0.25}, {2, 2, 2, 2}),
                                 VariationalPoint({0.1, 0.2, 0.3, 0.4}), 200, 1),
                  CapacityError);
}

TEST_CASE("telescoped invariance over a two-level cascade") {
  const auto p = GremParams::from_blocks({0.6, 0.4}, {4, 4});
  const VariationalPoint m({0.2, 0.3});
  const FDistribution marks[] = {FDistribution::gaussian(0.0, 1.0), FDistribution::uniform(-1.0, 1.0)};
  const auto r = cascade_invariance_test(p, m, marks, 60, 2000, 21, 0.062);
  CHECK(r.max_relative_tail < 0.05);
  CHECK(r.log_c == doctest::Approx(marks[0].log_invariance_constant(0.2) +
                                   marks[1].log_invariance_constant(0.3)));
  CHECK(r.pass);
}
