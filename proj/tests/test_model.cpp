#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "remkit/error.hpp"
#include "remkit/model.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"

using namespace remkit;

namespace {

GremParams two_level() { return GremParams::from_blocks({0.6, 0.4}, {2, 2}); }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(GremParams::from_proportions({0.5, 0.4}, {0.5, 0.5}, 8), ParameterError);
  CHECK_THROWS_AS(GremParams::from_proportions({1.0, 0.0}, {0.5, 0.5}, 8), ParameterError);
  CHECK_THROWS_AS(GremParams::from_proportions({0.5, 0.5}, {0.95, 0.05}, 8), ParameterError);
  CHECK_THROWS_AS(GremParams::from_blocks({0.5, 0.5}, {3, 0}), ParameterError);

  const auto rem = GremParams::rem(10);
  CHECK(rem.levels() == 1);
  CHECK(rem.blocks()[0] == 10);
  CHECK(rem.nondegenerate());
}

TEST_CASE("largest-remainder block sizes sum to N") {
  const auto p = GremParams::from_proportions({0.2, 0.3, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 10);
  CHECK(p.blocks()[0] + p.blocks()[1] + p.blocks()[2] == 10);
  CHECK(p.blocks()[0] == 4);  // ties resolved toward the first level
  CHECK(p.blocks()[1] == 3);
  const auto q = GremParams::from_proportions({0.6, 0.4}, {0.5, 0.5}, 16);
  CHECK(q.blocks()[0] == 8);
  CHECK(q.blocks()[1] == 8);
  CHECK(q.nondegenerate());
  CHECK_FALSE(GremParams::from_proportions({0.4, 0.6}, {0.5, 0.5}, 16).nondegenerate());
}

TEST_CASE("projections") {
  const auto rem = GremParams::rem(6);
  CHECK(project(SpinConfig{0b101101}, 0, rem) == 0b101101);

  const auto p = two_level();
  // Block 1 holds sigma_1, sigma_2 = bits 0 and 1.
  CHECK(project(SpinConfig{0b1101}, 0, p) == 0b01);
  CHECK(project(SpinConfig{0b1101}, 1, p) == 0b11);
  CHECK_THROWS_AS(project(SpinConfig{0}, 2, p), ParameterError);

  const auto q = GremParams::from_blocks({0.5, 0.3, 0.2}, {3, 1, 4});
  for (std::uint64_t bits = 0; bits < q.state_count(); ++bits) {
    std::vector<std::uint64_t> blocks;
    for (int i = 0; i < q.levels(); ++i) blocks.push_back(project(SpinConfig{bits}, i, q));
    REQUIRE(compose(blocks, q).bits == bits);
  }
}

TEST_CASE("covariance") {
  const auto p = two_level();
  CHECK(covariance(SpinConfig{0b1101}, SpinConfig{0b1101}, p) == doctest::Approx(2.0));
  // Agree on block 1 only.
  CHECK(covariance(SpinConfig{0b0001}, SpinConfig{0b1101}, p) == doctest::Approx(1.2));
  CHECK(covariance(SpinConfig{0b0010}, SpinConfig{0b1101}, p) == 0.0);
  const auto rem = GremParams::rem(5);
  CHECK(covariance(SpinConfig{3}, SpinConfig{4}, rem) == 0.0);
  CHECK(covariance(SpinConfig{3}, SpinConfig{3}, rem) == doctest::Approx(2.5));
  CHECK_THROWS_AS(covariance(SpinConfig{1U << 5}, SpinConfig{0}, rem), ParameterError);
}

TEST_CASE("covariance is symmetric and positive semidefinite") {
  const auto p = GremParams::from_blocks({0.5, 0.3, 0.2}, {3, 2, 3});
  CounterRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SpinConfig> cfgs(8);
    for (auto& c : cfgs) {
      // Bias toward shared prefixes so every level is exercised.
      c.bits = rng.next_u64() % p.state_count();
      if (rng.uniform() < 0.5) c.bits = (cfgs[0].bits & 0x7) | (c.bits & ~std::uint64_t{0x7});
    }
    Eigen::MatrixXd C(8, 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(covariance(cfgs[i], cfgs[i], p) == doctest::Approx(4.0));
      for (int j = 0; j < 8; ++j) {
        C(i, j) = covariance(cfgs[i], cfgs[j], p);
        REQUIRE(C(i, j) == covariance(cfgs[j], cfgs[i], p));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("disorder sampling is deterministic and capped") {
  const auto p = GremParams::from_blocks({0.6, 0.4}, {3, 4});
  const auto d1 = sample_disorder(p, 42);
  const auto d2 = sample_disorder(p, 42);
  const auto d3 = sample_disorder(p, 43);
  CHECK(d1.flat_energies().size() == 128);
  bool differs = false;
  for (std::uint64_t s = 0; s < p.state_count(); ++s) {
    REQUIRE(d1.energy(SpinConfig{s}) == d2.energy(SpinConfig{s}));
    differs = differs || d1.energy(SpinConfig{s}) != d3.energy(SpinConfig{s});
  }
  CHECK(differs);
  CHECK_THROWS_AS(sample_disorder(GremParams::rem(27), 1), CapacityError);
  CHECK_NOTHROW(sample_disorder(GremParams::rem(12), 1, 12));
  CHECK_THROWS_AS(sample_disorder(GremParams::rem(13), 1, 12), CapacityError);
}

TEST_CASE("energy evaluation") {
  const auto rem = GremParams::rem(2);
  const DisorderSample zero(rem, {std::vector<double>(4, 0.0)});
  CHECK(zero.energy(SpinConfig{2}) == 0.0);
  const DisorderSample d(rem, {{0.0, 1.0, 0.0, 0.0}});
  CHECK(d.energy(SpinConfig{1}) == doctest::Approx(1.0));

  // GREM: sqrt(N/2) (sqrt(a1) X1[pi_1] + sqrt(a2) X2[pi_1, pi_2]).
  const auto p = GremParams::from_blocks({0.6, 0.4}, {1, 1});
  const DisorderSample g(p, {{0.5, -1.0}, {1.0, 2.0, 3.0, 4.0}});
  CHECK(g.energy(SpinConfig{0b10}) == doctest::Approx(std::sqrt(0.6) * 0.5 + std::sqrt(0.4) * 3.0));
  CHECK(g.energy(SpinConfig{0b01}) == doctest::Approx(-std::sqrt(0.6) + std::sqrt(0.4) * 2.0));
}

TEST_CASE("streamed energies match the level formula above the cache size") {
  const auto p = GremParams::from_blocks({0.7, 0.3}, {10, 11});
  const auto d = sample_disorder(p, 9);
  CHECK(d.flat_energies().empty());
  CHECK(d.level_materialized(0));
  CHECK_FALSE(d.level_materialized(1));
  std::vector<double> block(777);
  const std::uint64_t first = 123457;
  d.energies(first, block);
  const double scale = std::sqrt(21.0 / 2.0);
  for (std::size_t k = 0; k < block.size(); ++k) {
    const std::uint64_t s = first + k;
    const double expect = scale * (std::sqrt(0.7) * normal_at(9, 0, s & 1023) +
                                   std::sqrt(0.3) * normal_at(9, 1, s));
    REQUIRE(block[k] == doctest::Approx(expect).epsilon(1e-14));
    REQUIRE(block[k] == d.energy(SpinConfig{s}));
  }
}

TEST_CASE("Monte Carlo moments of the Hamiltonian match the covariance") {
  const auto p = GremParams::from_blocks({0.6, 0.4}, {3, 3});
  const std::size_t R = 10000;
  const SpinConfig s{0b101011}, t_same_block{0b110011}, t_other{0b101100};
  std::vector<double> hs(R), ht(R), hu(R), x0(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto d = sample_disorder(p, derive_seed(321, r));
    hs[r] = d.energy(s);
    ht[r] = d.energy(t_same_block);
    hu[r] = d.energy(t_other);
    x0[r] = d.gaussian(1, 17);
  }
  CHECK(std::abs(summarize(x0).mean) < 5.0 / std::sqrt(double(R)));

  auto check_cov = [&](const std::vector<double>& a, const std::vector<double>& b, double expect) {
    std::vector<double> prod(R);
    for (std::size_t r = 0; r < R; ++r) prod[r] = a[r] * b[r];
    const auto sp = summarize(prod);
    CHECK(std::abs(sp.mean - expect) <= 4.0 * sp.stderr_mean);
  };
  check_cov(hs, hs, covariance(s, s, p));
  check_cov(hs, ht, covariance(s, t_same_block, p));
  check_cov(hs, hu, covariance(s, t_other, p));
  CHECK(covariance(s, t_same_block, p) == doctest::Approx(1.8));
}
