#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "remkit/model.hpp"

namespace remkit {

using MetaValue = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct CheckReport {
  std::string name;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, MetaValue>> metadata;

  // One JSON object on a single line.
  std::string to_json() const;
};

// Pressure at beta_max against ln 2 + beta^2/4 - int_0^beta (b/2) E[Omega_b] db,
// both sides from the same disorder replicas (REM of size N). The integral is
// composite Simpson on grid_points uniform nodes.
CheckReport sum_rule_check(double beta_max, int N, std::size_t replicas, std::size_t grid_points,
                           std::uint64_t seed);

// (beta/2)(1 - E[Omega]) against the centered difference of the pressure with
// step h, all on shared replicas.
CheckReport derivative_check(double beta, int N, std::size_t replicas, std::uint64_t seed,
                             double h = 1e-3);

// Frequency of |ln Z / N - P_N| >= beta t over replicas against 2 e^{-N t^2 / 2}.
CheckReport concentration_check(int N, double beta, double t, std::size_t replicas,
                                std::uint64_t seed);

// 2 exp(-N t^2 / 2).
double concentration_bound(int N, double t);

// For every beta (all below beta_c): (1/N) ln E[Omega] at the largest N is
// below -eps0, and its magnitude does not grow over N_list beyond noise. One
// report per beta.
std::vector<CheckReport> overlap_decay_check(const std::vector<double>& betas,
                                             const std::vector<int>& N_list, std::size_t replicas,
                                             std::uint64_t seed, double eps0 = 0.01);

// P^(n)_N(beta) >= sum_i kappa_i P^(1)_{K_i}(sqrt(a_i/kappa_i) beta).
CheckReport grem_lower_check(const GremParams& p, double beta, std::size_t replicas,
                             std::uint64_t seed);

// Quenched pressure below q_grem(beta) within 4 standard errors.
CheckReport upper_bound_check(const GremParams& p, double beta, std::size_t replicas,
                              std::uint64_t seed);

// Couplings of the general Hamiltonian -(1/sqrt 2) sum_X Delta_X J_X sigma_X
// on a lattice of the given size, stored as squared magnitudes with
// multiplicities.
class GeneralHamiltonianSpec {
 public:
  struct Group {
    double delta_squared;
    double multiplicity;
  };

  GeneralHamiltonianSpec(std::size_t lattice_size, const std::vector<double>& deltas);
  GeneralHamiltonianSpec(std::size_t lattice_size, std::vector<Group> groups);
  // |Lambda| = N, 2^N terms with Delta_X^2 = N 2^{-N}.
  static GeneralHamiltonianSpec rem(int N);

  std::size_t lattice_size() const noexcept { return lattice_size_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }

 private:
  std::size_t lattice_size_;
  std::vector<Group> groups_;
};

// (1/|Lambda|) sum_X Delta_X^2.
double stability_constant(const GeneralHamiltonianSpec& spec);

// beta sqrt(c / (2 |Lambda|)).
double lipschitz_constant(double beta, double c, std::size_t lattice_size);

// 2 exp(-t^2 |Lambda| / (2 c beta^2)), the deviation bound for the random
// pressure of a stable Hamiltonian.
double general_concentration_bound(double t, std::size_t lattice_size, double c, double beta);

// Induction schedule beta_{k+1} = beta_k + a beta_c (1 - beta_k/beta_c)^2,
// 0 < a < 1/2, starting at beta_0. Plotting aid only.
std::vector<double> induction_schedule(double beta0, double a, std::size_t steps);

// Per-realization inequalities on `samples` random (disorder, beta, m)
// draws: entropy positivity and the Hoelder step. lhs = violations found.
CheckReport sample_inequalities_check(const GremParams& p, std::size_t samples,
                                      std::uint64_t seed);

}  // namespace remkit
