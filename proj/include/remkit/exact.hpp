#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "remkit/model.hpp"

namespace remkit {

// Slack on per-realization inequalities between log-partition values.
inline constexpr double kInequalitySlack = 1e-9;

// Monte Carlo estimate of the quenched pressure E[(1/N) ln Z_N(beta)].
struct PressureEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  double beta = 0.0;
  GremParams params;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of E[Omega{delta(sigma, sigma')}].
struct OverlapEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

struct DerivativeEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// ln Z(beta) for one realization, by exact enumeration of all 2^N states.
double log_partition(const DisorderSample& d, double beta);
// Same for several temperatures in one pass over the energies.
std::vector<double> log_partition(const DisorderSample& d, std::span<const double> betas);

// ln Z / N; exactly ln 2 at beta = 0.
double pressure_from_log_partition(double log_z, int N, double beta);

// Per-realization two-replica overlap Z(2 beta) / Z(beta)^2.
double overlap_ratio(const DisorderSample& d, double beta);

// ln Z at every (replica, beta) pair. Replica r uses the disorder seed
// derive_seed(seed, r), so estimates at different temperatures built from the
// same seed share their disorder.
struct ReplicaLogPartitions {
  std::vector<double> betas;
  std::size_t replicas = 0;
  std::vector<double> values;  // row-major: values[r * betas.size() + b]

  double at(std::size_t replica, std::size_t beta_index) const {
    return values[replica * betas.size() + beta_index];
  }
  std::vector<double> column(std::size_t beta_index) const;
};

ReplicaLogPartitions replica_log_partitions(const GremParams& p, std::span<const double> betas,
                                            std::size_t replicas, std::uint64_t seed,
                                            int cap = kDefaultEnumerationCap);

PressureEstimate quenched_pressure(const GremParams& p, double beta, std::size_t replicas,
                                   std::uint64_t seed, int cap = kDefaultEnumerationCap);
std::vector<PressureEstimate> quenched_pressure_sweep(const GremParams& p,
                                                      std::span<const double> betas,
                                                      std::size_t replicas, std::uint64_t seed,
                                                      int cap = kDefaultEnumerationCap);

// (1/N) ln E[Z_N(beta)] for the REM: ln 2 + beta^2 / 4.
double annealed_pressure_rem(double beta);

OverlapEstimate overlap_expectation(const GremParams& p, double beta, std::size_t replicas,
                                    std::uint64_t seed, int cap = kDefaultEnumerationCap);

// (beta/2)(1 - E[Omega{delta}]); REM only.
DerivativeEstimate pressure_derivative(const GremParams& p, double beta, std::size_t replicas,
                                       std::uint64_t seed, int cap = kDefaultEnumerationCap);

// m ln Z(beta) <= ln Z(m beta), for 0 < m <= 1.
bool entropy_positivity_check(const DisorderSample& d, double beta, double m);

// ln Z(2 m beta) <= m ln Z(beta) + (1 - m) ln Z(m beta / (1 - m)), for 0 < m < 1.
bool holder_check(const DisorderSample& d, double beta, double m);

}  // namespace remkit
