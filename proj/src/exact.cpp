#include "remkit/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "remkit/error.hpp"
#include "remkit/parallel.hpp"
#include "remkit/rng.hpp"
#include "remkit/stats.hpp"

namespace remkit {

namespace {

constexpr std::size_t kEnergyBlock = std::size_t{1} << 14;

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be finite and >= 0");
}

// Running log-sum-exp of -beta * E over streamed energy blocks.
struct LogSumAccumulator {
  double shift = std::numeric_limits<double>::infinity();  // smallest energy seen
  double sum = 0.0;                                         // sum exp(-beta (E - shift))

  void add_block(double beta, std::span<const double> energies, double block_min) {
    if (block_min < shift) {
      if (sum > 0.0) sum *= std::exp(-beta * (shift - block_min));
      shift = block_min;
    }
    double partial = 0.0;
    for (double e : energies) partial += std::exp(-beta * (e - shift));
    sum += partial;
  }
  double value(double beta) const { return -beta * shift + std::log(sum); }
};

}  // namespace

std::vector<double> log_partition(const DisorderSample& d, std::span<const double> betas) {
  for (double b : betas) check_beta(b);
  const GremParams& p = d.params();
  const double entropy = p.size() * std::numbers::ln2;
  std::vector<LogSumAccumulator> acc(betas.size());

  auto consume = [&](std::span<const double> block) {
    const double block_min = *std::min_element(block.begin(), block.end());
    for (std::size_t b = 0; b < betas.size(); ++b) {
      if (betas[b] == 0.0) continue;
      acc[b].add_block(betas[b], block, block_min);
    }
  };

  const std::uint64_t states = p.state_count();
  const auto flat = d.flat_energies();
  if (!flat.empty()) {
    for (std::uint64_t first = 0; first < states; first += kEnergyBlock) {
      const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(kEnergyBlock, states - first));
      consume(flat.subspan(static_cast<std::size_t>(first), len));
    }
  } else {
    std::vector<double> buffer(kEnergyBlock);
    for (std::uint64_t first = 0; first < states; first += kEnergyBlock) {
      const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(kEnergyBlock, states - first));
      std::span<double> block(buffer.data(), len);
      d.energies(first, block);
      consume(block);
    }
  }

  std::vector<double> out(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    out[b] = betas[b] == 0.0 ? entropy : acc[b].value(betas[b]);
  }
  return out;
}

double log_partition(const DisorderSample& d, double beta) {
  const double betas[] = {beta};
  return log_partition(d, std::span<const double>(betas))[0];
}

double overlap_ratio(const DisorderSample& d, double beta) {
  const double betas[] = {beta, 2.0 * beta};
  const auto lz = log_partition(d, std::span<const double>(betas));
  return std::exp(lz[1] - 2.0 * lz[0]);
}

std::vector<double> ReplicaLogPartitions::column(std::size_t beta_index) const {
  std::vector<double> out(replicas);
  for (std::size_t r = 0; r < replicas; ++r) out[r] = at(r, beta_index);
  return out;
}

ReplicaLogPartitions replica_log_partitions(const GremParams& p, std::span<const double> betas,
                                            std::size_t replicas, std::uint64_t seed, int cap) {
  for (double b : betas) check_beta(b);
  if (p.size() > cap) {
    throw CapacityError("N = " + std::to_string(p.size()) + " exceeds the enumeration cap of " +
                        std::to_string(cap));
  }
  ReplicaLogPartitions out;
  out.betas.assign(betas.begin(), betas.end());
  out.replicas = replicas;
  out.values.resize(replicas * betas.size());
  parallel_for(replicas, [&](std::size_t r) {
    const DisorderSample d(p, derive_seed(seed, r), cap);
    const auto lz = log_partition(d, betas);
    std::copy(lz.begin(), lz.end(), out.values.begin() + static_cast<std::ptrdiff_t>(r * betas.size()));
  });
  return out;
}

double pressure_from_log_partition(double log_z, int N, double beta) {
  return beta == 0.0 ? std::numbers::ln2 : log_z / N;
}

std::vector<PressureEstimate> quenched_pressure_sweep(const GremParams& p,
                                                      std::span<const double> betas,
                                                      std::size_t replicas, std::uint64_t seed,
                                                      int cap) {
  if (replicas < 2) throw ParameterError("quenched_pressure: need at least 2 replicas");
  const auto table = replica_log_partitions(p, betas, replicas, seed, cap);
  std::vector<PressureEstimate> out;
  out.reserve(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    auto col = table.column(b);
    for (double& v : col) v = pressure_from_log_partition(v, p.size(), betas[b]);
    const auto s = summarize(col);
    out.push_back({s.mean, s.stderr_mean, replicas, betas[b], p, seed});
  }
  return out;
}

PressureEstimate quenched_pressure(const GremParams& p, double beta, std::size_t replicas,
                                   std::uint64_t seed, int cap) {
  const double betas[] = {beta};
  return quenched_pressure_sweep(p, std::span<const double>(betas), replicas, seed, cap)[0];
}

double annealed_pressure_rem(double beta) {
  check_beta(beta);
  return std::numbers::ln2 + 0.25 * beta * beta;
}

OverlapEstimate overlap_expectation(const GremParams& p, double beta, std::size_t replicas,
                                    std::uint64_t seed, int cap) {
  check_beta(beta);
  if (replicas < 1) throw ParameterError("overlap_expectation: need at least 1 replica");
  const double betas[] = {beta, 2.0 * beta};
  const auto table = replica_log_partitions(p, std::span<const double>(betas), replicas, seed, cap);
  std::vector<double> ratio(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    ratio[r] = std::exp(table.at(r, 1) - 2.0 * table.at(r, 0));
  }
  const auto s = summarize(ratio);
  return {s.mean, s.stderr_mean, replicas, beta, seed};
}

DerivativeEstimate pressure_derivative(const GremParams& p, double beta, std::size_t replicas,
                                       std::uint64_t seed, int cap) {
  if (!p.is_rem()) throw ParameterError("pressure_derivative: REM (n = 1) only");
  const auto overlap = overlap_expectation(p, beta, replicas, seed, cap);
  return {0.5 * beta * (1.0 - overlap.mean), 0.5 * beta * overlap.std_error};
}

bool entropy_positivity_check(const DisorderSample& d, double beta, double m) {
  if (!(m > 0.0 && m <= 1.0)) throw ParameterError("entropy_positivity_check: m must be in (0, 1]");
  const double betas[] = {beta, m * beta};
  const auto lz = log_partition(d, std::span<const double>(betas));
  return m * lz[0] <= lz[1] + kInequalitySlack;
}

bool holder_check(const DisorderSample& d, double beta, double m) {
  if (!(m > 0.0 && m < 1.0)) throw ParameterError("holder_check: m must be in (0, 1)");
  const double betas[] = {2.0 * m * beta, beta, m * beta / (1.0 - m)};
  const auto lz = log_partition(d, std::span<const double>(betas));
  return lz[0] <= m * lz[1] + (1.0 - m) * lz[2] + kInequalitySlack;
}

}  // namespace remkit
