#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace remkit {

inline constexpr int kDefaultEnumerationCap = 26;
// Disorder samples up to this size carry a flat table of all 2^N energies.
inline constexpr int kFlatEnergyCacheBits = 20;

// Parameters of an n-level GREM on N spins. Level i owns a contiguous block
// of K_i spins and carries variance weight a_i. The REM is the n = 1 case.
class GremParams {
 public:
  // Block sizes from proportions: K_i = round(kappa_i * N) with
  // largest-remainder correction; sum K_i = N.
  static GremParams from_proportions(std::vector<double> a, std::vector<double> kappa, int N);
  // Block sizes given directly; kappa_i = K_i / N.
  static GremParams from_blocks(std::vector<double> a, std::vector<int> blocks);
  static GremParams rem(int N);

  int levels() const noexcept { return static_cast<int>(a_.size()); }
  int size() const noexcept { return size_; }
  std::span<const double> a() const noexcept { return a_; }
  std::span<const double> kappa() const noexcept { return kappa_; }
  std::span<const int> blocks() const noexcept { return blocks_; }
  // K_1 + ... + K_level for level in [0, n]; prefix_bits(0) == 0.
  int prefix_bits(int level) const noexcept { return prefix_[static_cast<std::size_t>(level)]; }
  std::uint64_t state_count() const noexcept { return std::uint64_t{1} << size_; }

  // kappa_1/a_1 < kappa_2/a_2 < ... < kappa_n/a_n.
  bool nondegenerate() const noexcept;
  bool is_rem() const noexcept { return a_.size() == 1; }

  // Same level structure rescaled to a different size.
  GremParams resized(int N) const { return from_proportions(a_, kappa_, N); }

 private:
  GremParams(std::vector<double> a, std::vector<double> kappa, std::vector<int> blocks);

  std::vector<double> a_;
  std::vector<double> kappa_;
  std::vector<int> blocks_;
  std::vector<int> prefix_;
  int size_ = 0;
};

// A spin configuration. Bit j holds sigma_{j+1} (set bit = +1); level blocks
// are contiguous bit ranges starting at bit 0, so block 1 is the lowest K_1
// bits.
struct SpinConfig {
  std::uint64_t bits = 0;
  friend bool operator==(SpinConfig, SpinConfig) = default;
};

// Index in [0, 2^{K_level}) of the spins belonging to the given level
// (0-based level).
std::uint64_t project(SpinConfig s, int level, const GremParams& p);

// Inverse of the projections: packs block indices back into a configuration.
SpinConfig compose(std::span<const std::uint64_t> block_indices, const GremParams& p);

// E[H(s) H(t)] = (N/2) sum_i a_i prod_{j<=i} delta(pi_j(s), pi_j(t)).
double covariance(SpinConfig s, SpinConfig t, const GremParams& p);

// One realization of the Hamiltonian
//   H(s) = sqrt(N/2) sum_i sqrt(a_i) X_i(pi_1(s), ..., pi_i(s)),
// with X_i i.i.d. standard normals indexed by the level-i prefix of s.
// Every X is a pure function of (seed, level, prefix index), so tables too
// large to store are regenerated on demand with identical values.
class DisorderSample {
 public:
  DisorderSample(GremParams params, std::uint64_t seed, int cap = kDefaultEnumerationCap);
  // Explicit level tables (tests and fixtures). tables[i] must have
  // 2^{prefix_bits(i+1)} entries.
  DisorderSample(GremParams params, std::vector<std::vector<double>> tables);

  const GremParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // X_level(prefix); prefix in [0, 2^{prefix_bits(level+1)}).
  double gaussian(int level, std::uint64_t prefix) const;
  double energy(SpinConfig s) const;

  // Writes energies of states [first, first + out.size()) into out.
  void energies(std::uint64_t first, std::span<double> out) const;

  // All 2^N energies when cached (N <= kFlatEnergyCacheBits), else empty.
  std::span<const double> flat_energies() const noexcept { return flat_; }
  bool level_materialized(int level) const noexcept;

 private:
  void fill_flat();

  GremParams params_;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<double>> tables_;  // empty vector => generated on demand
  std::vector<double> level_scale_;          // sqrt(N/2) * sqrt(a_i)
  std::vector<double> flat_;
};

DisorderSample sample_disorder(const GremParams& p, std::uint64_t seed,
                               int cap = kDefaultEnumerationCap);

double energy(const DisorderSample& d, SpinConfig s);

}  // namespace remkit
