#include "remkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "remkit/error.hpp"
#include "remkit/rng.hpp"

namespace remkit {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr int kMaxSpins = 62;

void check_weights(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ParameterError(std::string(name) + ": need at least one level");
  double total = 0.0;
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ParameterError(std::string(name) + ": entries must be positive and finite");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ParameterError(std::string(name) + ": entries must sum to 1 (got " +
                         std::to_string(total) + ")");
  }
}

std::uint64_t low_mask(int bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

GremParams::GremParams(std::vector<double> a, std::vector<double> kappa, std::vector<int> blocks)
    : a_(std::move(a)), kappa_(std::move(kappa)), blocks_(std::move(blocks)) {
  prefix_.resize(blocks_.size() + 1, 0);
  for (std::size_t i = 0; i < blocks_.size(); ++i) prefix_[i + 1] = prefix_[i] + blocks_[i];
  size_ = prefix_.back();
}

GremParams GremParams::from_proportions(std::vector<double> a, std::vector<double> kappa, int N) {
  check_weights(a, "a");
  check_weights(kappa, "kappa");
  if (a.size() != kappa.size()) throw ParameterError("a and kappa differ in length");
  if (N < 1 || N > kMaxSpins) throw ParameterError("N must be in [1, 62]");

  const std::size_t n = a.size();
  std::vector<int> blocks(n);
  std::vector<double> remainder(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = kappa[i] * N;
    blocks[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - blocks[i];
    assigned += blocks[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return remainder[l] > remainder[r]; });
  for (std::size_t k = 0; assigned < N; ++k, ++assigned) ++blocks[order[k % n]];
  for (std::size_t i = 0; i < n; ++i) {
    if (blocks[i] < 1) {
      throw ParameterError("kappa_" + std::to_string(i + 1) + " * N rounds to an empty block");
    }
  }
  return GremParams(std::move(a), std::move(kappa), std::move(blocks));
}

GremParams GremParams::from_blocks(std::vector<double> a, std::vector<int> blocks) {
  check_weights(a, "a");
  if (a.size() != blocks.size()) throw ParameterError("a and blocks differ in length");
  int N = 0;
  for (int k : blocks) {
    if (k < 1) throw ParameterError("block sizes must be >= 1");
    N += k;
  }
  if (N > kMaxSpins) throw ParameterError("N must be <= 62");
  std::vector<double> kappa(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) kappa[i] = static_cast<double>(blocks[i]) / N;
  return GremParams(std::move(a), std::move(kappa), std::move(blocks));
}

GremParams GremParams::rem(int N) { return from_proportions({1.0}, {1.0}, N); }

bool GremParams::nondegenerate() const noexcept {
  for (std::size_t i = 1; i < a_.size(); ++i) {
    if (!(kappa_[i - 1] / a_[i - 1] < kappa_[i] / a_[i])) return false;
  }
  return true;
}

std::uint64_t project(SpinConfig s, int level, const GremParams& p) {
  if (level < 0 || level >= p.levels()) throw ParameterError("project: level out of range");
  if (s.bits >> p.size()) throw ParameterError("project: configuration has bits beyond N");
  return (s.bits >> p.prefix_bits(level)) & low_mask(p.blocks()[static_cast<std::size_t>(level)]);
}

SpinConfig compose(std::span<const std::uint64_t> block_indices, const GremParams& p) {
  if (block_indices.size() != static_cast<std::size_t>(p.levels())) {
    throw ParameterError("compose: need one index per level");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < p.levels(); ++i) {
    const auto idx = block_indices[static_cast<std::size_t>(i)];
    if (idx >> p.blocks()[static_cast<std::size_t>(i)]) {
      throw ParameterError("compose: block index out of range");
    }
    bits |= idx << p.prefix_bits(i);
  }
  return SpinConfig{bits};
}

double covariance(SpinConfig s, SpinConfig t, const GremParams& p) {
  if ((s.bits | t.bits) >> p.size()) {
    throw ParameterError("covariance: configuration does not match N");
  }
  double shared = 0.0;
  for (int i = 0; i < p.levels(); ++i) {
    const std::uint64_t mask = low_mask(p.prefix_bits(i + 1));
    if ((s.bits & mask) != (t.bits & mask)) break;
    shared += p.a()[static_cast<std::size_t>(i)];
  }
  return 0.5 * p.size() * shared;
}

DisorderSample::DisorderSample(GremParams params, std::uint64_t seed, int cap)
    : params_(std::move(params)), seed_(seed) {
  if (params_.size() > cap) {
    throw CapacityError("N = " + std::to_string(params_.size()) +
                        " exceeds the enumeration cap of " + std::to_string(cap));
  }
  const int n = params_.levels();
  tables_.resize(static_cast<std::size_t>(n));
  level_scale_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    level_scale_[static_cast<std::size_t>(i)] =
        std::sqrt(0.5 * params_.size() * params_.a()[static_cast<std::size_t>(i)]);
    const int bits = params_.prefix_bits(i + 1);
    if (bits > kFlatEnergyCacheBits) continue;
    auto& table = tables_[static_cast<std::size_t>(i)];
    table.resize(std::size_t{1} << bits);
    for (std::size_t k = 0; k < table.size(); k += 2) {
      const auto [z0, z1] = normal_pair(seed_, k >> 1, static_cast<std::uint32_t>(i), 0);
      table[k] = z0;
      if (k + 1 < table.size()) table[k + 1] = z1;
    }
  }
  fill_flat();
}

DisorderSample::DisorderSample(GremParams params, std::vector<std::vector<double>> tables)
    : params_(std::move(params)), tables_(std::move(tables)) {
  const int n = params_.levels();
  if (tables_.size() != static_cast<std::size_t>(n)) {
    throw ParameterError("DisorderSample: need one table per level");
  }
  level_scale_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (tables_[static_cast<std::size_t>(i)].size() !=
        (std::size_t{1} << params_.prefix_bits(i + 1))) {
      throw ParameterError("DisorderSample: level table has the wrong size");
    }
    level_scale_[static_cast<std::size_t>(i)] =
        std::sqrt(0.5 * params_.size() * params_.a()[static_cast<std::size_t>(i)]);
  }
  fill_flat();
}

bool DisorderSample::level_materialized(int level) const noexcept {
  return !tables_[static_cast<std::size_t>(level)].empty();
}

double DisorderSample::gaussian(int level, std::uint64_t prefix) const {
  const auto& table = tables_[static_cast<std::size_t>(level)];
  if (!table.empty()) return table[prefix];
  return normal_at(seed_, static_cast<std::uint32_t>(level), prefix);
}

double DisorderSample::energy(SpinConfig s) const {
  if (s.bits >> params_.size()) throw ParameterError("energy: configuration does not match N");
  if (!flat_.empty()) return flat_[s.bits];
  double e = 0.0;
  for (int i = 0; i < params_.levels(); ++i) {
    e += level_scale_[static_cast<std::size_t>(i)] *
         gaussian(i, s.bits & low_mask(params_.prefix_bits(i + 1)));
  }
  return e;
}

void DisorderSample::energies(std::uint64_t first, std::span<double> out) const {
  if (out.empty()) return;
  if (first + out.size() > params_.state_count()) {
    throw ParameterError("energies: range exceeds the state space");
  }
  if (!flat_.empty()) {
    std::copy_n(flat_.begin() + static_cast<std::ptrdiff_t>(first), out.size(), out.begin());
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < params_.levels(); ++i) {
    const double scale = level_scale_[static_cast<std::size_t>(i)];
    const std::uint64_t mask = low_mask(params_.prefix_bits(i + 1));
    const auto& table = tables_[static_cast<std::size_t>(i)];
    if (!table.empty()) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += scale * table[(first + k) & mask];
      continue;
    }
    // Generated level: Box-Muller pairs cover indices (2j, 2j+1).
    std::uint64_t cached_pair = ~std::uint64_t{0};
    std::pair<double, double> pair{};
    for (std::size_t k = 0; k < out.size(); ++k) {
      const std::uint64_t idx = (first + k) & mask;
      if ((idx >> 1) != cached_pair) {
        cached_pair = idx >> 1;
        pair = normal_pair(seed_, cached_pair, static_cast<std::uint32_t>(i), 0);
      }
      out[k] += scale * ((idx & 1U) ? pair.second : pair.first);
    }
  }
}

void DisorderSample::fill_flat() {
  if (params_.size() > kFlatEnergyCacheBits) return;
  std::vector<double> flat(params_.state_count());
  flat_.clear();
  energies(0, flat);
  flat_ = std::move(flat);
}

DisorderSample sample_disorder(const GremParams& p, std::uint64_t seed, int cap) {
  return DisorderSample(p, seed, cap);
}

double energy(const DisorderSample& d, SpinConfig s) { return d.energy(s); }

}  // namespace remkit
