#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace remkit {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). Pure
// function of (counter, key), so any draw can be regenerated independently
// of every other draw.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for child stream `index` of `seed`. Distinct indices give
// statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

// Uniform double in the open interval (0, 1) from 64 random bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Two standard normals from the Philox block at (key=seed, ctr=(lo, hi, a, b)).
// Box-Muller on the two 64-bit halves of the block.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index,
                                      std::uint32_t stream_a,
                                      std::uint32_t stream_b) noexcept;

// Standard normal at a fixed (seed, stream, index) coordinate.
inline double normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) noexcept {
  const auto [z0, z1] = normal_pair(seed, index >> 1, stream, 0);
  return (index & 1U) ? z1 : z0;
}

// Sequential stream over Philox blocks. Cheap to copy; copies replay the
// same sequence.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept { return to_open_unit(next_u64()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double exponential() noexcept;
  double normal() noexcept;

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int used_ = 2;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace remkit
