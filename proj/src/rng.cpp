#include "remkit/rng.hpp"

#include <cmath>
#include <numbers>

namespace remkit {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::pair<double, double> box_muller(std::uint64_t b0, std::uint64_t b1) {
  const double r = std::sqrt(-2.0 * std::log(to_open_unit(b0)));
  const double theta = 2.0 * std::numbers::pi * to_open_unit(b1);
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index,
                                      std::uint32_t stream_a, std::uint32_t stream_b) noexcept {
  const PhiloxCounter out = philox4x32(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream_a,
       stream_b},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t b0 = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  const std::uint64_t b1 = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  return box_muller(b0, b1);
}

void CounterRng::refill() noexcept {
  const PhiloxCounter out = philox4x32(
      {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      key_);
  ++block_;
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  used_ = 0;
}

std::uint64_t CounterRng::next_u64() noexcept {
  if (used_ == 2) refill();
  return buffer_[used_++];
}

double CounterRng::exponential() noexcept { return -std::log(uniform()); }

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const std::uint64_t b0 = next_u64();
  const std::uint64_t b1 = next_u64();
  const auto [z0, z1] = box_muller(b0, b1);
  spare_normal_ = z1;
  has_spare_ = true;
  return z0;
}

}  // namespace remkit
