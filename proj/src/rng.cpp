#include "grip/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace grip {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, counter[0], hi0, lo0);
    mulhilo(kPhiloxM1, counter[2], hi1, lo1);
    counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

RngStream::RngStream(std::uint64_t seed)
    : key_{mix64(seed), mix64(seed + kWeyl0)},
      counter_{0, 0, 0, 0},
      block_{0, 0, 0, 0},
      block_pos_(4),
      normal_cache_(0.0),
      have_normal_cache_(false) {}

RngStream RngStream::substream(std::uint64_t index) const {
  const std::uint64_t h = mix64(index);
  RngStream child;
  child.key_ = {mix64(key_[0] ^ h), mix64(key_[1] + h)};
  return child;
}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ == 4) {
    block_ = philox4x64(counter_, key_);
    for (int limb = 0; limb < 4; ++limb) {
      if (++counter_[limb] != 0) break;  // propagate the carry
    }
    block_pos_ = 0;
  }
  return block_[block_pos_++];
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_normal_cache_) {
    have_normal_cache_ = false;
    return normal_cache_;
  }
  const double u1 = uniform_open01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi_v<double> * u2;
  normal_cache_ = radius * std::sin(angle);
  have_normal_cache_ = true;
  return radius * std::cos(angle);
}

double RngStream::chi_square(int df) {
  if (df < 1) throw std::invalid_argument("chi_square: df must be >= 1");
  double sum = 0.0;
  for (int i = 0; i < df / 2; ++i) sum -= 2.0 * std::log(uniform_open01());
  if (df % 2 == 1) {
    const double z = normal();
    sum += z * z;
  }
  return sum;
}

double RngStream::student_t(int df) {
  const double z = normal();
  return z / std::sqrt(chi_square(df) / static_cast<double>(df));
}

}  // namespace grip
