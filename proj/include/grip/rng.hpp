#pragma once

#include <array>
#include <cstdint>

namespace grip {

// Philox 4x64 block cipher with 10 rounds: maps a 256-bit counter and a
// 128-bit key to four 64-bit words. Counter-based generation gives random
// access into the stream, so substreams can be derived without coordination
// and parallel consumers stay reproducible.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// 64-bit finalizer (splitmix64); bijective, used to spread seeds and
// substream indices over the key space.
std::uint64_t mix64(std::uint64_t x);

// One logical stream of pseudo-random numbers. Streams are cheap value
// types. substream(i) derives a stream whose key is a hash of the parent
// key and i, so distinct indices give statistically independent streams
// and the parent is left untouched.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01();
  // Uniform on (0, 1); never returns 0, safe as a log argument.
  double uniform_open01();
  // Standard normal via Box-Muller; the paired variate is cached.
  double normal();
  // Chi-square with df >= 1 degrees of freedom (exact, via exponentials
  // plus one squared normal for odd df).
  double chi_square(int df);
  // Student t with df >= 1 degrees of freedom.
  double student_t(int df);

  std::array<std::uint64_t, 2> key() const { return key_; }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_;
  int block_pos_;  // 4 marks an exhausted buffer
  double normal_cache_;
  bool have_normal_cache_;
};

}  // namespace grip
