#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rdfleet {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// SplitMix64 finalizer (Stafford "Mix13" constants). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of realization `index` in an ensemble with base seed `base`:
///   mix64(mix64(base) + (index + 1) * 0x9E3779B97F4A7C15)
/// For fixed `base` this is a bijection of `index`, so distinct indices never collide;
/// for fixed `index` it is a bijection of `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// A seedable, splittable random stream backed by Philox4x32-10.
///
/// The key is the 64-bit seed; the counter holds a 64-bit block index in its
/// low words and a 64-bit stream id in its high words, so `RandomStream(seed, k)`
/// for different k are non-overlapping substreams. Output is identical on
/// every platform.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;

  /// Uniform double in (0, 1], 53-bit resolution.
  double uniform_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) noexcept;

  /// Uniform integer in [0, n), n > 0 (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent substream `index` under the same key.
  RandomStream split(std::uint64_t index) const noexcept { return RandomStream(seed_, mix64(stream_ ^ mix64(index + 1))); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace rdfleet
