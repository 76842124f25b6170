#pragma once

// Counter-based random streams. A stream is identified by a 64-bit seed and
// a list of tags (trial index, purpose, edge id, ...); its output is a pure
// function of that identity, so results never depend on thread scheduling.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace treecycles {

/// Purpose tags for substreams. Values are part of the reproducibility
/// contract: changing them changes every sampled instance.
enum class Purpose : std::uint64_t {
  Bars = 0x42415253,
  Added = 0x41444445,
  Conditional = 0x434f4e44,
  Plugin = 0x504c4747,
  Shift = 0x53484654,
  RussoLhs = 0x5255534c,
  RussoRhs = 0x52555352,
  Eager = 0x45414752,
};

/// SplitMix64 finalizer; also used to fold tags into a stream identity.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// One Philox4x32-10 block. Exposed for known-answer testing.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key);

/// Seed for one Monte Carlo trial; printed on failures so a single value
/// replays the instance.
constexpr std::uint64_t trial_seed(std::uint64_t seed, Purpose purpose, std::uint64_t trial) {
  return combine(combine(seed, static_cast<std::uint64_t>(purpose)), trial);
}

/// Philox4x32-10 keyed by the seed, with the tag hash in the upper counter
/// words and a block counter in the lower ones. Satisfies
/// UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), unbiased. Requires bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Poisson(mean) by sequential inversion, chunked so large means never
  /// underflow exp(-mean).
  std::uint64_t poisson(double mean);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t tag_hash_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace treecycles
