#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so results are identical across platforms and
// independent of how work is split between threads. The mixing function is
// the SplitMix64 finalizer; kRngVersion changes whenever the derivation
// changes, and is written into every output file.

#include <cstdint>
#include <string_view>

namespace qst {

inline constexpr std::string_view kRngVersion = "splitmix64-counter/1";

std::uint64_t mix64(std::uint64_t z);
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Sequential view over one (seed, stream) pair.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return counter_hash(seed_, stream_, counter_++); }
  double uniform() { return counter_uniform(seed_, stream_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by rejection, unbiased.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Stream id for a derived purpose, e.g. derive_stream(base, "filler").
std::uint64_t derive_stream(std::uint64_t base, std::string_view purpose);

}  // namespace qst
