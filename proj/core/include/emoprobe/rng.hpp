#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace emoprobe {

// SplitMix64 used in counter mode: output n of stream (seed, stream_id) is
// mix64(key + (n + 1) * golden_gamma) with key = mix64(seed ^ mix64(stream_id)).
// Every draw is a pure function of (seed, stream_id, n), so synthetic data
// and training order are identical on every platform. Distribution helpers
// are implemented here rather than taken from <random>, whose distributions
// are implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform integer in [0, bound); bound > 0. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

// Stream ids used by the library. Keeping them here avoids accidental reuse.
namespace rng_stream {
inline constexpr std::uint64_t kSyntheticMeans = 1;
inline constexpr std::uint64_t kSyntheticEvents = 2;
inline constexpr std::uint64_t kSyntheticAssignments = 3;
inline constexpr std::uint64_t kProbeInit = 10;
inline constexpr std::uint64_t kTrainShuffle = 11;
}  // namespace rng_stream

}  // namespace emoprobe
