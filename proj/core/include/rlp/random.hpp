#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace rlp {

/// Independent random streams, one per purpose. A stream id is mixed into the
/// key so that, for example, changing the batch sampler never perturbs the
/// dataset draws for the same user seed.
enum class Stream : std::uint64_t {
  dataset = 1,
  split = 2,
  noise = 3,
  init = 4,
  batching = 5,
  probe = 6,
  mixup = 7,
  shuffle = 8,
  theory = 9,
};

/// Counter-based SplitMix64 generator.
///
/// Output i of a generator with key k is mix64(k + (i + 1) * golden), where
/// mix64 is the SplitMix64 finalizer and k = mix64(seed ^ mix64(stream, substream)).
/// The sequence depends only on (seed, stream, substream, i), which makes it
/// portable to any language with 64-bit unsigned arithmetic. All
/// distributions below are implemented here rather than through <random> so
/// their outputs are identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) without modulo bias. n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) noexcept;
  /// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    // Fisher-Yates, high index first.
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace rlp
