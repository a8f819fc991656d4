#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace rlp {

/// K index lists of length M into a dataset of n rows. Batches are pairwise
/// distinct as sets; within a batch the drawn order is kept.
struct BatchSet {
  std::vector<std::vector<std::size_t>> batches;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t count() const noexcept { return batches.size(); }
  [[nodiscard]] std::size_t batch_size() const noexcept { return batches.empty() ? 0 : batches.front().size(); }
};

/// Number of distinct M-subsets of n items, saturating at `cap`.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t m, std::uint64_t cap);

/// Balanced unique-batch sampler.
///
/// Repeatedly shuffles 0..n-1 and cuts the permutation into consecutive
/// slices of M, keeping each slice whose index set has not been seen, until K
/// batches exist. When M does not divide n, the leftover tail of a pass is
/// topped up with indices from the front of the same permutation, so every
/// pass touches every index and K >= ceil(n / M) guarantees full coverage.
///
/// Throws ConfigError for M = 0, M > n or K = 0, and ExhaustionError when K
/// exceeds C(n, M) or 1000 consecutive slices are rejected as duplicates.
BatchSet balanced_batches(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed);

inline constexpr std::size_t kDuplicateRetryBudget = 1000;

/// One batch per line, indices separated by spaces.
void write_batches(std::ostream& os, const BatchSet& set);
void write_batches(const std::filesystem::path& path, const BatchSet& set);

}  // namespace rlp
