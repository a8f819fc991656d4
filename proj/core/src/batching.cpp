#include "rlp/batching.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>

#include "rlp/error.hpp"
#include "rlp/random.hpp"

namespace rlp {
namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t m, std::uint64_t cap) {
  if (m > n) return 0;
  m = std::min(m, n - m);
  // result * (n - m + i) / i stays integral at every step.
  u128 result = 1;
  for (std::uint64_t i = 1; i <= m; ++i) {
    result = result * (n - m + i) / i;
    if (result >= cap) return cap;
  }
  return static_cast<std::uint64_t>(result);
}

BatchSet balanced_batches(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
  if (m == 0 || m > n) {
    throw ConfigError("batch size M=" + std::to_string(m) + " must satisfy 1 <= M <= n=" + std::to_string(n));
  }
  if (k == 0) throw ConfigError("batch count K must be positive");
  if (binomial_capped(n, m, k) < k) {
    throw ExhaustionError("cannot draw " + std::to_string(k) + " distinct batches of size " + std::to_string(m) +
                          " from " + std::to_string(n) + " items");
  }

  BatchSet out{.batches = {}, .n = n, .seed = seed};
  out.batches.reserve(k);
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, Stream::batching);
  std::size_t rejected_in_a_row = 0;

  auto offer = [&](std::vector<std::size_t> batch) {
    auto key = batch;
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) {
      out.batches.push_back(std::move(batch));
      rejected_in_a_row = 0;
    } else if (++rejected_in_a_row >= kDuplicateRetryBudget) {
      throw ExhaustionError("gave up after " + std::to_string(kDuplicateRetryBudget) +
                            " consecutive duplicate batches (have " + std::to_string(out.batches.size()) + " of " +
                            std::to_string(k) + ")");
    }
  };

  while (out.batches.size() < k) {
    rng.shuffle(std::span(order));
    const std::size_t full = n / m;
    for (std::size_t s = 0; s < full && out.batches.size() < k; ++s) {
      offer({order.begin() + static_cast<std::ptrdiff_t>(s * m), order.begin() + static_cast<std::ptrdiff_t>((s + 1) * m)});
    }
    const std::size_t tail = n - full * m;
    if (tail > 0 && out.batches.size() < k) {
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(full * m), order.end());
      batch.insert(batch.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m - tail));
      offer(std::move(batch));
    }
  }
  return out;
}

void write_batches(std::ostream& os, const BatchSet& set) {
  for (const auto& batch : set.batches) {
    for (std::size_t i = 0; i < batch.size(); ++i) os << (i ? " " : "") << batch[i];
    os << '\n';
  }
}

void write_batches(const std::filesystem::path& path, const BatchSet& set) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_batches(out, set);
}

}  // namespace rlp
