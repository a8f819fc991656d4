#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlp/matrix.hpp"

namespace rlp {

/// One evaluation point of a training run.
struct MetricsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_mse = 0.0;
  double test_rlp = 0.0;
  std::optional<double> accuracy;  ///< classification only
  std::optional<double> macro_f1;  ///< classification only
  double wall_seconds = 0.0;
  std::string config_hash;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr std::string_view kMetricsHeader =
    "epoch,train_loss,test_mse,test_rlp,accuracy,macro_f1,wall_seconds,config_hash";

/// Writes the header followed by one row per record. Reals use the shortest
/// representation that round-trips.
void write_metrics(std::ostream& os, const std::vector<MetricsRecord>& records);
void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
std::string format_metrics_row(const MetricsRecord& r);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

/// Row-wise argmax.
std::vector<std::size_t> argmax_rows(const Matrix& m);
double accuracy(const Matrix& predictions, const Matrix& one_hot);
/// Unweighted mean of per-class F1 over classes present in truth or prediction.
double macro_f1(const Matrix& predictions, const Matrix& one_hot);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::string hash_hex(std::uint64_t h);

}  // namespace rlp
