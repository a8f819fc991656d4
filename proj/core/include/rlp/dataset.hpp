#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlp/matrix.hpp"

namespace rlp {

struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;

  [[nodiscard]] std::size_t pixels() const noexcept { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

struct DatasetMeta {
  std::string source;
  std::uint64_t seed = 0;
  bool standardized = false;
  std::vector<double> feature_mean;    ///< filled when standardized
  std::vector<double> feature_stddev;  ///< filled when standardized; 1.0 for unscaled columns
  std::optional<ImageShape> image;     ///< set for image datasets
};

/// Feature matrix (N x d) paired with a label matrix (N x c).
struct Dataset {
  Matrix features;
  Matrix labels;
  DatasetMeta meta;

  Dataset() = default;
  Dataset(Matrix features, Matrix labels, DatasetMeta meta = {});

  [[nodiscard]] std::size_t size() const noexcept { return features.rows(); }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return features.cols(); }
  [[nodiscard]] std::size_t label_dim() const noexcept { return labels.cols(); }
  [[nodiscard]] bool empty() const noexcept { return size() == 0; }

  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
};

// Synthetic generators. All are pure functions of their arguments.

/// Five U[0,1) features, y = 0.5x1 + 1.5x2 + 2.5x3 + 3.5x4 + 4.5x5.
Dataset gen_linear(std::size_t n, std::uint64_t seed);
double linear_target(std::span<const double> x);

/// Seven U[0,1) features, y = x1 + x2² + x3³ + x4⁴ + x5⁵ + exp(x6) + sin(x7).
Dataset gen_nonlinear(std::size_t n, std::uint64_t seed);
double nonlinear_target(std::span<const double> x);

/// Two interleaved half circles with isotropic Gaussian jitter; one-hot labels.
/// Class 0 lies on the unit upper half circle, class 1 on the lower half circle
/// centred at (1, 0.5). Rows are shuffled.
Dataset gen_moons(std::size_t n, double noise_level, std::uint64_t seed);

// Loaders.

/// Reads a delimited table with one header line. The delimiter is a comma; a
/// header containing ';' and no ',' switches to semicolons. Column names may
/// be quoted. Several files with the same header are concatenated in order.
Dataset load_table(std::span<const std::filesystem::path> paths, std::span<const std::string> feature_columns,
                   const std::string& label_column);
Dataset load_table(const std::filesystem::path& path, std::span<const std::string> feature_columns,
                   const std::string& label_column);

/// Loads images as flattened pixel vectors scaled into [0, 1], with labels
/// equal to the features (reconstruction target).
///
/// `path` may be an MNIST IDX image file (magic 0x00000803), a CIFAR-10
/// binary batch file, or a directory of CIFAR-10 batch files. `limit` = 0
/// loads everything.
Dataset load_images(const std::filesystem::path& path, std::size_t limit = 0);

/// Class labels stored next to images: IDX label file (magic 0x00000801) or the
/// label bytes of CIFAR-10 records.
std::vector<std::uint8_t> load_image_labels(const std::filesystem::path& path, std::size_t limit = 0);

/// Writes features then labels as a comma-separated table with header
/// x1..xd,y1..yc (or `y` when c = 1).
void write_table(std::ostream& os, const Dataset& ds);
void write_table(const std::filesystem::path& path, const Dataset& ds);

// Transforms.

struct Standardized {
  Dataset train;
  std::vector<Dataset> others;
};

/// Subtracts the training column means and divides by training column
/// standard deviations (population). Columns with stddev < 1e-12 are centred
/// but left unscaled. The same transform is applied to `others`.
Standardized standardize(const Dataset& train, std::span<const Dataset> others = {});

/// Inverse of standardize using the stored mean and stddev.
Matrix unstandardize_features(const Dataset& ds);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  ///< ascending
  std::vector<std::size_t> test_indices;   ///< ascending
};

/// Random partition with round(fraction * N) training rows.
Split split_random(const Dataset& ds, double fraction, std::uint64_t seed);
/// Random partition with exactly `train_count` training rows.
Split split_count(const Dataset& ds, std::size_t train_count, std::uint64_t seed);

/// Region of interest: rows with |x_j - mu_j| < 0.5 sigma_j for every column,
/// where mu and sigma are the column mean and population stddev of `features`.
std::vector<bool> roi_mask(const Matrix& features);

/// Biased split: an ROI row joins train with probability gamma, any other row
/// with probability 1 - gamma, independently. Throws DegenerateSplitError when
/// either side ends up empty.
Split split_biased(const Dataset& ds, double gamma, std::uint64_t seed);

/// x' = x + beta * z with z ~ N(0, I) per coordinate. Labels are untouched.
Dataset add_noise(const Dataset& train, double beta, std::uint64_t seed);

}  // namespace rlp
