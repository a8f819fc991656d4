#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "rlp/dataset.hpp"
#include "rlp/matrix.hpp"

namespace rlp {

/// 8-bit grayscale raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> pixels;  ///< row-major, 0..255
};

/// Converts one flattened image row (values in [0, 1]) into a grayscale
/// raster. Multi-channel images are stored channel-major and are averaged.
GrayImage to_gray(std::span<const double> flat, const ImageShape& shape);

/// Side-by-side strip: originals on the top row, reconstructions underneath.
GrayImage comparison_strip(const Matrix& originals, const Matrix& reconstructions, const ImageShape& shape);

/// Plain (ASCII) portable graymap, maxval 255.
void write_pgm(std::ostream& os, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

}  // namespace rlp
