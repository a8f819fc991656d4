#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include "rlp/dataset.hpp"
#include "rlp/error.hpp"
#include "rlp/image.hpp"

namespace rlp {
namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;
constexpr std::size_t kCifarSide = 32;
constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;
constexpr std::size_t kCifarRecord = 1 + kCifarPixels;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

bool is_cifar_file(const std::filesystem::path& p) {
  return p.extension() == ".bin" && std::filesystem::file_size(p) % kCifarRecord == 0;
}

std::vector<std::filesystem::path> cifar_files(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files) {
    if (std::filesystem::file_size(f) % kCifarRecord != 0) {
      throw FormatError(f.string() + " is not a CIFAR-10 binary batch (size not a multiple of 3073)");
    }
  }
  if (files.empty()) throw DataError("no CIFAR-10 batch files under " + path.string());
  return files;
}

Dataset load_idx_images(const std::vector<unsigned char>& bytes, std::size_t limit, const std::string& source) {
  const std::uint32_t magic = be32(bytes, 0);
  if (magic != kIdxImages) throw FormatError("IDX image magic mismatch in " + source);
  const std::size_t count = be32(bytes, 4);
  const std::size_t rows = be32(bytes, 8);
  const std::size_t cols = be32(bytes, 12);
  const std::size_t n = limit == 0 ? count : std::min(limit, count);
  const std::size_t d = rows * cols;
  if (16 + n * d > bytes.size()) throw FormatError("truncated IDX image payload in " + source);
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n * d; ++i) data[i] = static_cast<double>(bytes[16 + i]) / 255.0;
  Matrix x(n, d, std::move(data));
  Matrix y = x;
  return {std::move(x), std::move(y),
          DatasetMeta{.source = source, .image = ImageShape{.channels = 1, .height = rows, .width = cols}}};
}

}  // namespace

Dataset load_images(const std::filesystem::path& path, std::size_t limit) {
  if (!std::filesystem::exists(path)) throw DataError("image source " + path.string() + " does not exist");
  if (std::filesystem::is_regular_file(path) && !is_cifar_file(path)) {
    return load_idx_images(read_all(path), limit, path.filename().string());
  }

  std::vector<double> data;
  std::size_t n = 0;
  for (const auto& file : cifar_files(path)) {
    const auto bytes = read_all(file);
    for (std::size_t off = 0; off + kCifarRecord <= bytes.size(); off += kCifarRecord) {
      if (limit != 0 && n == limit) break;
      for (std::size_t p = 0; p < kCifarPixels; ++p) data.push_back(static_cast<double>(bytes[off + 1 + p]) / 255.0);
      ++n;
    }
  }
  Matrix x(n, kCifarPixels, std::move(data));
  Matrix y = x;
  return {std::move(x), std::move(y),
          DatasetMeta{.source = path.filename().string(),
                      .image = ImageShape{.channels = 3, .height = kCifarSide, .width = kCifarSide}}};
}

std::vector<std::uint8_t> load_image_labels(const std::filesystem::path& path, std::size_t limit) {
  if (std::filesystem::is_regular_file(path) && !is_cifar_file(path)) {
    const auto bytes = read_all(path);
    if (be32(bytes, 0) != kIdxLabels) throw FormatError("IDX label magic mismatch in " + path.string());
    const std::size_t count = be32(bytes, 4);
    const std::size_t n = limit == 0 ? count : std::min(limit, count);
    if (8 + n > bytes.size()) throw FormatError("truncated IDX label payload");
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
  }
  std::vector<std::uint8_t> labels;
  for (const auto& file : cifar_files(path)) {
    const auto bytes = read_all(file);
    for (std::size_t off = 0; off + kCifarRecord <= bytes.size(); off += kCifarRecord) {
      if (limit != 0 && labels.size() == limit) break;
      labels.push_back(bytes[off]);
    }
  }
  return labels;
}

GrayImage to_gray(std::span<const double> flat, const ImageShape& shape) {
  if (flat.size() != shape.pixels()) throw ShapeError("image row does not match its declared shape");
  GrayImage img{shape.width, shape.height, std::vector<int>(shape.width * shape.height)};
  const std::size_t plane = shape.width * shape.height;
  for (std::size_t p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (std::size_t c = 0; c < shape.channels; ++c) acc += flat[c * plane + p];
    const double v = std::clamp(acc / static_cast<double>(shape.channels), 0.0, 1.0);
    img.pixels[p] = static_cast<int>(std::lround(v * 255.0));
  }
  return img;
}

GrayImage comparison_strip(const Matrix& originals, const Matrix& reconstructions, const ImageShape& shape) {
  if (originals.rows() != reconstructions.rows() || originals.cols() != reconstructions.cols()) {
    throw ShapeError("comparison_strip: originals and reconstructions differ in shape");
  }
  const std::size_t count = originals.rows();
  GrayImage strip{count * shape.width, 2 * shape.height, std::vector<int>(count * shape.width * 2 * shape.height)};
  for (std::size_t k = 0; k < count; ++k) {
    const std::array<GrayImage, 2> tiles{to_gray(originals.row(k), shape), to_gray(reconstructions.row(k), shape)};
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t r = 0; r < shape.height; ++r) {
        for (std::size_t c = 0; c < shape.width; ++c) {
          strip.pixels[(t * shape.height + r) * strip.width + k * shape.width + c] = tiles[t].pixels[r * shape.width + c];
        }
      }
    }
  }
  return strip;
}

void write_pgm(std::ostream& os, const GrayImage& image) {
  os << "P2\n" << image.width << ' ' << image.height << "\n255\n";
  for (std::size_t r = 0; r < image.height; ++r) {
    for (std::size_t c = 0; c < image.width; ++c) {
      os << (c ? " " : "") << image.pixels[r * image.width + c];
    }
    os << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_pgm(out, image);
}

}  // namespace rlp
