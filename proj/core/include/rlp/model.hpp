#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rlp/matrix.hpp"

namespace rlp {

enum class Activation : std::uint32_t { none = 0, relu = 1, sigmoid = 2, tanh = 3 };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view name);

/// Affine map followed by an elementwise activation: a = act(x Wᵀ + b).
struct Layer {
  Matrix weight;             ///< out x in
  std::vector<double> bias;  ///< out
  Activation activation = Activation::none;

  [[nodiscard]] std::size_t in() const noexcept { return weight.cols(); }
  [[nodiscard]] std::size_t out() const noexcept { return weight.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ModelParams {
  std::vector<Layer> layers;

  [[nodiscard]] std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().in(); }
  [[nodiscard]] std::size_t output_dim() const noexcept { return layers.empty() ? 0 : layers.back().out(); }
  [[nodiscard]] std::size_t parameter_count() const noexcept;

  /// Throws ShapeError if consecutive layers do not chain or a bias length
  /// disagrees with its weight.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Gradient with the same layout as ModelParams plus the loss it belongs to.
struct GradientBundle {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  double loss = 0.0;

  static GradientBundle zeros_like(const ModelParams& params);
  /// this += s * other (loss included).
  void accumulate(const GradientBundle& other, double s = 1.0);
  void scale(double s);
  [[nodiscard]] bool all_finite() const noexcept;
};

/// Layer inputs and pre-activations recorded by forward().
struct ForwardCache {
  std::vector<Matrix> inputs;           ///< inputs[k] is what layer k consumed
  std::vector<Matrix> pre_activations;  ///< z = x Wᵀ + b per layer
  Matrix output;
};

/// Layer sizes/activations initialised uniformly on ±1/sqrt(fan_in) (weights
/// and biases), seeded through the init stream.
ModelParams build_mlp(std::span<const std::size_t> widths, std::span<const Activation> activations, std::uint64_t seed);

/// d -> hidden (relu) -> 1.
ModelParams build_regression_net(std::size_t d, std::size_t hidden, std::uint64_t seed);
/// d -> latent (relu) -> d (sigmoid).
ModelParams build_autoencoder(std::size_t d, std::size_t latent, std::uint64_t seed);
/// 2 -> 50 (relu) -> 50 (relu) -> 2, with a sigmoid on the output when
/// `sigmoid_head` is set (used with the RLP loss).
ModelParams build_moons_classifier(std::uint64_t seed, bool sigmoid_head);
/// Single affine layer d -> c with no activation.
ModelParams build_linear(std::size_t d, std::size_t c, std::uint64_t seed);

ForwardCache forward(const ModelParams& params, const Matrix& x);
Matrix predict(const ModelParams& params, const Matrix& x);

/// Reverse-mode gradients of a scalar loss whose sensitivity to the model
/// output is dL_dH. The ReLU derivative at 0 is taken as 0.
GradientBundle backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_dH);

/// Parameters in layer order, weights row-major followed by biases.
std::vector<double> flatten(const ModelParams& params);
std::vector<double> flatten(const GradientBundle& grads);
void unflatten(std::span<const double> values, ModelParams& params);

// Checkpoints: binary payload plus a JSON manifest next to it.
//
//   bytes 0..3   "RLPM"
//   u32          format version (1)
//   u32          layer count L
//   L x (u32 in, u32 out, u32 activation)
//   f64 values   flatten(params), little-endian
//
// All integers are little-endian.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);
std::filesystem::path manifest_path_for(const std::filesystem::path& checkpoint);

}  // namespace rlp
