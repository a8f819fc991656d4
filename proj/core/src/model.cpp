#include "rlp/model.hpp"

#include <cmath>
#include <string>

#include "rlp/error.hpp"
#include "rlp/random.hpp"

namespace rlp {
namespace {

double activate(Activation a, double z) noexcept {
  switch (a) {
    case Activation::none: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// Derivative in terms of the pre-activation z and the output a = act(z).
double activate_grad(Activation act, double z, double a) noexcept {
  switch (act) {
    case Activation::none: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return a * (1.0 - a);
    case Activation::tanh: return 1.0 - a * a;
  }
  return 1.0;
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "none";
}

Activation parse_activation(std::string_view name) {
  if (name == "none") return Activation::none;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::size_t ModelParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void ModelParams::validate() const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].bias.size() != layers[k].out()) {
      throw ShapeError("layer " + std::to_string(k) + " bias length does not match its output width");
    }
    if (k > 0 && layers[k].in() != layers[k - 1].out()) {
      throw ShapeError("layer " + std::to_string(k) + " input width " + std::to_string(layers[k].in()) +
                       " does not match previous output " + std::to_string(layers[k - 1].out()));
    }
  }
}

GradientBundle GradientBundle::zeros_like(const ModelParams& params) {
  GradientBundle g;
  for (const auto& l : params.layers) {
    g.weight.emplace_back(l.out(), l.in());
    g.bias.emplace_back(l.out(), 0.0);
  }
  return g;
}

void GradientBundle::accumulate(const GradientBundle& other, double s) {
  if (other.weight.size() != weight.size()) throw ShapeError("gradient bundles differ in layer count");
  for (std::size_t k = 0; k < weight.size(); ++k) {
    auto w = weight[k].values();
    auto ow = other.weight[k].values();
    if (w.size() != ow.size() || bias[k].size() != other.bias[k].size()) {
      throw ShapeError("gradient bundles differ in layer shape");
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * ow[i];
    for (std::size_t i = 0; i < bias[k].size(); ++i) bias[k][i] += s * other.bias[k][i];
  }
  loss += s * other.loss;
}

void GradientBundle::scale(double s) {
  for (auto& w : weight)
    for (double& v : w.values()) v *= s;
  for (auto& b : bias)
    for (double& v : b) v *= s;
  loss *= s;
}

bool GradientBundle::all_finite() const noexcept {
  for (const auto& w : weight)
    if (!w.all_finite()) return false;
  for (const auto& b : bias)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return std::isfinite(loss);
}

ModelParams build_mlp(std::span<const std::size_t> widths, std::span<const Activation> activations,
                      std::uint64_t seed) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw ConfigError("build_mlp: need one activation per layer and at least two widths");
  }
  ModelParams p;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::size_t in = widths[k];
    const std::size_t out = widths[k + 1];
    if (in == 0 || out == 0) throw ConfigError("build_mlp: layer widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Rng rng(seed, Stream::init, k);
    Layer layer{Matrix(out, in), std::vector<double>(out), activations[k]};
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

ModelParams build_regression_net(std::size_t d, std::size_t hidden, std::uint64_t seed) {
  const std::size_t widths[] = {d, hidden, 1};
  const Activation acts[] = {Activation::relu, Activation::none};
  return build_mlp(widths, acts, seed);
}

ModelParams build_autoencoder(std::size_t d, std::size_t latent, std::uint64_t seed) {
  const std::size_t widths[] = {d, latent, d};
  const Activation acts[] = {Activation::relu, Activation::sigmoid};
  return build_mlp(widths, acts, seed);
}

ModelParams build_moons_classifier(std::uint64_t seed, bool sigmoid_head) {
  const std::size_t widths[] = {2, 50, 50, 2};
  const Activation acts[] = {Activation::relu, Activation::relu, sigmoid_head ? Activation::sigmoid : Activation::none};
  return build_mlp(widths, acts, seed);
}

ModelParams build_linear(std::size_t d, std::size_t c, std::uint64_t seed) {
  const std::size_t widths[] = {d, c};
  const Activation acts[] = {Activation::none};
  return build_mlp(widths, acts, seed);
}

ForwardCache forward(const ModelParams& params, const Matrix& x) {
  if (params.layers.empty()) throw ShapeError("forward: model has no layers");
  if (x.cols() != params.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(params.input_dim()));
  }
  ForwardCache cache;
  cache.inputs.reserve(params.layers.size());
  cache.pre_activations.reserve(params.layers.size());
  Matrix current = x;
  for (const auto& layer : params.layers) {
    Matrix z = matmul_nt(current, layer.weight);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto row = z.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
    }
    Matrix a = z;
    for (double& v : a.values()) v = activate(layer.activation, v);
    cache.inputs.push_back(std::move(current));
    cache.pre_activations.push_back(std::move(z));
    current = std::move(a);
  }
  if (!current.all_finite()) throw NumericError("forward: non-finite model output");
  cache.output = std::move(current);
  return cache;
}

Matrix predict(const ModelParams& params, const Matrix& x) { return forward(params, x).output; }

GradientBundle backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_dH) {
  const std::size_t L = params.layers.size();
  if (cache.inputs.size() != L || cache.pre_activations.size() != L) {
    throw ShapeError("backward: cache does not belong to this model");
  }
  if (dL_dH.rows() != cache.output.rows() || dL_dH.cols() != cache.output.cols()) {
    throw ShapeError("backward: sensitivity shape does not match model output");
  }
  GradientBundle g = GradientBundle::zeros_like(params);
  Matrix upstream = dL_dH;
  for (std::size_t k = L; k-- > 0;) {
    const Layer& layer = params.layers[k];
    const Matrix& z = cache.pre_activations[k];
    const Matrix& a = k + 1 < L ? cache.inputs[k + 1] : cache.output;
    Matrix dz = std::move(upstream);
    auto dzv = dz.values();
    auto zv = z.values();
    auto av = a.values();
    for (std::size_t i = 0; i < dzv.size(); ++i) dzv[i] *= activate_grad(layer.activation, zv[i], av[i]);

    g.weight[k] = matmul_tn(dz, cache.inputs[k]);
    for (std::size_t i = 0; i < dz.rows(); ++i) {
      const auto row = dz.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) g.bias[k][j] += row[j];
    }
    if (k > 0) upstream = matmul(dz, layer.weight);
  }
  return g;
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    out.insert(out.end(), l.weight.values().begin(), l.weight.values().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

std::vector<double> flatten(const GradientBundle& grads) {
  std::vector<double> out;
  for (std::size_t k = 0; k < grads.weight.size(); ++k) {
    out.insert(out.end(), grads.weight[k].values().begin(), grads.weight[k].values().end());
    out.insert(out.end(), grads.bias[k].begin(), grads.bias[k].end());
  }
  return out;
}

void unflatten(std::span<const double> values, ModelParams& params) {
  if (values.size() != params.parameter_count()) throw ShapeError("unflatten: parameter count mismatch");
  std::size_t pos = 0;
  for (auto& l : params.layers) {
    for (double& w : l.weight.values()) w = values[pos++];
    for (double& b : l.bias) b = values[pos++];
  }
}

}  // namespace rlp
