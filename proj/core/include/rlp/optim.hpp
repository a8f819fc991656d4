#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "rlp/model.hpp"

namespace rlp {

enum class OptimizerRule { sgd, sgd_nesterov, adam, adamw };

std::string_view to_string(OptimizerRule rule) noexcept;
OptimizerRule parse_optimizer_rule(std::string_view name);

struct OptimizerSpec {
  OptimizerRule rule = OptimizerRule::adam;
  double learning_rate = 1e-4;
  double momentum = 0.9;  ///< sgd_nesterov only; plain sgd has no momentum
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Coupled into the gradient (g += wd * p) for sgd, sgd_nesterov and adam;
  /// decoupled (p -= lr * wd * p) for adamw.
  double weight_decay = 0.0;
};

/// Owns the moment buffers for one model. Updates are applied to the flat
/// parameter vector in flatten() order.
class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const ModelParams& params);

  /// Applies one update. Throws NumericError if the gradient is not finite,
  /// ShapeError if it does not match the model.
  void step(ModelParams& params, const GradientBundle& grads);

  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] const OptimizerSpec& spec() const noexcept { return spec_; }

 private:
  OptimizerSpec spec_;
  std::vector<double> m_;  ///< momentum or first moment
  std::vector<double> v_;  ///< second moment
  std::size_t steps_ = 0;
};

}  // namespace rlp
