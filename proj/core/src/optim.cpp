#include "rlp/optim.hpp"

#include <cmath>
#include <string>

#include "rlp/error.hpp"

namespace rlp {

std::string_view to_string(OptimizerRule rule) noexcept {
  switch (rule) {
    case OptimizerRule::sgd: return "sgd";
    case OptimizerRule::sgd_nesterov: return "sgd_nesterov";
    case OptimizerRule::adam: return "adam";
    case OptimizerRule::adamw: return "adamw";
  }
  return "adam";
}

OptimizerRule parse_optimizer_rule(std::string_view name) {
  if (name == "sgd") return OptimizerRule::sgd;
  if (name == "sgd_nesterov") return OptimizerRule::sgd_nesterov;
  if (name == "adam") return OptimizerRule::adam;
  if (name == "adamw") return OptimizerRule::adamw;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(const OptimizerSpec& spec, const ModelParams& params) : spec_(spec) {
  if (!(spec.learning_rate >= 0.0) || !(spec.weight_decay >= 0.0)) {
    throw ConfigError("learning rate and weight decay must be non-negative");
  }
  if (!(spec.beta1 >= 0.0 && spec.beta1 < 1.0) || !(spec.beta2 >= 0.0 && spec.beta2 < 1.0) || !(spec.epsilon > 0.0)) {
    throw ConfigError("optimizer moment constants out of range");
  }
  const std::size_t n = params.parameter_count();
  m_.assign(n, 0.0);
  if (spec.rule == OptimizerRule::adam || spec.rule == OptimizerRule::adamw) v_.assign(n, 0.0);
}

void Optimizer::step(ModelParams& params, const GradientBundle& grads) {
  if (!grads.all_finite()) {
    throw NumericError("non-finite gradient at optimizer step " + std::to_string(steps_ + 1));
  }
  std::vector<double> p = flatten(params);
  const std::vector<double> g = flatten(grads);
  if (g.size() != p.size() || p.size() != m_.size()) throw ShapeError("optimizer: gradient does not match model");
  ++steps_;

  const double lr = spec_.learning_rate;
  const double wd = spec_.weight_decay;
  switch (spec_.rule) {
    case OptimizerRule::sgd:
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * (g[i] + wd * p[i]);
      break;
    case OptimizerRule::sgd_nesterov:
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] + wd * p[i];
        m_[i] = spec_.momentum * m_[i] + gi;
        p[i] -= lr * (gi + spec_.momentum * m_[i]);
      }
      break;
    case OptimizerRule::adam:
    case OptimizerRule::adamw: {
      const bool decoupled = spec_.rule == OptimizerRule::adamw;
      const double t = static_cast<double>(steps_);
      const double c1 = 1.0 - std::pow(spec_.beta1, t);
      const double c2 = 1.0 - std::pow(spec_.beta2, t);
      for (std::size_t i = 0; i < p.size(); ++i) {
        double gi = g[i];
        if (decoupled) {
          p[i] -= lr * wd * p[i];
        } else {
          gi += wd * p[i];
        }
        m_[i] = spec_.beta1 * m_[i] + (1.0 - spec_.beta1) * gi;
        v_[i] = spec_.beta2 * v_[i] + (1.0 - spec_.beta2) * gi * gi;
        p[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + spec_.epsilon);
      }
      break;
    }
  }
  for (double x : p) {
    if (!std::isfinite(x)) throw NumericError("parameters became non-finite at optimizer step " + std::to_string(steps_));
  }
  unflatten(p, params);
}

}  // namespace rlp
