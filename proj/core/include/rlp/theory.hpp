#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rlp {

enum class CheckStatus { pass, fail, not_applicable };

std::string_view to_string(CheckStatus s) noexcept;

struct CheckReport {
  std::string name;
  std::size_t candidates = 0;  ///< instances generated, including rejected ones
  std::size_t instances = 0;   ///< instances on which the property was asserted
  std::size_t violations = 0;
  double worst_margin = 0.0;  ///< smallest slack seen; negative means violated
  CheckStatus status = CheckStatus::not_applicable;
  std::string notes;
};

/// Loss non-negativity and the zero-at-truth property on random batches,
/// random small networks and random probes. Each trial asserts:
/// value >= 0; value == 0 (within 1e-12) when Hb = Yb; value > 0 for a
/// nonzero residual on a full-rank batch with a generic probe.
CheckReport check_nonnegativity_and_zero(std::size_t n_trials, std::uint64_t seed);

/// Convexity of the empirical RLP loss over affine hypotheses x -> aᵀx + b on
/// the Linear dataset with a fixed batch set and fixed probes:
/// L(tθ1 + (1-t)θ2) <= tL(θ1) + (1-t)L(θ2) + 1e-9 on n_trials random
/// segments, equality for θ1 = θ2, and descent L(θ - 1e-4 ∇L) <= L(θ) on 100
/// random points.
CheckReport check_convexity_linear(std::size_t n_trials, std::uint64_t seed);

/// Gradient-step dominance of RLP over MSE toward the optimum. Rejection
/// samples one-dimensional, bias-free linear problems y = θ* x whose feature
/// law has unit second moment (condition i), nonpositive features and
/// residuals (condition ii), and E[a_jk a_lk] >= 1/d² estimated by Monte
/// Carlo (condition iii). On each qualifying instance and for step sizes in
/// the convergent range, asserts |θ* - (θ - ε∇L)| <= |θ* - (θ - ε∇L0)|.
/// Reports not_applicable when no candidate qualifies within the budget.
CheckReport check_gradient_step_dominance(std::uint64_t seed, std::size_t budget = 200);

/// All reports as one JSON document.
std::string reports_to_json(const std::vector<CheckReport>& reports);
void write_reports(const std::filesystem::path& path, const std::vector<CheckReport>& reports);

}  // namespace rlp
