#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rlp/batching.hpp"
#include "rlp/dataset.hpp"
#include "rlp/lstsq.hpp"
#include "rlp/matrix.hpp"
#include "rlp/model.hpp"
#include "rlp/random.hpp"

namespace rlp {

struct LossOutput {
  double value = 0.0;
  Matrix dL_dH;  ///< same shape as the evaluated outputs
};

/// Mean over rows of the squared Euclidean row error; dL/dH = 2(H - Y)/n.
LossOutput mse(const Matrix& h, const Matrix& y);

/// Softmax cross-entropy on logits H against one-hot (or soft) targets Y,
/// averaged over rows.
LossOutput cross_entropy(const Matrix& h, const Matrix& y);

/// Pseudo-inverse of one batch's feature matrix. It depends only on Xb, so a
/// fixed batch can reuse it across epochs.
struct BatchProjector {
  Matrix a;  ///< d x M
  std::size_t rank = 0;
};

BatchProjector make_projector(const Matrix& xb, double rtol = kDefaultRtol);

/// RLP loss of one batch at one probe point.
///
/// With R = Yb - Hb and D the least-squares coefficients of R on Xb, the value
/// is ||Dᵀx||². Writing w = Aᵀx and v = Dᵀx = Rᵀw, the sensitivity is
/// dL/dHb = -2 w vᵀ.
///
/// This overload solves the least-squares problem for R directly. `batch` is
/// only used to name the batch in error messages.
LossOutput rlp_batch(const Matrix& xb, const Matrix& yb, const Matrix& hb, std::span<const double> probe,
                     std::size_t batch = 0);

/// Same value and sensitivity through a precomputed projector (A·R instead of
/// a fresh solve).
LossOutput rlp_batch(const BatchProjector& proj, const Matrix& yb, const Matrix& hb, std::span<const double> probe,
                     std::size_t batch = 0);

/// Column sums of a batch, the probe used by the mixup form of the loss.
std::vector<double> row_sum(const Matrix& xb);

/// Convex combination lambda * a + (1 - lambda) * b of two equally shaped
/// batches, applied to features and labels alike.
std::pair<Matrix, Matrix> mixup_pairs(const Matrix& xa, const Matrix& ya, const Matrix& xb, const Matrix& yb,
                                      double lambda);

struct MixupEvaluation {
  LossOutput loss;
  ForwardCache cache;  ///< model evaluated on the mixed features
  Matrix x_mix;
  Matrix y_mix;
};

/// Mixup-augmented RLP loss: the two batches are mixed with weight lambda, the
/// model is evaluated on the mixed features, and the value is ||Dᵀs||² where
/// s is the sum of the mixed batch's own rows. Returns nullopt when the two
/// batches differ in size (the pair is skipped).
std::optional<MixupEvaluation> rlp_mixup_batch(const Matrix& xa, const Matrix& ya, const Matrix& xb, const Matrix& yb,
                                               double lambda, const ModelParams& model, std::size_t batch = 0);

/// Index of a probe row for `batch`: uniform over [0, n), redrawn until it is
/// not one of the batch rows whenever n exceeds the batch size.
std::size_t draw_probe(Rng& rng, std::size_t n, std::span<const std::size_t> batch);

/// Fixed evaluation harness for the RLP metric on one dataset: a balanced
/// batch set, its projectors, and one probe per batch, all derived from seed.
class RlpEvaluator {
 public:
  RlpEvaluator(const Dataset& ds, std::size_t m, std::size_t k, std::uint64_t seed);

  /// Mean RLP value of the model over the batch set.
  [[nodiscard]] double operator()(const ModelParams& model) const;
  /// Same, from predictions already computed for every row of the dataset.
  [[nodiscard]] double from_predictions(const Matrix& predictions) const;

  [[nodiscard]] std::size_t batch_count() const noexcept { return batches_.count(); }

 private:
  Matrix features_;
  BatchSet batches_;
  std::vector<BatchProjector> projectors_;
  std::vector<std::vector<double>> probes_;
  std::vector<Matrix> labels_;
};

/// Mean of rlp_batch over a fresh balanced batch set of K batches of size M
/// on ds, with fresh probes. K is capped at the number of distinct batches.
double rlp_metric(const ModelParams& model, const Dataset& ds, std::size_t m, std::size_t k, std::uint64_t seed);

}  // namespace rlp
