#include "rlp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlp/error.hpp"

namespace rlp {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// value = ||Rᵀw||², dL/dH = -2 w (Rᵀw)ᵀ.
LossOutput rlp_from_weights(const Matrix& residual, std::span<const double> w, std::size_t batch) {
  const std::vector<double> v = matvec_t(residual, w);
  double value = 0.0;
  for (double x : v) value += x * x;
  if (!std::isfinite(value)) throw NumericError("non-finite RLP loss in batch " + std::to_string(batch));
  Matrix grad(residual.rows(), residual.cols());
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    for (std::size_t j = 0; j < grad.cols(); ++j) grad(i, j) = -2.0 * w[i] * v[j];
  }
  return {value, std::move(grad)};
}

}  // namespace

LossOutput mse(const Matrix& h, const Matrix& y) {
  require_same_shape(h, y, "mse");
  if (h.rows() == 0) throw ShapeError("mse: no rows");
  const double n = static_cast<double>(h.rows());
  Matrix grad(h.rows(), h.cols());
  double total = 0.0;
  auto hv = h.values();
  auto yv = y.values();
  auto gv = grad.values();
  for (std::size_t i = 0; i < hv.size(); ++i) {
    const double r = hv[i] - yv[i];
    total += r * r;
    gv[i] = 2.0 * r / n;
  }
  return {total / n, std::move(grad)};
}

LossOutput cross_entropy(const Matrix& h, const Matrix& y) {
  require_same_shape(h, y, "cross_entropy");
  if (h.rows() == 0) throw ShapeError("cross_entropy: no rows");
  const double n = static_cast<double>(h.rows());
  Matrix grad(h.rows(), h.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const auto logits = h.row(i);
    const double peak = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - peak);
    const double log_z = peak + std::log(z);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double p = std::exp(logits[j] - log_z);
      total -= y(i, j) * (logits[j] - log_z);
      grad(i, j) = (p - y(i, j)) / n;
    }
  }
  return {total / n, std::move(grad)};
}

BatchProjector make_projector(const Matrix& xb, double rtol) {
  auto res = projection_operator(xb, rtol);
  return {std::move(res.solution), res.rank};
}

LossOutput rlp_batch(const Matrix& xb, const Matrix& yb, const Matrix& hb, std::span<const double> probe,
                     std::size_t batch) {
  require_same_shape(yb, hb, "rlp_batch");
  if (xb.rows() != yb.rows()) throw ShapeError("rlp_batch: features and labels differ in row count");
  if (probe.size() != xb.cols()) throw ShapeError("rlp_batch: probe length does not match feature dimension");
  const Matrix residual = sub(yb, hb);
  const Matrix d = least_squares_project(xb, residual).solution;
  const std::vector<double> v = matvec_t(d, probe);
  double value = 0.0;
  for (double x : v) value += x * x;
  if (!std::isfinite(value)) throw NumericError("non-finite RLP loss in batch " + std::to_string(batch));

  const BatchProjector proj = make_projector(xb);
  const std::vector<double> w = matvec_t(proj.a, probe);
  Matrix grad(hb.rows(), hb.cols());
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    for (std::size_t j = 0; j < grad.cols(); ++j) grad(i, j) = -2.0 * w[i] * v[j];
  }
  return {value, std::move(grad)};
}

LossOutput rlp_batch(const BatchProjector& proj, const Matrix& yb, const Matrix& hb, std::span<const double> probe,
                     std::size_t batch) {
  require_same_shape(yb, hb, "rlp_batch");
  if (proj.a.cols() != yb.rows()) throw ShapeError("rlp_batch: projector and labels differ in batch size");
  if (probe.size() != proj.a.rows()) throw ShapeError("rlp_batch: probe length does not match feature dimension");
  const std::vector<double> w = matvec_t(proj.a, probe);
  return rlp_from_weights(sub(yb, hb), w, batch);
}

std::vector<double> row_sum(const Matrix& xb) {
  std::vector<double> s(xb.cols(), 0.0);
  for (std::size_t i = 0; i < xb.rows(); ++i) {
    const auto row = xb.row(i);
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += row[j];
  }
  return s;
}

std::pair<Matrix, Matrix> mixup_pairs(const Matrix& xa, const Matrix& ya, const Matrix& xb, const Matrix& yb,
                                      double lambda) {
  require_same_shape(xa, xb, "mixup_pairs features");
  require_same_shape(ya, yb, "mixup_pairs labels");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mixup weight must lie in [0, 1]");
  auto mix = [lambda](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = lambda * av[i] + (1.0 - lambda) * bv[i];
    return out;
  };
  return {mix(xa, xb), mix(ya, yb)};
}

std::optional<MixupEvaluation> rlp_mixup_batch(const Matrix& xa, const Matrix& ya, const Matrix& xb, const Matrix& yb,
                                               double lambda, const ModelParams& model, std::size_t batch) {
  if (xa.rows() != xb.rows()) return std::nullopt;
  auto [x_mix, y_mix] = mixup_pairs(xa, ya, xb, yb, lambda);
  ForwardCache cache = forward(model, x_mix);
  const BatchProjector proj = make_projector(x_mix);
  const std::vector<double> s = row_sum(x_mix);
  LossOutput loss = rlp_batch(proj, y_mix, cache.output, s, batch);
  return MixupEvaluation{std::move(loss), std::move(cache), std::move(x_mix), std::move(y_mix)};
}

std::size_t draw_probe(Rng& rng, std::size_t n, std::span<const std::size_t> batch) {
  if (n == 0) throw ConfigError("cannot draw a probe from an empty dataset");
  for (;;) {
    const auto idx = static_cast<std::size_t>(rng.below(n));
    if (n <= batch.size() || std::find(batch.begin(), batch.end(), idx) == batch.end()) return idx;
  }
}

RlpEvaluator::RlpEvaluator(const Dataset& ds, std::size_t m, std::size_t k, std::uint64_t seed)
    : features_(ds.features) {
  if (ds.size() < m || m == 0) {
    throw ConfigError("RLP metric needs at least M=" + std::to_string(m) + " rows, dataset has " +
                      std::to_string(ds.size()));
  }
  const auto feasible = static_cast<std::size_t>(binomial_capped(ds.size(), m, k));
  batches_ = balanced_batches(ds.size(), m, std::min(k, feasible), seed);
  Rng rng(seed, Stream::probe);
  for (const auto& b : batches_.batches) {
    projectors_.push_back(make_projector(ds.features.select_rows(b)));
    labels_.push_back(ds.labels.select_rows(b));
    const std::size_t p = draw_probe(rng, ds.size(), b);
    probes_.emplace_back(ds.features.row(p).begin(), ds.features.row(p).end());
  }
}

double RlpEvaluator::operator()(const ModelParams& model) const { return from_predictions(predict(model, features_)); }

double RlpEvaluator::from_predictions(const Matrix& predictions) const {
  if (predictions.rows() != features_.rows()) throw ShapeError("RLP metric: one prediction per row is required");
  double total = 0.0;
  for (std::size_t j = 0; j < batches_.count(); ++j) {
    const Matrix hb = predictions.select_rows(batches_.batches[j]);
    const std::vector<double> w = matvec_t(projectors_[j].a, probes_[j]);
    const std::vector<double> v = matvec_t(sub(labels_[j], hb), w);
    for (double x : v) total += x * x;
  }
  const double mean = total / static_cast<double>(batches_.count());
  if (!std::isfinite(mean)) throw NumericError("non-finite RLP metric");
  return mean;
}

double rlp_metric(const ModelParams& model, const Dataset& ds, std::size_t m, std::size_t k, std::uint64_t seed) {
  return RlpEvaluator(ds, m, k, seed)(model);
}

}  // namespace rlp
