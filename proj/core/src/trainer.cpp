#include "rlp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "rlp/batching.hpp"
#include "rlp/error.hpp"
#include "rlp/random.hpp"

namespace rlp {
namespace {

using Clock = std::chrono::steady_clock;

// Fixed offsets keep the evaluation batch set and the second mixup batch set
// independent of the training batch set drawn from the same user seed.
constexpr std::uint64_t kEvalSeedOffset = 0x7e57;
constexpr std::uint64_t kSecondBatchSetOffset = 0xb2;

struct Batch {
  std::vector<std::size_t> rows;
  Matrix x;
  Matrix y;
};

std::vector<Batch> materialize(const BatchSet& set, const Dataset& ds) {
  std::vector<Batch> out;
  out.reserve(set.count());
  for (const auto& rows : set.batches) out.push_back({rows, ds.features.select_rows(rows), ds.labels.select_rows(rows)});
  return out;
}

NumericError with_context(const NumericError& e, std::size_t epoch, std::size_t batch) {
  return NumericError(std::string(e.what()) + " [epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                      "]");
}

// Shared epoch bookkeeping: evaluation cadence, records and the epoch hook.
class RunLog {
 public:
  RunLog(const TrainConfig& cfg, const Dataset& train, const Dataset* test) : cfg_(cfg), start_(Clock::now()) {
    if (cfg.eval_every == 0) throw ConfigError("eval_every must be positive");
    if (test != nullptr && !test->empty()) {
      std::size_t m = cfg.eval_batch_size;
      if (m == 0) m = cfg.batch_size != 0 ? cfg.batch_size : train.feature_dim() + 2;
      m = std::min(m, test->size());
      evaluator_.emplace(*test, m, cfg.eval_batch_count, mix64(cfg.seed ^ kEvalSeedOffset), cfg.classification);
    }
  }

  void end_epoch(std::size_t epoch, double train_loss, const ModelParams& model, const EpochHook& hook) {
    if (epoch % cfg_.eval_every == 0 || epoch == cfg_.epochs) {
      MetricsRecord r;
      if (evaluator_) {
        r = (*evaluator_)(model);
      } else {
        r.test_mse = std::numeric_limits<double>::quiet_NaN();
        r.test_rlp = std::numeric_limits<double>::quiet_NaN();
      }
      r.epoch = epoch;
      r.train_loss = train_loss;
      r.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
      r.config_hash = cfg_.config_hash;
      records.push_back(std::move(r));
    }
    if (hook) hook(epoch, model);
  }

  std::vector<MetricsRecord> records;

 private:
  const TrainConfig& cfg_;
  Clock::time_point start_;
  std::optional<TestEvaluator> evaluator_;
};

void check_common(const TrainConfig& cfg, const ModelParams& model, const Dataset& train) {
  if (train.empty()) throw ConfigError("training set is empty");
  model.validate();
  if (model.input_dim() != train.feature_dim() || model.output_dim() != train.label_dim()) {
    throw ShapeError("model maps " + std::to_string(model.input_dim()) + " -> " + std::to_string(model.output_dim()) +
                     " but data is " + std::to_string(train.feature_dim()) + " -> " +
                     std::to_string(train.label_dim()));
  }
  if ((cfg.loss == LossKind::mse_mixup || cfg.loss == LossKind::rlp_mixup) && !(cfg.mixup_psi > 0.0)) {
    throw ConfigError("mixup shape parameter psi must be positive");
  }
}

}  // namespace

std::string_view to_string(LossKind k) noexcept {
  switch (k) {
    case LossKind::mse: return "mse";
    case LossKind::mse_l2: return "mse_l2";
    case LossKind::mse_mixup: return "mse_mixup";
    case LossKind::rlp: return "rlp";
    case LossKind::rlp_mixup: return "rlp_mixup";
    case LossKind::cross_entropy: return "cross_entropy";
  }
  return "rlp";
}

std::string_view to_string(UpdateMode m) noexcept { return m == UpdateMode::per_epoch ? "per_epoch" : "per_batch"; }
std::string_view to_string(ProbeMode m) noexcept { return m == ProbeMode::resample ? "resample" : "frozen"; }

LossKind parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::mse, LossKind::mse_l2, LossKind::mse_mixup, LossKind::rlp, LossKind::rlp_mixup,
                 LossKind::cross_entropy}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

UpdateMode parse_update_mode(std::string_view name) {
  if (name == "per_epoch") return UpdateMode::per_epoch;
  if (name == "per_batch") return UpdateMode::per_batch;
  throw ConfigError("unknown update mode '" + std::string(name) + "'");
}

ProbeMode parse_probe_mode(std::string_view name) {
  if (name == "resample") return ProbeMode::resample;
  if (name == "frozen") return ProbeMode::frozen;
  throw ConfigError("unknown probe mode '" + std::string(name) + "'");
}

TestEvaluator::TestEvaluator(const Dataset& test, std::size_t m, std::size_t k, std::uint64_t seed,
                             bool classification)
    : test_(&test), rlp_(std::make_unique<RlpEvaluator>(test, m, k, seed)), classification_(classification) {}

MetricsRecord TestEvaluator::operator()(const ModelParams& model) const {
  const Matrix h = predict(model, test_->features);
  MetricsRecord r;
  r.test_mse = mse(h, test_->labels).value;
  r.test_rlp = rlp_->from_predictions(h);
  if (classification_) {
    r.accuracy = accuracy(h, test_->labels);
    r.macro_f1 = macro_f1(h, test_->labels);
  }
  return r;
}

MetricsRecord evaluate(const ModelParams& model, const Dataset& test, std::size_t m, std::size_t k,
                       std::uint64_t seed, bool classification) {
  return TestEvaluator(test, m, k, seed, classification)(model);
}

TrainResult train_rlp(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test,
                      const EpochHook& hook) {
  check_common(cfg, model, train);
  const std::size_t n = train.size();
  const BatchSet set = balanced_batches(n, cfg.batch_size, cfg.batch_count, cfg.seed);
  const std::vector<Batch> batches = materialize(set, train);
  std::vector<BatchProjector> projectors;
  projectors.reserve(batches.size());
  for (const auto& b : batches) projectors.push_back(make_projector(b.x));

  std::vector<std::size_t> probes(batches.size());
  auto draw_probes = [&](std::uint64_t substream) {
    Rng rng(cfg.seed, Stream::probe, substream);
    for (std::size_t j = 0; j < batches.size(); ++j) probes[j] = draw_probe(rng, n, batches[j].rows);
  };
  if (cfg.probe == ProbeMode::frozen) draw_probes(0);

  Optimizer opt(cfg.optimizer, model);
  RunLog log(cfg, train, test);
  const double inv_k = 1.0 / static_cast<double>(batches.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.probe == ProbeMode::resample) draw_probes(epoch);
    GradientBundle total = GradientBundle::zeros_like(model);
    double loss_sum = 0.0;
    for (std::size_t j = 0; j < batches.size(); ++j) {
      try {
        const ForwardCache cache = forward(model, batches[j].x);
        const LossOutput out = rlp_batch(projectors[j], batches[j].y, cache.output, train.features.row(probes[j]), j);
        GradientBundle g = backward(model, cache, out.dL_dH);
        g.loss = out.value;
        loss_sum += out.value;
        if (cfg.update == UpdateMode::per_batch) {
          opt.step(model, g);
        } else {
          total.accumulate(g);
        }
      } catch (const NumericError& e) {
        throw with_context(e, epoch, j);
      }
    }
    if (cfg.update == UpdateMode::per_epoch) {
      total.scale(inv_k);
      try {
        opt.step(model, total);
      } catch (const NumericError& e) {
        throw with_context(e, epoch, batches.size());
      }
    }
    log.end_epoch(epoch, loss_sum * inv_k, model, hook);
  }
  return {std::move(model), std::move(log.records), opt.steps()};
}

TrainResult train_baseline(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test,
                           const EpochHook& hook) {
  check_common(cfg, model, train);
  if (is_rlp(cfg.loss)) throw ConfigError("train_baseline does not handle RLP losses");
  if (cfg.minibatch == 0) throw ConfigError("minibatch size must be positive");
  const std::size_t n = train.size();
  const std::size_t mb = std::min(cfg.minibatch, n);
  Optimizer opt(cfg.optimizer, model);
  RunLog log(cfg, train, test);
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(cfg.seed, Stream::shuffle, epoch);
    shuffle.shuffle(std::span(order));
    Rng mixer(cfg.seed, Stream::mixup, epoch);
    double loss_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < n; start += mb) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(mb, n - start));
      Matrix x = train.features.select_rows(rows);
      Matrix y = train.labels.select_rows(rows);
      if (cfg.loss == LossKind::mse_mixup) {
        const double lambda = mixer.beta(cfg.mixup_psi, cfg.mixup_psi);
        std::vector<std::size_t> partner(rows.begin(), rows.end());
        mixer.shuffle(std::span(partner));
        auto mixed = mixup_pairs(x, y, train.features.select_rows(partner), train.labels.select_rows(partner), lambda);
        x = std::move(mixed.first);
        y = std::move(mixed.second);
      }
      try {
        const ForwardCache cache = forward(model, x);
        const LossOutput out =
            cfg.loss == LossKind::cross_entropy ? cross_entropy(cache.output, y) : mse(cache.output, y);
        GradientBundle g = backward(model, cache, out.dL_dH);
        g.loss = out.value;
        loss_sum += out.value;
        ++count;
        opt.step(model, g);
      } catch (const NumericError& e) {
        throw with_context(e, epoch, start / mb);
      }
    }
    log.end_epoch(epoch, loss_sum / static_cast<double>(count), model, hook);
  }
  return {std::move(model), std::move(log.records), opt.steps()};
}

TrainResult train_rlp_mixup(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test,
                            const EpochHook& hook) {
  check_common(cfg, model, train);
  const std::size_t n = train.size();
  const std::vector<Batch> first = materialize(balanced_batches(n, cfg.batch_size, cfg.batch_count, cfg.seed), train);
  const std::vector<Batch> second =
      materialize(balanced_batches(n, cfg.batch_size, cfg.batch_count, mix64(cfg.seed ^ kSecondBatchSetOffset)), train);
  Optimizer opt(cfg.optimizer, model);
  RunLog log(cfg, train, test);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng mixer(cfg.seed, Stream::mixup, epoch);
    GradientBundle total = GradientBundle::zeros_like(model);
    double loss_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < first.size(); ++j) {
      const double lambda = mixer.beta(cfg.mixup_psi, cfg.mixup_psi);
      try {
        auto eval = rlp_mixup_batch(first[j].x, first[j].y, second[j].x, second[j].y, lambda, model, j);
        if (!eval) continue;
        GradientBundle g = backward(model, eval->cache, eval->loss.dL_dH);
        g.loss = eval->loss.value;
        loss_sum += eval->loss.value;
        ++used;
        if (cfg.update == UpdateMode::per_batch) {
          opt.step(model, g);
        } else {
          total.accumulate(g);
        }
      } catch (const NumericError& e) {
        throw with_context(e, epoch, j);
      }
    }
    if (used == 0) throw ConfigError("every mixup batch pair was skipped");
    if (cfg.update == UpdateMode::per_epoch) {
      total.scale(1.0 / static_cast<double>(used));
      try {
        opt.step(model, total);
      } catch (const NumericError& e) {
        throw with_context(e, epoch, first.size());
      }
    }
    log.end_epoch(epoch, loss_sum / static_cast<double>(used), model, hook);
  }
  return {std::move(model), std::move(log.records), opt.steps()};
}

TrainResult train(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test,
                  const EpochHook& hook) {
  switch (cfg.loss) {
    case LossKind::rlp: return train_rlp(cfg, std::move(model), train, test, hook);
    case LossKind::rlp_mixup: return train_rlp_mixup(cfg, std::move(model), train, test, hook);
    default: return train_baseline(cfg, std::move(model), train, test, hook);
  }
}

}  // namespace rlp
