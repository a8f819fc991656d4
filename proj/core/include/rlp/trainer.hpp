#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rlp/dataset.hpp"
#include "rlp/loss.hpp"
#include "rlp/metrics.hpp"
#include "rlp/model.hpp"
#include "rlp/optim.hpp"

namespace rlp {

enum class LossKind { mse, mse_l2, mse_mixup, rlp, rlp_mixup, cross_entropy };
enum class UpdateMode { per_epoch, per_batch };
enum class ProbeMode { resample, frozen };

std::string_view to_string(LossKind k) noexcept;
std::string_view to_string(UpdateMode m) noexcept;
std::string_view to_string(ProbeMode m) noexcept;
LossKind parse_loss_kind(std::string_view name);
UpdateMode parse_update_mode(std::string_view name);
ProbeMode parse_probe_mode(std::string_view name);

[[nodiscard]] constexpr bool is_rlp(LossKind k) noexcept { return k == LossKind::rlp || k == LossKind::rlp_mixup; }

struct TrainConfig {
  LossKind loss = LossKind::rlp;
  OptimizerSpec optimizer;
  std::size_t epochs = 200;
  std::size_t batch_size = 0;      ///< M, rows per hyperplane fit (RLP kinds)
  std::size_t batch_count = 1000;  ///< K, batches in the balanced batch set
  std::size_t minibatch = 64;      ///< baseline minibatch size
  double mixup_psi = 0.25;         ///< Beta(psi, psi) shape
  UpdateMode update = UpdateMode::per_epoch;
  ProbeMode probe = ProbeMode::resample;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;  ///< evaluate every this many epochs and after the last one
  std::size_t eval_batch_size = 0;  ///< M for the test RLP metric; 0 picks batch_size, else d + 2
  std::size_t eval_batch_count = 1000;
  bool classification = false;
  std::string config_hash;
};

struct TrainResult {
  ModelParams model;
  std::vector<MetricsRecord> records;
  std::size_t steps = 0;  ///< optimizer updates applied
};

/// Called after every epoch with the 1-based epoch number and current model.
using EpochHook = std::function<void(std::size_t epoch, const ModelParams& model)>;

/// Test-set scoring: MSE over all rows, the RLP metric over a fixed batch set,
/// and accuracy / macro-F1 for classification.
class TestEvaluator {
 public:
  TestEvaluator(const Dataset& test, std::size_t m, std::size_t k, std::uint64_t seed, bool classification);

  [[nodiscard]] MetricsRecord operator()(const ModelParams& model) const;

 private:
  const Dataset* test_;
  std::unique_ptr<RlpEvaluator> rlp_;
  bool classification_;
};

MetricsRecord evaluate(const ModelParams& model, const Dataset& test, std::size_t m, std::size_t k,
                       std::uint64_t seed, bool classification = false);

/// RLP training over a fixed balanced batch set. Each epoch evaluates every
/// batch at a probe row, backpropagates each batch's sensitivity, and either
/// averages the K gradients into one step (per_epoch) or steps after every
/// batch (per_batch). Probes are redrawn every epoch unless frozen.
TrainResult train_rlp(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test = nullptr,
                      const EpochHook& hook = {});

/// Shuffled minibatch training with MSE (mse, mse_l2), mixup MSE or
/// cross-entropy. Weight decay comes from the optimizer spec.
TrainResult train_baseline(const TrainConfig& cfg, ModelParams model, const Dataset& train,
                           const Dataset* test = nullptr, const EpochHook& hook = {});

/// Mixup-augmented RLP training: two independent balanced batch sets whose
/// j-th batches are mixed with a fresh lambda ~ Beta(psi, psi) per pair.
TrainResult train_rlp_mixup(const TrainConfig& cfg, ModelParams model, const Dataset& train,
                            const Dataset* test = nullptr, const EpochHook& hook = {});

/// Dispatches on cfg.loss.
TrainResult train(const TrainConfig& cfg, ModelParams model, const Dataset& train, const Dataset* test = nullptr,
                  const EpochHook& hook = {});

}  // namespace rlp
