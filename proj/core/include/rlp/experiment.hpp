#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlp/dataset.hpp"
#include "rlp/model.hpp"
#include "rlp/optim.hpp"
#include "rlp/trainer.hpp"

namespace rlp {

struct DatasetSpec {
  std::string name = "linear";  ///< linear | nonlinear | moons | cal_housing | wine | mnist | cifar10
  std::optional<std::size_t> n;  ///< synthetic size
  std::vector<std::string> paths;       ///< loader inputs, relative to data_dir
  std::vector<std::string> test_paths;  ///< images only: a separate test source
  std::size_t limit = 0;                ///< images only: cap on rows read from each source
  std::optional<std::size_t> test_limit;
  std::vector<std::string> feature_columns;
  std::string label_column;
  double noise_level = 0.1;  ///< moons jitter
  std::optional<bool> standardize;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

enum class SplitMode { random, biased };

struct SplitSpec {
  SplitMode mode = SplitMode::random;
  double train_fraction = 0.5;
  std::optional<std::size_t> train_count;
  double gamma = 0.5;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// A full experiment. Optional fields left unset are filled by resolve().
struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  SplitSpec split;
  double noise_beta = 0.0;

  LossKind loss = LossKind::rlp;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> batch_count;
  std::size_t minibatch = 64;
  std::optional<double> mixup_psi;
  UpdateMode update = UpdateMode::per_epoch;
  ProbeMode probe = ProbeMode::resample;
  std::size_t eval_every = 1;
  std::optional<std::size_t> eval_batch_size;
  std::size_t eval_batch_count = 1000;

  std::optional<OptimizerRule> optimizer;
  std::optional<double> learning_rate;
  std::optional<double> weight_decay;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  std::size_t hidden = 32;  ///< regression hidden width / autoencoder latent width
  std::vector<std::size_t> checkpoint_epochs;

  /// Not part of the experiment identity; excluded from the hash.
  std::filesystem::path data_dir;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Which hyperparameter row applies to a configuration.
enum class Regime { standard, limited_data, distribution_shift, additive_noise };

std::string_view to_string(Regime r) noexcept;
Regime regime_of(const ExperimentConfig& cfg);

bool is_image_dataset(std::string_view name) noexcept;
bool is_classification_dataset(std::string_view name) noexcept;

/// Fills every unset field from the per-dataset defaults: epochs, optimizer
/// rule, learning rate, weight decay (nonzero only for mse_l2, or the AdamW
/// default), mixup psi, M and K, and standardization. Throws ConfigError for
/// unknown datasets or invalid values.
ExperimentConfig resolve(const ExperimentConfig& cfg);

/// Parses a JSON document. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, no data_dir) of a configuration.
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);
/// FNV-1a of the canonical JSON of the resolved configuration, as hex.
std::string config_hash(const ExperimentConfig& resolved);

TrainConfig make_train_config(const ExperimentConfig& resolved, std::size_t n_features);

struct PreparedData {
  Dataset train;
  Dataset test;
};

/// Loads or generates the dataset, splits it, standardizes when requested
/// and adds training-feature noise.
PreparedData prepare_data(const ExperimentConfig& resolved);

/// Builds the architecture for the dataset and loss with the init seed.
ModelParams build_model(const ExperimentConfig& resolved, std::size_t d, std::size_t c);

struct ExperimentResult {
  ExperimentConfig config;  ///< resolved
  std::string hash;
  PreparedData data;
  TrainResult run;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const EpochHook& hook = {});

}  // namespace rlp
