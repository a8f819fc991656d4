#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlp/experiment.hpp"
#include "rlp/theory.hpp"

namespace rlp::cli {

/// Provenance record written next to every run.
struct RunManifest {
  std::string command;
  std::string config_json;  ///< resolved configuration
  std::string config_hash;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::string started;  ///< ISO 8601, UTC
  std::string finished;  ///< empty while the run is in progress
};

std::string artifact_version();
std::string utc_timestamp();
std::string manifest_to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Command-line settings that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<UpdateMode> update;
  std::optional<ProbeMode> probe;
};

ExperimentConfig apply(ExperimentConfig cfg, const Overrides& o);

/// Writes a synthetic dataset (linear, nonlinear or moons) as CSV.
void cmd_gen_data(const std::string& name, std::size_t n, std::uint64_t seed, const std::filesystem::path& out_path,
                  double noise_level = 0.1);

/// One training run. Writes into out_dir:
///   manifest.json          before training starts, rewritten when it ends
///   config.json            the resolved configuration
///   metrics.csv            one row per evaluated epoch
///   checkpoint_epoch{E}.bin for every E in checkpoint_epochs
///   model.bin              final parameters
ExperimentResult cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                           const std::string& command = "train");

/// Ablation grid. Every listed axis is crossed with every other; an axis that
/// is absent is not varied. A grid with no axes, or with an empty axis, has no
/// cells.
struct AblationGrid {
  ExperimentConfig base;
  std::optional<std::vector<std::size_t>> train_count;
  std::optional<std::vector<double>> gamma;
  std::optional<std::vector<double>> beta;
  std::optional<std::vector<LossKind>> losses;
};

struct AblationCell {
  std::string name;
  ExperimentConfig config;
};

/// {"base": <experiment config>, "grid": {"train_count": [...], "gamma": [...],
/// "beta": [...], "losses": [...]}}
AblationGrid parse_ablation(const std::string& json_text);
AblationGrid load_ablation(const std::filesystem::path& path);
std::vector<AblationCell> expand(const AblationGrid& grid);

inline constexpr const char* kSummaryHeader = "cell,loss,train_count,gamma,beta,";

/// Runs every cell on up to `jobs` threads. Cell metrics go to
/// out_dir/cells/<cell>.csv and the final record of each cell to
/// out_dir/summary.csv, in cell order. Returns the number of cells run.
std::size_t cmd_ablate(const AblationGrid& grid, const std::filesystem::path& out_dir, std::size_t jobs);

/// Runs the three theory checks and writes out_dir/checks.json. Throws a
/// verification error when any check fails.
std::vector<CheckReport> cmd_verify(std::uint64_t seed, const std::filesystem::path& out_dir,
                                    std::size_t trials = 2000);

/// Writes recon_epoch{E}.pgm for each epoch: `count` test images on top and
/// the reconstructions of checkpoint_epoch{E}.bin from run_dir underneath.
/// The dataset comes from `cfg`.
std::vector<std::filesystem::path> cmd_reconstruct(const std::filesystem::path& run_dir, const ExperimentConfig& cfg,
                                                   const std::filesystem::path& out_dir,
                                                   const std::vector<std::size_t>& epochs, std::size_t count = 8);

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::size_t epoch);

}  // namespace rlp::cli
