#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlp/cli.hpp"
#include "rlp/error.hpp"

namespace fs = std::filesystem;
using namespace rlp;

namespace {

void add_overrides(CLI::App* cmd, std::string& update, std::string& probe, std::uint64_t& seed, bool& has_seed) {
  cmd->add_option("--update-mode", update, "per_epoch or per_batch")->check(CLI::IsMember({"per_epoch", "per_batch"}));
  cmd->add_option("--probe-mode", probe, "resample or frozen")->check(CLI::IsMember({"resample", "frozen"}));
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { seed = s, has_seed = true; }, "override the config seed");
}

cli::Overrides overrides(const std::string& update, const std::string& probe, std::uint64_t seed, bool has_seed) {
  cli::Overrides o;
  if (has_seed) o.seed = seed;
  if (!update.empty()) o.update = parse_update_mode(update);
  if (!probe.empty()) o.probe = parse_probe_mode(probe);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rlpbench: train and compare regression losses"};
  app.require_subcommand(1);

  std::string config, out, update, probe, name = "linear";
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t n = 6000, jobs = 1, trials = 2000, count = 8;
  double noise = 0.1;
  std::vector<std::size_t> epochs = {5, 10, 50};

  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset as CSV");
  gen->add_option("--name", name, "linear, nonlinear or moons")->check(CLI::IsMember({"linear", "nonlinear", "moons"}));
  gen->add_option("--n", n, "rows");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--noise", noise, "moons jitter");
  gen->add_option("--out", out, "output CSV")->required();

  auto* tr = app.add_subcommand("train", "run one experiment");
  tr->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "output directory")->required();
  add_overrides(tr, update, probe, seed, has_seed);

  auto* ab = app.add_subcommand("ablate", "run an ablation grid");
  ab->add_option("--config", config, "ablation config (JSON)")->required()->check(CLI::ExistingFile);
  ab->add_option("--out", out, "output directory")->required();
  ab->add_option("--jobs", jobs, "cells run concurrently")->check(CLI::PositiveNumber);
  add_overrides(ab, update, probe, seed, has_seed);

  auto* ve = app.add_subcommand("verify", "run the loss property checks");
  ve->add_option("--seed", seed, "check seed");
  ve->add_option("--out", out, "output directory")->required();
  ve->add_option("--trials", trials, "random trials per check")->check(CLI::PositiveNumber);

  auto* re = app.add_subcommand("reconstruct", "dump original/reconstruction image strips");
  re->add_option("--checkpoint", config, "training run directory holding checkpoint_epoch{E}.bin")
      ->required()
      ->check(CLI::ExistingDirectory);
  std::string recon_config;
  re->add_option("--config", recon_config, "experiment config; defaults to the run's config.json");
  re->add_option("--out", out, "output directory")->required();
  re->add_option("--epochs", epochs, "checkpoint epochs")->delimiter(',');
  re->add_option("--count", count, "images per strip")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::config);
  }

  try {
    if (gen->parsed()) {
      cli::cmd_gen_data(name, n, seed, out, noise);
    } else if (tr->parsed()) {
      const auto cfg = cli::apply(load_config(config), overrides(update, probe, seed, has_seed));
      const auto r = cli::cmd_train(cfg, out);
      if (!r.run.records.empty()) {
        const auto& last = r.run.records.back();
        std::cout << "epoch " << last.epoch << " test_mse " << last.test_mse << " test_rlp " << last.test_rlp << "\n";
      }
    } else if (ab->parsed()) {
      auto grid = cli::load_ablation(config);
      grid.base = cli::apply(grid.base, overrides(update, probe, seed, has_seed));
      std::cout << cli::cmd_ablate(grid, out, jobs) << " cells\n";
    } else if (ve->parsed()) {
      for (const auto& r : cli::cmd_verify(seed, out, trials)) {
        std::cout << r.name << ": " << to_string(r.status) << " (" << r.instances << " instances, " << r.violations
                  << " violations)\n";
      }
    } else if (re->parsed()) {
      const fs::path run_dir = config;
      const fs::path cfg_path = recon_config.empty() ? run_dir / "config.json" : fs::path(recon_config);
      for (const auto& p : cli::cmd_reconstruct(run_dir, load_config(cfg_path), out, epochs, count)) {
        std::cout << p.string() << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "rlpbench: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rlpbench: " << e.what() << "\n";
    return exit_code(ErrorKind::data);
  }
  return 0;
}
