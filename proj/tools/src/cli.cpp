#include "rlp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rlp/error.hpp"
#include "rlp/image.hpp"
#include "rlp/metrics.hpp"
#include "rlp/model.hpp"

#ifndef RLP_VERSION
#define RLP_VERSION "0.0.0"
#endif

namespace rlp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string short_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
  if (!os) throw DataError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::string artifact_version() { return RLP_VERSION; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_to_json(const RunManifest& m) {
  json streams = {{"dataset", 1}, {"split", 2},   {"noise", 3},   {"init", 4}, {"batching", 5},
                  {"probe", 6},   {"mixup", 7},   {"shuffle", 8}, {"theory", 9}};
  json doc = {
      {"command", m.command},
      {"config", m.config_json.empty() ? json(nullptr) : json::parse(m.config_json)},
      {"config_hash", m.config_hash},
      {"seeds", {{"seed", m.seed}, {"streams", streams}}},
      {"out_dir", m.out_dir.string()},
      {"versions", {{"artifact", artifact_version()}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}}},
      {"started", m.started},
      {"finished", m.finished.empty() ? json(nullptr) : json(m.finished)},
  };
  return doc.dump(2) + "\n";
}

void write_manifest(const fs::path& path, const RunManifest& m) { write_text(path, manifest_to_json(m)); }

ExperimentConfig apply(ExperimentConfig cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.update) cfg.update = *o.update;
  if (o.probe) cfg.probe = *o.probe;
  return cfg;
}

void cmd_gen_data(const std::string& name, std::size_t n, std::uint64_t seed, const fs::path& out_path,
                  double noise_level) {
  if (n == 0) throw ConfigError("gen-data needs n > 0");
  Dataset ds;
  if (name == "linear") {
    ds = gen_linear(n, seed);
  } else if (name == "nonlinear") {
    ds = gen_nonlinear(n, seed);
  } else if (name == "moons") {
    ds = gen_moons(n, noise_level, seed);
  } else {
    throw ConfigError("gen-data: unknown synthetic dataset '" + name + "'");
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_table(out_path, ds);
}

fs::path checkpoint_path(const fs::path& run_dir, std::size_t epoch) {
  return run_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".bin");
}

ExperimentResult cmd_train(const ExperimentConfig& cfg, const fs::path& out_dir, const std::string& command) {
  ExperimentResult out;
  out.config = resolve(cfg);
  out.hash = config_hash(out.config);
  out.data = prepare_data(out.config);

  fs::create_directories(out_dir);
  RunManifest manifest{.command = command,
                       .config_json = config_to_json(out.config),
                       .config_hash = out.hash,
                       .seed = out.config.seed,
                       .out_dir = out_dir,
                       .started = utc_timestamp()};
  write_manifest(out_dir / "manifest.json", manifest);
  write_text(out_dir / "config.json", config_to_json(out.config, 2) + "\n");

  const std::size_t d = out.data.train.feature_dim();
  ModelParams model = build_model(out.config, d, out.data.train.label_dim());
  TrainConfig tc = make_train_config(out.config, d);
  tc.config_hash = out.hash;

  const auto& keep = out.config.checkpoint_epochs;
  EpochHook hook = [&](std::size_t epoch, const ModelParams& m) {
    if (std::find(keep.begin(), keep.end(), epoch) != keep.end()) save_checkpoint(checkpoint_path(out_dir, epoch), m);
  };
  out.run = train(tc, std::move(model), out.data.train, &out.data.test, hook);

  write_metrics(out_dir / "metrics.csv", out.run.records);
  save_checkpoint(out_dir / "model.bin", out.run.model);
  manifest.finished = utc_timestamp();
  write_manifest(out_dir / "manifest.json", manifest);
  return out;
}

AblationGrid parse_ablation(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("ablation config must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "base" && key != "grid") throw ConfigError("ablation config: unknown key '" + key + "'");
  }
  AblationGrid g;
  if (doc.contains("base")) g.base = parse_config(doc.at("base").dump());
  if (!doc.contains("grid")) return g;
  const json& grid = doc.at("grid");
  if (!grid.is_object()) throw ConfigError("ablation grid must be an object");
  try {
    for (const auto& [key, value] : grid.items()) {
      if (key == "train_count") {
        g.train_count = value.get<std::vector<std::size_t>>();
      } else if (key == "gamma") {
        g.gamma = value.get<std::vector<double>>();
      } else if (key == "beta") {
        g.beta = value.get<std::vector<double>>();
      } else if (key == "losses") {
        std::vector<LossKind> losses;
        for (const auto& s : value.get<std::vector<std::string>>()) losses.push_back(parse_loss_kind(s));
        g.losses = std::move(losses);
      } else {
        throw ConfigError("ablation grid: unknown axis '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation grid: ") + e.what());
  }
  return g;
}

AblationGrid load_ablation(const fs::path& path) { return parse_ablation(read_text(path)); }

std::vector<AblationCell> expand(const AblationGrid& g) {
  if (!g.train_count && !g.gamma && !g.beta && !g.losses) return {};
  std::vector<AblationCell> cells{{"", g.base}};
  auto cross = [&cells](const auto& axis, auto&& set) {
    std::vector<AblationCell> next;
    for (const auto& cell : cells) {
      for (const auto& value : axis) {
        AblationCell c = cell;
        const std::string part = set(c.config, value);
        c.name += c.name.empty() ? part : "_" + part;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  };
  if (g.losses) {
    cross(*g.losses, [](ExperimentConfig& c, LossKind k) {
      c.loss = k;
      return std::string(to_string(k));
    });
  }
  if (g.train_count) {
    cross(*g.train_count, [](ExperimentConfig& c, std::size_t n) {
      c.split.train_count = n;
      return "n" + std::to_string(n);
    });
  }
  if (g.gamma) {
    cross(*g.gamma, [](ExperimentConfig& c, double gamma) {
      c.split.mode = SplitMode::biased;
      c.split.gamma = gamma;
      return "g" + short_real(gamma);
    });
  }
  if (g.beta) {
    cross(*g.beta, [](ExperimentConfig& c, double beta) {
      c.noise_beta = beta;
      return "b" + short_real(beta);
    });
  }
  for (auto& c : cells) c.config.name = g.base.name + "/" + c.name;
  return cells;
}

std::size_t cmd_ablate(const AblationGrid& grid, const fs::path& out_dir, std::size_t jobs) {
  const std::vector<AblationCell> cells = expand(grid);
  fs::create_directories(out_dir / "cells");
  std::vector<std::string> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const ExperimentResult r = run_experiment(cells[i].config);
        write_metrics(out_dir / "cells" / (cells[i].name + ".csv"), r.run.records);
        const ExperimentConfig& c = r.config;
        std::string row = cells[i].name + "," + std::string(to_string(c.loss)) + ",";
        row += (c.split.train_count ? std::to_string(*c.split.train_count) : "") + ",";
        row += (c.split.mode == SplitMode::biased ? short_real(c.split.gamma) : "") + ",";
        row += short_real(c.noise_beta) + ",";
        row += r.run.records.empty() ? "" : format_metrics_row(r.run.records.back());
        rows[i] = std::move(row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string summary = std::string(kSummaryHeader) + std::string(kMetricsHeader) + "\n";
  for (const auto& row : rows) summary += row + "\n";
  write_text(out_dir / "summary.csv", summary);
  return cells.size();
}

std::vector<CheckReport> cmd_verify(std::uint64_t seed, const fs::path& out_dir, std::size_t trials) {
  std::vector<CheckReport> reports = {
      check_nonnegativity_and_zero(trials, seed),
      check_convexity_linear(trials, seed),
      check_gradient_step_dominance(seed),
  };
  fs::create_directories(out_dir);
  write_reports(out_dir / "checks.json", reports);
  for (const auto& r : reports) {
    if (r.status == CheckStatus::fail) {
      throw Error(ErrorKind::verification,
                  r.name + ": " + std::to_string(r.violations) + " violations over " + std::to_string(r.instances) +
                      " instances");
    }
  }
  return reports;
}

std::vector<fs::path> cmd_reconstruct(const fs::path& run_dir, const ExperimentConfig& cfg, const fs::path& out_dir,
                                      const std::vector<std::size_t>& epochs, std::size_t count) {
  const ExperimentConfig r = resolve(cfg);
  if (!is_image_dataset(r.dataset.name)) throw ConfigError("reconstruct needs an image dataset");
  const PreparedData data = prepare_data(r);
  const Dataset& source = data.test.empty() ? data.train : data.test;
  if (!source.meta.image) throw DataError("dataset carries no image shape");
  std::vector<std::size_t> rows(std::min(count, source.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Matrix originals = source.features.select_rows(rows);

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const std::size_t epoch : epochs) {
    const ModelParams model = load_checkpoint(checkpoint_path(run_dir, epoch));
    const Matrix recon = predict(model, originals);
    const fs::path path = out_dir / ("recon_epoch" + std::to_string(epoch) + ".pgm");
    write_pgm(path, comparison_strip(originals, recon, *source.meta.image));
    written.push_back(path);
  }
  return written;
}

}  // namespace rlp::cli
