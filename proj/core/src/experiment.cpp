#include "rlp/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rlp/error.hpp"
#include "rlp/image.hpp"
#include "rlp/metrics.hpp"

namespace rlp {
namespace {

using nlohmann::json;

const std::vector<std::string> kCalHousingColumns = {"MedInc",     "HouseAge", "AveRooms", "AveBedrms",
                                                     "Population", "AveOccup", "Latitude", "Longitude"};
const std::vector<std::string> kWineColumns = {"fixed acidity",       "volatile acidity",     "citric acid",
                                               "residual sugar",      "chlorides",            "free sulfur dioxide",
                                               "total sulfur dioxide", "density",             "pH",
                                               "sulphates",           "alcohol"};

struct TableRow {
  std::size_t epochs;
  OptimizerRule rule;
  double learning_rate;
  double l2_weight_decay;
  double psi;
};

// Hyperparameters per dataset; the second entry is the limited-data row.
std::pair<TableRow, TableRow> table_rows(std::string_view name) {
  using R = OptimizerRule;
  if (name == "cal_housing") return {{500, R::adam, 1e-4, 1e-4, 0.25}, {500, R::adamw, 5e-4, 0.01, 0.25}};
  if (name == "wine") return {{200, R::adam, 1e-4, 1e-4, 0.25}, {200, R::adamw, 5e-3, 0.01, 0.25}};
  if (name == "linear" || name == "nonlinear") {
    return {{200, R::adam, 1e-4, 1e-4, 0.25}, {200, R::adamw, 5e-4, 0.01, 0.25}};
  }
  if (name == "mnist") return {{100, R::sgd_nesterov, 0.01, 1e-4, 0.25}, {100, R::sgd_nesterov, 0.01, 1e-4, 0.25}};
  if (name == "cifar10") return {{50, R::sgd_nesterov, 0.01, 1e-4, 0.25}, {50, R::sgd_nesterov, 0.01, 1e-4, 0.25}};
  if (name == "moons") return {{100, R::adam, 1e-3, 1e-4, 0.15}, {100, R::adam, 1e-3, 1e-4, 0.15}};
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

constexpr double kAdamwDefaultDecay = 1e-4;
constexpr std::size_t kLimitedDataMax = 100;
constexpr std::size_t kImageBatchCap = 64;

std::size_t feature_dim_of(const DatasetSpec& ds) {
  if (ds.name == "linear") return 5;
  if (ds.name == "nonlinear") return 7;
  if (ds.name == "moons") return 2;
  if (ds.name == "mnist") return 784;
  if (ds.name == "cifar10") return 3072;
  return ds.feature_columns.size();
}

std::filesystem::path data_root(const ExperimentConfig& cfg) {
  if (!cfg.data_dir.empty()) return cfg.data_dir;
  if (const char* env = std::getenv("RLP_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

std::vector<std::filesystem::path> resolve_paths(const std::filesystem::path& root,
                                                 const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) {
    const std::filesystem::path path(p);
    out.push_back(path.is_absolute() ? path : root / path);
  }
  return out;
}

// --- JSON plumbing --------------------------------------------------------

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("section '" + std::string(section) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in section '" + std::string(section) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value);
  out = value;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::standard: return "standard";
    case Regime::limited_data: return "limited_data";
    case Regime::distribution_shift: return "distribution_shift";
    case Regime::additive_noise: return "additive_noise";
  }
  return "standard";
}

Regime regime_of(const ExperimentConfig& cfg) {
  if (cfg.split.train_count && *cfg.split.train_count <= kLimitedDataMax) return Regime::limited_data;
  if (cfg.split.mode == SplitMode::biased) return Regime::distribution_shift;
  if (cfg.noise_beta > 0.0) return Regime::additive_noise;
  return Regime::standard;
}

bool is_image_dataset(std::string_view name) noexcept { return name == "mnist" || name == "cifar10"; }
bool is_classification_dataset(std::string_view name) noexcept { return name == "moons"; }

ExperimentConfig resolve(const ExperimentConfig& cfg) {
  ExperimentConfig r = cfg;
  DatasetSpec& ds = r.dataset;
  const auto [standard_row, limited_row] = table_rows(ds.name);
  const TableRow& row = regime_of(cfg) == Regime::limited_data ? limited_row : standard_row;

  if (ds.name == "cal_housing") {
    if (ds.paths.empty()) ds.paths = {"cal_housing/cal_housing.csv"};
    if (ds.feature_columns.empty()) ds.feature_columns = kCalHousingColumns;
    if (ds.label_column.empty()) ds.label_column = "MedHouseVal";
  } else if (ds.name == "wine") {
    if (ds.paths.empty()) ds.paths = {"wine/winequality-red.csv", "wine/winequality-white.csv"};
    if (ds.feature_columns.empty()) ds.feature_columns = kWineColumns;
    if (ds.label_column.empty()) ds.label_column = "quality";
  } else if (ds.name == "mnist") {
    if (ds.paths.empty()) ds.paths = {"mnist/train-images-idx3-ubyte"};
    if (ds.test_paths.empty()) ds.test_paths = {"mnist/t10k-images-idx3-ubyte"};
  } else if (ds.name == "cifar10") {
    if (ds.paths.empty()) ds.paths = {"cifar10/data_batch_1.bin"};
    if (ds.test_paths.empty()) ds.test_paths = {"cifar10/test_batch.bin"};
  } else if (ds.name == "linear" || ds.name == "nonlinear") {
    if (!ds.n) ds.n = 6000;
  } else if (ds.name == "moons") {
    if (!ds.n) ds.n = 1000;
  }
  if (!ds.standardize) ds.standardize = ds.name == "cal_housing" || ds.name == "wine";

  if (!r.epochs) r.epochs = row.epochs;
  if (!r.optimizer) r.optimizer = row.rule;
  if (!r.learning_rate) r.learning_rate = row.learning_rate;
  if (!r.weight_decay) {
    if (r.loss == LossKind::mse_l2) {
      r.weight_decay = row.l2_weight_decay;
    } else {
      r.weight_decay = *r.optimizer == OptimizerRule::adamw ? kAdamwDefaultDecay : 0.0;
    }
  }
  if (!r.mixup_psi) r.mixup_psi = row.psi;

  const std::size_t d = feature_dim_of(ds);
  if (!r.batch_size) {
    if (is_image_dataset(ds.name)) {
      const std::size_t j = r.split.train_count.value_or(2 * kImageBatchCap);
      r.batch_size = std::clamp<std::size_t>(j / 2, 2, kImageBatchCap);
    } else {
      r.batch_size = d + 2;
    }
  }
  if (!r.batch_count) r.batch_count = regime_of(cfg) == Regime::limited_data ? 100 : 1000;
  if (!r.eval_batch_size) r.eval_batch_size = r.batch_size;

  if (!(r.split.train_fraction > 0.0 && r.split.train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1]");
  }
  if (!(r.split.gamma >= 0.0 && r.split.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(r.noise_beta >= 0.0)) throw ConfigError("noise_beta must be non-negative");
  if (*r.batch_size == 0 || *r.batch_count == 0) throw ConfigError("batch_size and batch_count must be positive");
  if (r.eval_every == 0) throw ConfigError("eval_every must be positive");
  if ((r.loss == LossKind::mse_mixup || r.loss == LossKind::rlp_mixup) && !(*r.mixup_psi > 0.0)) {
    throw ConfigError("mixup_psi must be positive");
  }
  if (r.loss == LossKind::cross_entropy && !is_classification_dataset(ds.name)) {
    throw ConfigError("cross_entropy requires a classification dataset");
  }
  return r;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "root",
                 {"name", "seed", "noise_beta", "checkpoint_epochs", "dataset", "split", "training", "optimizer",
                  "model", "data_dir"});
  ExperimentConfig c;
  read(doc, "name", c.name);
  read(doc, "seed", c.seed);
  read(doc, "noise_beta", c.noise_beta);
  read(doc, "checkpoint_epochs", c.checkpoint_epochs);
  std::string data_dir;
  read(doc, "data_dir", data_dir);
  c.data_dir = data_dir;

  if (doc.contains("dataset")) {
    const json& d = doc.at("dataset");
    reject_unknown(d, "dataset",
                   {"name", "n", "paths", "test_paths", "limit", "test_limit", "feature_columns", "label_column",
                    "noise_level", "standardize"});
    read(d, "name", c.dataset.name);
    read(d, "n", c.dataset.n);
    read(d, "paths", c.dataset.paths);
    read(d, "test_paths", c.dataset.test_paths);
    read(d, "limit", c.dataset.limit);
    read(d, "test_limit", c.dataset.test_limit);
    read(d, "feature_columns", c.dataset.feature_columns);
    read(d, "label_column", c.dataset.label_column);
    read(d, "noise_level", c.dataset.noise_level);
    read(d, "standardize", c.dataset.standardize);
  }
  if (doc.contains("split")) {
    const json& s = doc.at("split");
    reject_unknown(s, "split", {"mode", "train_fraction", "train_count", "gamma"});
    std::string mode = "random";
    read(s, "mode", mode);
    if (mode == "random") {
      c.split.mode = SplitMode::random;
    } else if (mode == "biased") {
      c.split.mode = SplitMode::biased;
    } else {
      throw ConfigError("unknown split mode '" + mode + "'");
    }
    read(s, "train_fraction", c.split.train_fraction);
    read(s, "train_count", c.split.train_count);
    read(s, "gamma", c.split.gamma);
  }
  if (doc.contains("training")) {
    const json& t = doc.at("training");
    reject_unknown(t, "training",
                   {"loss", "epochs", "batch_size", "batch_count", "minibatch", "mixup_psi", "update_mode",
                    "probe_mode", "eval_every", "eval_batch_size", "eval_batch_count"});
    std::string s;
    if (read(t, "loss", s), !s.empty()) c.loss = parse_loss_kind(s);
    s.clear();
    if (read(t, "update_mode", s), !s.empty()) c.update = parse_update_mode(s);
    s.clear();
    if (read(t, "probe_mode", s), !s.empty()) c.probe = parse_probe_mode(s);
    read(t, "epochs", c.epochs);
    read(t, "batch_size", c.batch_size);
    read(t, "batch_count", c.batch_count);
    read(t, "minibatch", c.minibatch);
    read(t, "mixup_psi", c.mixup_psi);
    read(t, "eval_every", c.eval_every);
    read(t, "eval_batch_size", c.eval_batch_size);
    read(t, "eval_batch_count", c.eval_batch_count);
  }
  if (doc.contains("optimizer")) {
    const json& o = doc.at("optimizer");
    reject_unknown(o, "optimizer", {"rule", "learning_rate", "weight_decay", "momentum", "beta1", "beta2", "epsilon"});
    std::string rule;
    if (read(o, "rule", rule), !rule.empty()) c.optimizer = parse_optimizer_rule(rule);
    read(o, "learning_rate", c.learning_rate);
    read(o, "weight_decay", c.weight_decay);
    read(o, "momentum", c.momentum);
    read(o, "beta1", c.beta1);
    read(o, "beta2", c.beta2);
    read(o, "epsilon", c.epsilon);
  }
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    reject_unknown(m, "model", {"hidden"});
    read(m, "hidden", c.hidden);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  const json doc{
      {"name", c.name},
      {"seed", c.seed},
      {"noise_beta", c.noise_beta},
      {"checkpoint_epochs", c.checkpoint_epochs},
      {"dataset",
       {{"name", c.dataset.name},
        {"n", opt(c.dataset.n)},
        {"paths", c.dataset.paths},
        {"test_paths", c.dataset.test_paths},
        {"limit", c.dataset.limit},
        {"test_limit", opt(c.dataset.test_limit)},
        {"feature_columns", c.dataset.feature_columns},
        {"label_column", c.dataset.label_column},
        {"noise_level", c.dataset.noise_level},
        {"standardize", opt(c.dataset.standardize)}}},
      {"split",
       {{"mode", c.split.mode == SplitMode::random ? "random" : "biased"},
        {"train_fraction", c.split.train_fraction},
        {"train_count", opt(c.split.train_count)},
        {"gamma", c.split.gamma}}},
      {"training",
       {{"loss", std::string(to_string(c.loss))},
        {"epochs", opt(c.epochs)},
        {"batch_size", opt(c.batch_size)},
        {"batch_count", opt(c.batch_count)},
        {"minibatch", c.minibatch},
        {"mixup_psi", opt(c.mixup_psi)},
        {"update_mode", std::string(to_string(c.update))},
        {"probe_mode", std::string(to_string(c.probe))},
        {"eval_every", c.eval_every},
        {"eval_batch_size", opt(c.eval_batch_size)},
        {"eval_batch_count", c.eval_batch_count}}},
      {"optimizer",
       {{"rule", c.optimizer ? json(std::string(to_string(*c.optimizer))) : json(nullptr)},
        {"learning_rate", opt(c.learning_rate)},
        {"weight_decay", opt(c.weight_decay)},
        {"momentum", c.momentum},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"epsilon", c.epsilon}}},
      {"model", {{"hidden", c.hidden}}},
  };
  return doc.dump(indent);
}

std::string config_hash(const ExperimentConfig& resolved) { return hash_hex(fnv1a64(config_to_json(resolved))); }

TrainConfig make_train_config(const ExperimentConfig& r, std::size_t n_features) {
  if (!r.epochs || !r.optimizer || !r.learning_rate || !r.weight_decay || !r.batch_size || !r.batch_count ||
      !r.mixup_psi) {
    throw ConfigError("make_train_config needs a resolved configuration");
  }
  TrainConfig t;
  t.loss = r.loss;
  t.optimizer = OptimizerSpec{.rule = *r.optimizer,
                              .learning_rate = *r.learning_rate,
                              .momentum = r.momentum,
                              .beta1 = r.beta1,
                              .beta2 = r.beta2,
                              .epsilon = r.epsilon,
                              .weight_decay = *r.weight_decay};
  t.epochs = *r.epochs;
  t.batch_size = *r.batch_size;
  t.batch_count = *r.batch_count;
  t.minibatch = r.minibatch;
  t.mixup_psi = *r.mixup_psi;
  t.update = r.update;
  t.probe = r.probe;
  t.seed = r.seed;
  t.eval_every = r.eval_every;
  t.eval_batch_size = r.eval_batch_size.value_or(std::min(*r.batch_size, n_features + 2));
  t.eval_batch_count = r.eval_batch_count;
  t.classification = is_classification_dataset(r.dataset.name);
  return t;
}

PreparedData prepare_data(const ExperimentConfig& r) {
  const DatasetSpec& spec = r.dataset;
  const auto root = data_root(r);

  if (is_image_dataset(spec.name)) {
    Dataset source = load_images(resolve_paths(root, spec.paths).front(), spec.limit);
    Split split = r.split.train_count ? split_count(source, *r.split.train_count, r.seed)
                                      : split_random(source, r.split.train_fraction, r.seed);
    PreparedData out{std::move(split.train), std::move(split.test)};
    if (!spec.test_paths.empty()) {
      out.test = load_images(resolve_paths(root, spec.test_paths).front(), spec.test_limit.value_or(0));
      if (out.test.feature_dim() != out.train.feature_dim()) throw DataError("train and test images differ in size");
    }
    if (r.noise_beta > 0.0) out.train = add_noise(out.train, r.noise_beta, r.seed);
    return out;
  }

  Dataset full;
  if (spec.name == "linear") {
    full = gen_linear(spec.n.value_or(6000), r.seed);
  } else if (spec.name == "nonlinear") {
    full = gen_nonlinear(spec.n.value_or(6000), r.seed);
  } else if (spec.name == "moons") {
    full = gen_moons(spec.n.value_or(1000), spec.noise_level, r.seed);
  } else {
    full = load_table(resolve_paths(root, spec.paths), spec.feature_columns, spec.label_column);
  }

  Split split;
  if (r.split.mode == SplitMode::biased) {
    split = split_biased(full, r.split.gamma, r.seed);
  } else if (r.split.train_count) {
    split = split_count(full, *r.split.train_count, r.seed);
  } else {
    split = split_random(full, r.split.train_fraction, r.seed);
  }
  PreparedData out{std::move(split.train), std::move(split.test)};
  if (spec.standardize.value_or(false)) {
    const Dataset others[] = {out.test};
    Standardized s = standardize(out.train, others);
    out.train = std::move(s.train);
    out.test = std::move(s.others.front());
  }
  if (r.noise_beta > 0.0) out.train = add_noise(out.train, r.noise_beta, r.seed);
  return out;
}

ModelParams build_model(const ExperimentConfig& r, std::size_t d, std::size_t c) {
  if (is_image_dataset(r.dataset.name)) return build_autoencoder(d, r.hidden, r.seed);
  if (r.dataset.name == "moons") return build_moons_classifier(r.seed, is_rlp(r.loss));
  if (c != 1) throw ConfigError("regression datasets need a single label column");
  return build_regression_net(d, r.hidden, r.seed);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const EpochHook& hook) {
  ExperimentResult out;
  out.config = resolve(cfg);
  out.hash = config_hash(out.config);
  out.data = prepare_data(out.config);
  const std::size_t d = out.data.train.feature_dim();
  ModelParams model = build_model(out.config, d, out.data.train.label_dim());
  TrainConfig tc = make_train_config(out.config, d);
  tc.config_hash = out.hash;
  out.run = train(tc, std::move(model), out.data.train, &out.data.test, hook);
  return out;
}

}  // namespace rlp
