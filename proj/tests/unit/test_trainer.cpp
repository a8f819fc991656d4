#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlp/batching.hpp"
#include "rlp/error.hpp"
#include "rlp/random.hpp"
#include "rlp/trainer.hpp"

using namespace rlp;

namespace {

TrainConfig small_rlp(std::size_t epochs, UpdateMode mode) {
  TrainConfig c;
  c.loss = LossKind::rlp;
  c.epochs = epochs;
  c.batch_size = 7;
  c.batch_count = 5;
  c.update = mode;
  c.seed = 11;
  c.eval_batch_count = 20;
  return c;
}

}  // namespace

TEST_CASE("optimizer step counts per update mode") {
  const Dataset ds = gen_linear(60, 1);
  const ModelParams m0 = build_linear(5, 1, 2);
  CHECK(train_rlp(small_rlp(3, UpdateMode::per_epoch), m0, ds).steps == 3);
  CHECK(train_rlp(small_rlp(3, UpdateMode::per_batch), m0, ds).steps == 15);
  TrainConfig mix = small_rlp(3, UpdateMode::per_batch);
  mix.loss = LossKind::rlp_mixup;
  CHECK(train(mix, m0, ds).steps <= 15);
  TrainConfig base = small_rlp(2, UpdateMode::per_epoch);
  base.loss = LossKind::mse;
  base.minibatch = 16;
  CHECK(train(base, m0, ds).steps == 2 * 4);  // 60 rows in batches of 16, 16, 16, 12
}

TEST_CASE("per-epoch update averages the batch gradients") {
  const Dataset ds = gen_linear(40, 3);
  const ModelParams m0 = build_linear(5, 1, 4);
  TrainConfig cfg = small_rlp(1, UpdateMode::per_epoch);
  cfg.batch_count = 3;
  cfg.optimizer = OptimizerSpec{.rule = OptimizerRule::sgd, .learning_rate = 0.05};
  const TrainResult r = train_rlp(cfg, m0, ds);

  // Rebuild the single update from the batch set and the epoch-1 probes.
  const BatchSet set = balanced_batches(ds.size(), cfg.batch_size, cfg.batch_count, cfg.seed);
  Rng rng(cfg.seed, Stream::probe, 1);
  std::vector<double> theta = flatten(m0);
  std::vector<double> sum(theta.size(), 0.0);
  for (const auto& rows : set.batches) {
    const std::size_t probe = draw_probe(rng, ds.size(), rows);
    const Matrix x = ds.features.select_rows(rows);
    const ForwardCache cache = forward(m0, x);
    const LossOutput out = rlp_batch(x, ds.labels.select_rows(rows), cache.output, ds.features.row(probe));
    const std::vector<double> g = flatten(backward(m0, cache, out.dL_dH));
    for (std::size_t i = 0; i < g.size(); ++i) sum[i] += g[i];
  }
  const std::vector<double> got = flatten(r.model);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    CHECK(got[i] == doctest::Approx(theta[i] - 0.05 * sum[i] / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("training is deterministic") {
  const Dataset ds = gen_nonlinear(80, 5);
  const Dataset test = gen_nonlinear(40, 6);
  for (const LossKind k : {LossKind::rlp, LossKind::rlp_mixup, LossKind::mse, LossKind::mse_mixup}) {
    TrainConfig cfg = small_rlp(3, UpdateMode::per_batch);
    cfg.loss = k;
    cfg.batch_size = 9;
    const ModelParams m0 = build_regression_net(7, 8, 1);
    const TrainResult a = train(cfg, m0, ds, &test);
    const TrainResult b = train(cfg, m0, ds, &test);
    CHECK(a.model == b.model);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].train_loss == b.records[i].train_loss);
      CHECK(a.records[i].test_rlp == b.records[i].test_rlp);
    }
  }
}

TEST_CASE("zero epochs leave the model unchanged") {
  const Dataset ds = gen_linear(30, 1);
  const ModelParams m0 = build_linear(5, 1, 2);
  const TrainResult r = train_rlp(small_rlp(0, UpdateMode::per_batch), m0, ds);
  CHECK(r.model == m0);
  CHECK(r.records.empty());
  CHECK(r.steps == 0);
}

TEST_CASE("evaluation cadence, hook and record fields") {
  const Dataset ds = gen_linear(50, 1);
  const Dataset test = gen_linear(30, 2);
  TrainConfig cfg = small_rlp(7, UpdateMode::per_epoch);
  cfg.eval_every = 3;
  cfg.config_hash = "feedbeef";
  std::vector<std::size_t> hooked;
  const TrainResult r = train_rlp(cfg, build_linear(5, 1, 3), ds, &test,
                                  [&](std::size_t e, const ModelParams&) { hooked.push_back(e); });
  std::vector<std::size_t> epochs;
  for (const auto& rec : r.records) {
    epochs.push_back(rec.epoch);
    CHECK(rec.config_hash == "feedbeef");
    CHECK(std::isfinite(rec.test_mse));
    CHECK(rec.test_rlp >= 0.0);
    CHECK(!rec.accuracy);
  }
  CHECK(epochs == std::vector<std::size_t>{3, 6, 7});
  CHECK(hooked == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7});
  const TrainResult no_test = train_rlp(cfg, build_linear(5, 1, 3), ds);
  CHECK(std::isnan(no_test.records.back().test_mse));
}

TEST_CASE("evaluate on constant and class-blind predictors") {
  // A linear model with zero weights and bias equal to the label mean scores
  // the population variance of the labels as test MSE.
  const Dataset test = gen_linear(400, 9);
  double mean = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) mean += test.labels(i, 0);
  mean /= static_cast<double>(test.size());
  double var = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) var += (test.labels(i, 0) - mean) * (test.labels(i, 0) - mean);
  var /= static_cast<double>(test.size());
  ModelParams constant = build_linear(5, 1, 0);
  constant.layers[0].weight = Matrix(1, 5);
  constant.layers[0].bias = {mean};
  const MetricsRecord r = evaluate(constant, test, 7, 50, 1);
  CHECK(r.test_mse == doctest::Approx(var).epsilon(1e-12));

  // Balanced moons scored by a model that always picks class 0.
  const Dataset moons = gen_moons(200, 0.1, 4);
  ModelParams blind = build_linear(2, 2, 0);
  blind.layers[0].weight = Matrix(2, 2);
  blind.layers[0].bias = {1.0, 0.0};
  const MetricsRecord c = evaluate(blind, moons, 4, 20, 1, true);
  REQUIRE(c.accuracy);
  CHECK(*c.accuracy == 0.5);
  CHECK(*c.macro_f1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rlp training reaches the linear optimum") {
  const Dataset ds = gen_linear(200, 1);
  const Dataset test = gen_linear(200, 2);
  TrainConfig cfg = small_rlp(150, UpdateMode::per_batch);
  cfg.batch_count = 50;
  cfg.optimizer = OptimizerSpec{.rule = OptimizerRule::adam, .learning_rate = 1e-2};
  const TrainResult r = train_rlp(cfg, build_linear(5, 1, 1), ds, &test);
  CHECK(r.records.back().test_mse < 1e-3);
  CHECK(r.records.back().test_mse < r.records.front().test_mse);
}

TEST_CASE("trainer errors") {
  const Dataset ds = gen_linear(30, 1);
  CHECK_THROWS_AS(train_rlp(small_rlp(1, UpdateMode::per_batch), build_linear(3, 1, 0), ds), ShapeError);
  CHECK_THROWS_AS(train_rlp(small_rlp(1, UpdateMode::per_batch), build_linear(5, 1, 0), Dataset{}), ConfigError);
  TrainConfig big = small_rlp(1, UpdateMode::per_batch);
  big.batch_size = 31;
  CHECK_THROWS_AS(train_rlp(big, build_linear(5, 1, 0), ds), ConfigError);
  TrainConfig base = small_rlp(1, UpdateMode::per_batch);
  base.loss = LossKind::mse;
  base.minibatch = 0;
  CHECK_THROWS_AS(train(base, build_linear(5, 1, 0), ds), ConfigError);
  TrainConfig nan_lr = small_rlp(2, UpdateMode::per_batch);
  nan_lr.optimizer = OptimizerSpec{.rule = OptimizerRule::sgd, .learning_rate = 1e300};
  CHECK_THROWS_AS(train_rlp(nan_lr, build_regression_net(5, 4, 0), ds), NumericError);
  CHECK(parse_loss_kind("mse_l2") == LossKind::mse_l2);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), ConfigError);
  CHECK_THROWS_AS(parse_update_mode("sometimes"), ConfigError);
}
