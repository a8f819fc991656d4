#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gradcheck.hpp"
#include "rlp/error.hpp"
#include "rlp/loss.hpp"

using namespace rlp;
using rlp::testing::random_matrix;

namespace {

// Normal-equation solve for a full-column-rank X, used as the RLP oracle.
Matrix solve_normal(const Matrix& x, const Matrix& b) {
  const std::size_t d = x.cols(), c = b.cols();
  Matrix g = matmul_tn(x, x);
  Matrix r = matmul_tn(x, b);
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < d; ++i)
      if (std::abs(g(i, col)) > std::abs(g(piv, col))) piv = i;
    for (std::size_t j = 0; j < d; ++j) std::swap(g(col, j), g(piv, j));
    for (std::size_t j = 0; j < c; ++j) std::swap(r(col, j), r(piv, j));
    for (std::size_t i = 0; i < d; ++i) {
      if (i == col) continue;
      const double f = g(i, col) / g(col, col);
      for (std::size_t j = 0; j < d; ++j) g(i, j) -= f * g(col, j);
      for (std::size_t j = 0; j < c; ++j) r(i, j) -= f * r(col, j);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < c; ++j) r(i, j) /= g(i, i);
  return r;
}

double rlp_oracle(const Matrix& x, const Matrix& y, const Matrix& h, std::span<const double> probe) {
  const Matrix d = solve_normal(x, sub(y, h));
  double value = 0.0;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < d.rows(); ++k) s += d(k, j) * probe[k];
    value += s * s;
  }
  return value;
}

struct Instance {
  Matrix x, y, h;
  std::vector<double> probe;
};

Instance random_instance(Rng& rng, std::size_t m, std::size_t d, std::size_t c) {
  Instance in{random_matrix(rng, m, d), random_matrix(rng, m, c), random_matrix(rng, m, c), std::vector<double>(d)};
  for (auto& v : in.probe) v = rng.uniform(-1, 1);
  return in;
}

}  // namespace

TEST_CASE("mse examples") {
  CHECK(mse(Matrix{{1, 2}}, Matrix{{1, 2}}).value == 0.0);
  const LossOutput one = mse(Matrix{{0}}, Matrix{{2}});
  CHECK(one.value == 4.0);
  CHECK(one.dL_dH == Matrix{{-4}});

  Rng rng(31, Stream::theory);
  const Matrix h = random_matrix(rng, 5, 2), y = random_matrix(rng, 5, 2);
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 2; ++j) s += (h(i, j) - y(i, j)) * (h(i, j) - y(i, j));
  const LossOutput out = mse(h, y);
  CHECK(out.value == doctest::Approx(s / 5).epsilon(1e-14));
  CHECK(out.dL_dH(3, 1) == doctest::Approx(2 * (h(3, 1) - y(3, 1)) / 5).epsilon(1e-14));
  CHECK_THROWS_AS(mse(Matrix(2, 1), Matrix(3, 1)), ShapeError);
}

TEST_CASE("cross-entropy against a log-sum-exp oracle") {
  Rng rng(32, Stream::theory);
  const Matrix h = random_matrix(rng, 4, 3, -3, 3);
  Matrix y(4, 3);
  for (std::size_t i = 0; i < 4; ++i) y(i, i % 3) = 1.0;
  double total = 0.0;
  Matrix grad(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    double mx = -1e300, z = 0.0;
    for (std::size_t j = 0; j < 3; ++j) mx = std::max(mx, h(i, j));
    for (std::size_t j = 0; j < 3; ++j) z += std::exp(h(i, j) - mx);
    for (std::size_t j = 0; j < 3; ++j) {
      const double logp = h(i, j) - mx - std::log(z);
      total -= y(i, j) * logp;
      grad(i, j) = (std::exp(logp) - y(i, j)) / 4;
    }
  }
  const LossOutput out = cross_entropy(h, y);
  CHECK(out.value == doctest::Approx(total / 4).epsilon(1e-13));
  CHECK(max_rel_diff(out.dL_dH, grad) < 1e-13);
  // Huge logits stay finite.
  CHECK(std::isfinite(cross_entropy(Matrix{{1000, -1000}}, Matrix{{0, 1}}).value));
}

TEST_CASE("rlp hand example") {
  const double probe[] = {3.0};
  const LossOutput out = rlp_batch(Matrix{{1}, {2}}, Matrix{{1}, {2}}, Matrix{{0}, {0}}, probe);
  CHECK(out.value == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("rlp matches the normal-equation oracle and both routes agree") {
  Rng rng(33, Stream::theory);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 1 + rng.below(4), c = 1 + rng.below(3), m = d + 1 + rng.below(5);
    const Instance in = random_instance(rng, m, d, c);
    const LossOutput lit = rlp_batch(in.x, in.y, in.h, in.probe);
    CHECK(lit.value == doctest::Approx(rlp_oracle(in.x, in.y, in.h, in.probe)).epsilon(1e-8));
    const LossOutput fast = rlp_batch(make_projector(in.x), in.y, in.h, in.probe);
    CHECK(fast.value == doctest::Approx(lit.value).epsilon(1e-10));
    CHECK(max_rel_diff(fast.dL_dH, lit.dL_dH) < 1e-10);
    CHECK(lit.value >= 0.0);
  }
}

TEST_CASE("rlp zero at truth") {
  Rng rng(34, Stream::theory);
  const Instance in = random_instance(rng, 6, 3, 2);
  const LossOutput out = rlp_batch(in.x, in.y, in.y, in.probe);
  CHECK(out.value == 0.0);
  CHECK(max_abs(out.dL_dH) == 0.0);
}

TEST_CASE("rlp sensitivity matches central differences") {
  Rng rng(35, Stream::theory);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.below(4), c = 1 + rng.below(3), m = d + rng.below(5);
    Instance in = random_instance(rng, m, d, c);
    const LossOutput out = rlp_batch(in.x, in.y, in.h, in.probe);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double keep = in.h(i, j);
        in.h(i, j) = keep + eps;
        const double up = rlp_batch(in.x, in.y, in.h, in.probe).value;
        in.h(i, j) = keep - eps;
        const double down = rlp_batch(in.x, in.y, in.h, in.probe).value;
        in.h(i, j) = keep;
        const double numeric = (up - down) / (2 * eps);
        CHECK(std::abs(out.dL_dH(i, j) - numeric) / std::max(1.0, std::abs(numeric)) < 1e-6);
      }
    }
  }
}

TEST_CASE("rlp invariances: row permutation and probe scaling") {
  Rng rng(36, Stream::theory);
  for (int t = 0; t < 20; ++t) {
    const Instance in = random_instance(rng, 7, 3, 2);
    const double base = rlp_batch(in.x, in.y, in.h, in.probe).value;
    std::vector<std::size_t> perm(7);
    for (std::size_t i = 0; i < 7; ++i) perm[i] = i;
    rng.shuffle(std::span(perm));
    const double permuted =
        rlp_batch(in.x.select_rows(perm), in.y.select_rows(perm), in.h.select_rows(perm), in.probe).value;
    CHECK(permuted == doctest::Approx(base).epsilon(1e-10));
    const double s = rng.uniform(-3, 3);
    std::vector<double> scaled = in.probe;
    for (auto& v : scaled) v *= s;
    CHECK(rlp_batch(in.x, in.y, in.h, scaled).value == doctest::Approx(s * s * base).epsilon(1e-10));
  }
}

TEST_CASE("rlp rejects mismatched inputs") {
  const double probe[] = {1.0, 2.0};
  CHECK_THROWS_AS(rlp_batch(Matrix(3, 2), Matrix(3, 1), Matrix(2, 1), probe), ShapeError);
  CHECK_THROWS_AS(rlp_batch(Matrix(3, 2), Matrix(3, 1), Matrix(3, 1), std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("mixup pairs") {
  const Matrix xa{{0, 2}}, ya{{1}}, xb{{4, -2}}, yb{{3}};
  auto [x1, y1] = mixup_pairs(xa, ya, xb, yb, 1.0);
  CHECK(x1 == xa);
  CHECK(y1 == ya);
  auto [x0, y0] = mixup_pairs(xa, ya, xb, yb, 0.0);
  CHECK(x0 == xb);
  auto [xh, yh] = mixup_pairs(xa, ya, xb, yb, 0.5);
  CHECK(xh == Matrix{{2, 0}});
  CHECK(yh == Matrix{{2}});
  Rng rng(37, Stream::theory);
  for (int t = 0; t < 100; ++t) {
    const double lam = rng.uniform();
    const auto [x, y] = mixup_pairs(xa, ya, xb, yb, lam);
    CHECK(x(0, 0) >= 0.0);
    CHECK(x(0, 0) <= 4.0);
    CHECK(y(0, 0) >= 1.0);
    CHECK(y(0, 0) <= 3.0);
  }
  CHECK_THROWS_AS(mixup_pairs(xa, ya, xb, yb, 1.5), ConfigError);
}

TEST_CASE("mixup rlp: endpoints, truth and skipped pairs") {
  Rng rng(38, Stream::theory);
  const ModelParams model = build_regression_net(3, 5, 2);
  const Matrix xa = random_matrix(rng, 6, 3), xb = random_matrix(rng, 6, 3);
  const Matrix ya = random_matrix(rng, 6, 1), yb = random_matrix(rng, 6, 1);

  // lambda = 1 is the sum-form loss on batch a alone.
  const auto one = rlp_mixup_batch(xa, ya, xb, yb, 1.0, model);
  REQUIRE(one.has_value());
  const auto sum_a = row_sum(xa);
  CHECK(one->loss.value == doctest::Approx(rlp_oracle(xa, ya, predict(model, xa), sum_a)).epsilon(1e-9));
  const auto zero = rlp_mixup_batch(xa, ya, xb, yb, 0.0, model);
  CHECK(zero->loss.value == doctest::Approx(rlp_oracle(xb, yb, predict(model, xb), row_sum(xb))).epsilon(1e-9));

  // Labels produced by an affine model mix into that model's own outputs.
  const ModelParams lin = build_linear(3, 1, 5);
  const auto truth = rlp_mixup_batch(xa, predict(lin, xa), xb, predict(lin, xb), 0.37, lin);
  CHECK(truth->loss.value < 1e-24);

  CHECK_FALSE(rlp_mixup_batch(xa, ya, random_matrix(rng, 5, 3), random_matrix(rng, 5, 1), 0.5, model).has_value());
  CHECK(row_sum(Matrix{{1, 2}, {3, 4}}) == std::vector<double>{4, 6});
}

TEST_CASE("probes avoid batch rows when possible") {
  Rng rng(39, Stream::probe);
  const std::size_t batch[] = {0, 1, 2, 3};
  for (int t = 0; t < 500; ++t) {
    const std::size_t p = draw_probe(rng, 5, batch);
    CHECK(p == 4);
  }
  for (int t = 0; t < 50; ++t) CHECK(draw_probe(rng, 4, batch) < 4);
}

TEST_CASE("rlp metric: perfect model, determinism, quadratic growth") {
  const Dataset ds = gen_linear(300, 0);
  ModelParams perfect = build_linear(5, 1, 0);
  const double coef[] = {0.5, 1.5, 2.5, 3.5, 4.5};
  for (std::size_t j = 0; j < 5; ++j) perfect.layers[0].weight(0, j) = coef[j];
  perfect.layers[0].bias[0] = 0.0;
  CHECK(rlp_metric(perfect, ds, 7, 100, 1) < 1e-12);

  const ModelParams some = build_regression_net(5, 8, 3);
  CHECK(rlp_metric(some, ds, 7, 100, 1) == rlp_metric(some, ds, 7, 100, 1));
  const RlpEvaluator ev(ds, 7, 100, 1);
  CHECK(ev(some) == doctest::Approx(ev.from_predictions(predict(some, ds.features))).epsilon(1e-14));

  // One-dimensional data y = 2x; a slope error of delta gives a metric of order delta².
  Rng rng(40, Stream::theory);
  Matrix x(200, 1), y(200, 1);
  for (std::size_t i = 0; i < 200; ++i) x(i, 0) = rng.uniform(0.5, 1.5), y(i, 0) = 2 * x(i, 0);
  const Dataset line(x, y);
  std::vector<double> ratios;
  for (const double delta : {1e-3, 1e-2, 1e-1, 1.0}) {
    ModelParams m{{Layer{Matrix{{2.0 + delta}}, {0.0}, Activation::none}}};
    ratios.push_back(rlp_metric(m, line, 3, 50, 2) / (delta * delta));
  }
  for (double r : ratios) CHECK(r == doctest::Approx(ratios.front()).epsilon(1e-8));
}

TEST_CASE("loss gradients through every architecture") {
  for (const auto arch : testing::kArchs) {
    for (const auto loss : testing::kGateLosses) {
      if (!testing::applicable(arch, loss)) continue;
      for (std::uint64_t seed : {1, 2, 3}) {
        const auto r = testing::gradient_gate(arch, loss, seed);
        INFO(testing::name_of(arch) << " x " << testing::name_of(loss) << " seed " << seed << " worst " << r.worst);
        CHECK(r.worst < 1e-5);
      }
    }
  }
}
