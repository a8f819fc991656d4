#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "rlp/error.hpp"
#include "rlp/lstsq.hpp"

using namespace rlp;
using rlp::testing::random_matrix;

namespace {

// Gauss-Jordan with partial pivoting on [G | B]; G must be nonsingular.
Matrix solve(const Matrix& g, const Matrix& b) {
  const std::size_t d = g.rows(), c = b.cols();
  Matrix aug(d, d + c);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug(i, j) = g(i, j);
    for (std::size_t j = 0; j < c; ++j) aug(i, d + j) = b(i, j);
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(aug(r, col)) > std::abs(aug(piv, col))) piv = r;
    for (std::size_t j = 0; j < d + c; ++j) std::swap(aug(col, j), aug(piv, j));
    const double p = aug(col, col);
    for (std::size_t j = 0; j < d + c; ++j) aug(col, j) /= p;
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = aug(r, col);
      for (std::size_t j = 0; j < d + c; ++j) aug(r, j) -= f * aug(col, j);
    }
  }
  Matrix w(d, c);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < c; ++j) w(i, j) = aug(i, d + j);
  return w;
}

// Solves (XᵀX) W = XᵀB with sums written out by hand.
Matrix normal_equations(const Matrix& x, const Matrix& b) {
  const std::size_t d = x.cols(), c = b.cols();
  Matrix g(d, d), rhs(d, c);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t r = 0; r < x.rows(); ++r) g(i, j) += x(r, i) * x(r, j);
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t r = 0; r < x.rows(); ++r) rhs(i, j) += x(r, i) * b(r, j);
  }
  return solve(g, rhs);
}

}  // namespace

TEST_CASE("full-rank solve matches the normal-equation oracle") {
  Rng rng(11, Stream::theory);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const std::size_t m = d + 1 + rng.below(6);
    const std::size_t c = 1 + rng.below(3);
    const Matrix x = random_matrix(rng, m, d);
    const Matrix b = random_matrix(rng, m, c);
    const LstsqResult r = least_squares_project(x, b);
    CHECK(r.rank == d);
    CHECK(max_rel_diff(r.solution, normal_equations(x, b)) < 1e-9);
    const LstsqResult op = projection_operator(x);
    CHECK(max_rel_diff(matmul(op.solution, b), r.solution) < 1e-10);
  }
}

TEST_CASE("hand example: slope of (1, 2) on (1, 2) is one") {
  const LstsqResult r = least_squares_project(Matrix{{1}, {2}}, Matrix{{1}, {2}});
  CHECK(r.solution(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rank-deficient input gives the minimum-norm solution") {
  Rng rng(12, Stream::theory);
  for (int trial = 0; trial < 20; ++trial) {
    // Third column duplicates the first, so the null space is (1, 0, -1).
    Matrix x = random_matrix(rng, 6, 3);
    for (std::size_t i = 0; i < 6; ++i) x(i, 2) = x(i, 0);
    const Matrix b = random_matrix(rng, 6, 2);
    const LstsqResult r = least_squares_project(x, b);
    CHECK(r.rank == 2);
    for (std::size_t j = 0; j < 2; ++j) {
      // Orthogonal to the null space.
      CHECK(std::abs(r.solution(0, j) - r.solution(2, j)) < 1e-10);
      // Residual orthogonal to the column space.
      const Matrix res = sub(matmul(x, r.solution), b);
      const Matrix g = matmul_tn(x, res);
      CHECK(max_abs(g) < 1e-10);
    }
    // Oracle: drop the duplicate column, solve, then split the weight evenly.
    Matrix x2(6, 2);
    for (std::size_t i = 0; i < 6; ++i) x2(i, 0) = x(i, 0), x2(i, 1) = x(i, 1);
    const Matrix w2 = normal_equations(x2, b);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(r.solution(0, j) == doctest::Approx(w2(0, j) / 2).epsilon(1e-8));
      CHECK(r.solution(1, j) == doctest::Approx(w2(1, j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("more columns than rows interpolates with minimum norm") {
  Rng rng(13, Stream::theory);
  const Matrix x = random_matrix(rng, 3, 7);
  const Matrix b = random_matrix(rng, 3, 1);
  const LstsqResult r = least_squares_project(x, b);
  CHECK(r.rank == 3);
  CHECK(max_abs(sub(matmul(x, r.solution), b)) < 1e-10);
  // Minimum norm: the solution lies in the row space, W = Xᵀ z with (X Xᵀ) z = b.
  Matrix gram(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 7; ++k) gram(i, j) += x(i, k) * x(j, k);
  const Matrix z = solve(gram, b);
  CHECK(max_rel_diff(r.solution, matmul_tn(x, z)) < 1e-8);
}

TEST_CASE("solver errors") {
  CHECK_THROWS_AS(least_squares_project(Matrix(3, 2), Matrix(2, 1)), ShapeError);
  Matrix bad(2, 1);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(least_squares_project(bad, Matrix(2, 1)), DataError);
  const LstsqResult zero = least_squares_project(Matrix(4, 2), Matrix(4, 1, 1.0));
  CHECK(zero.rank == 0);
  CHECK(max_abs(zero.solution) == 0.0);
}
