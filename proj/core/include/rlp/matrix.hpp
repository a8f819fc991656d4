#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rlp {

/// Row-major dense matrix of doubles. This is the only numeric container in
/// the library: features, labels, parameters and gradients all use it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  /// Takes ownership of `data`, which must hold rows * cols values in
  /// row-major order. Throws ShapeError on a size mismatch and DataError on
  /// non-finite values.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Nested-list construction for tests and small literals, e.g.
  /// `Matrix{{1, 2}, {3, 4}}`.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);
  static Matrix row_vector(std::span<const double> values);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  /// Copies the listed rows, in order, into a new matrix.
  [[nodiscard]] Matrix select_rows(std::span<const std::size_t> indices) const;

  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products use a fixed summation order (row-major, left to right over the
// inner index) so results are bit-reproducible across runs.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ · b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a · bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ · v for a column vector given as a span.
std::vector<double> matvec_t(const Matrix& a, std::span<const double> v);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix neg(const Matrix& a);
/// a + s · b
Matrix axpy(const Matrix& a, double s, const Matrix& b);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
/// Largest elementwise |a - b| / max(1, |b|).
double max_rel_diff(const Matrix& a, const Matrix& b);

}  // namespace rlp
