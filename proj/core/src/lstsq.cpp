#include "rlp/lstsq.hpp"

#include <Eigen/SVD>
#include <string>

#include "rlp/error.hpp"

namespace rlp {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

LstsqResult least_squares_project(const Matrix& x, const Matrix& b, double rtol) {
  if (x.rows() == 0 || x.cols() == 0) throw ShapeError("least_squares_project: empty design matrix");
  if (x.rows() != b.rows()) {
    throw ShapeError("least_squares_project: X has " + std::to_string(x.rows()) + " rows, B has " +
                     std::to_string(b.rows()));
  }
  if (!(rtol > 0.0)) throw DataError("least_squares_project: rtol must be positive");
  if (!x.all_finite() || !b.all_finite()) throw DataError("least_squares_project: non-finite input");

  const Eigen::MatrixXd xm = view(x);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(xm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double floor = rtol * sigma_max;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > floor) ++rank;
  }

  // W = V_r S_r⁻¹ U_rᵀ B
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(xm.cols(), b.cols());
  if (rank > 0) {
    const Eigen::MatrixXd bm = view(b);
    Eigen::MatrixXd coeffs = svd.matrixU().leftCols(rank).transpose() * bm;
    for (Eigen::Index i = 0; i < rank; ++i) coeffs.row(i) /= sigma(i);
    w = svd.matrixV().leftCols(rank) * coeffs;
  }

  Matrix solution(x.cols(), b.cols());
  for (std::size_t i = 0; i < solution.rows(); ++i)
    for (std::size_t j = 0; j < solution.cols(); ++j)
      solution(i, j) = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  if (!solution.all_finite()) throw NumericError("least_squares_project: non-finite solution");
  return {std::move(solution), static_cast<std::size_t>(rank), floor};
}

LstsqResult projection_operator(const Matrix& x, double rtol) {
  return least_squares_project(x, Matrix::identity(x.rows()), rtol);
}

}  // namespace rlp
