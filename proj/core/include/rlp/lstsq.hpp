#pragma once

#include <cstddef>

#include "rlp/matrix.hpp"

namespace rlp {

inline constexpr double kDefaultRtol = 1e-10;

struct LstsqResult {
  Matrix solution;  ///< d x c
  std::size_t rank = 0;
  double singular_floor = 0.0;  ///< singular values at or below this were dropped
};

/// Minimum-norm solution of min_W ||X W - B||_F through a thin SVD of X.
///
/// Singular values below rtol * sigma_max are truncated, so for full-column-rank
/// X the result equals (XᵀX)⁻¹XᵀB and for rank-deficient X it is the
/// pseudo-inverse solution. XᵀX is never formed.
///
/// Throws DataError for non-finite input, ShapeError when X and B disagree on
/// the number of rows.
LstsqResult least_squares_project(const Matrix& x, const Matrix& b, double rtol = kDefaultRtol);

/// The d x M operator A with A·B = least_squares_project(X, B).solution for
/// every B, i.e. the (truncated) pseudo-inverse of X.
LstsqResult projection_operator(const Matrix& x, double rtol = kDefaultRtol);

}  // namespace rlp
