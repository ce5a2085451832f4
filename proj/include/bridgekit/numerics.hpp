#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "bridgekit/errors.hpp"

namespace bridgekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Solves A x = b for symmetric positive definite A by Cholesky.  Only the
// lower triangle of A is read.
inline Vector solve_spd(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("solve_spd: matrix is not square");
  if (a.rows() != b.size())
    throw DimensionMismatch("solve_spd: size of b does not match A");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("solve_spd: Cholesky pivot <= 0");
  return llt.solve(b);
}

struct SignedLogDet {
  int sign = 0;              // -1, 0, or +1; 0 means numerically singular
  double log_abs_det = 0.0;  // meaningful only when sign != 0
};

// log|det A| with sign, via LU with partial pivoting.  A pivot is treated as
// zero when it is below 1e-12 relative to the largest |entry| of A.
inline SignedLogDet log_det_signed(const Matrix& a) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("log_det_signed: matrix is not square");
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale))
    return {0, -std::numeric_limits<double>::infinity()};
  Eigen::PartialPivLU<Matrix> lu(a);
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  double log_abs = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double pivot = lu.matrixLU()(i, i);
    if (!std::isfinite(pivot) || std::abs(pivot) < 1e-12 * scale)
      return {0, -std::numeric_limits<double>::infinity()};
    if (pivot < 0) sign = -sign;
    log_abs += std::log(std::abs(pivot));
  }
  return {sign, log_abs};
}

}  // namespace bridgekit
