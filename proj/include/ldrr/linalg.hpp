#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "ldrr/error.hpp"

namespace ldrr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Relative cutoff (times the largest singular value) below which singular
// values are treated as zero in pseudo-inverses and rank computations.
inline constexpr double kPinvRelTol = 1e-10;

MatrixXd symmetrize(const MatrixXd& a);

double max_abs(const MatrixXd& a);

// Cholesky factor of a symmetric positive definite matrix. Throws Error(code)
// when the factorization fails or a pivot is not strictly positive.
Eigen::LLT<MatrixXd> spd_factor(const MatrixXd& a, ErrorCode code,
                                std::string_view what);

struct SymmetricPinv {
  MatrixXd pinv;
  double min_singular = 0.0;  // over all singular values, including dropped ones
  double max_singular = 0.0;
  int rank = 0;
};

// Moore-Penrose inverse of a symmetric matrix through its eigendecomposition.
SymmetricPinv symmetric_pinv(const MatrixXd& a, double rel_tol = kPinvRelTol);

// (A^+)^{1/2} of a symmetric PSD matrix. Eigenvalues at or below
// rel_tol * max eigenvalue (including negative roundoff) map to zero.
MatrixXd psd_pinv_sqrt(const MatrixXd& a, double rel_tol = kPinvRelTol);

int numerical_rank(const MatrixXd& a, double rel_tol = kPinvRelTol);

}  // namespace ldrr
