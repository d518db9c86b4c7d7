#include "ldrr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ldrr {

MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double max_abs(const MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

Eigen::LLT<MatrixXd> spd_factor(const MatrixXd& a, ErrorCode code,
                                std::string_view what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " is not square");
  }
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(code, std::string(what) + " is not positive definite");
  }
  const auto diag = llt.matrixL().toDenseMatrix().diagonal();
  if (a.rows() > 0 && !(diag.minCoeff() > 0.0 && diag.allFinite())) {
    throw Error(code, std::string(what) + " is not positive definite");
  }
  return llt;
}

SymmetricPinv symmetric_pinv(const MatrixXd& a, double rel_tol) {
  SymmetricPinv out;
  const auto n = a.rows();
  out.pinv = MatrixXd::Zero(n, n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrize(a));
  const VectorXd& values = eig.eigenvalues();
  const VectorXd mags = values.cwiseAbs();
  out.max_singular = mags.maxCoeff();
  out.min_singular = mags.minCoeff();
  const double cutoff = rel_tol * out.max_singular;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (mags(k) > cutoff && mags(k) > 0.0) {
      const VectorXd v = eig.eigenvectors().col(k);
      out.pinv.noalias() += (v / values(k)) * v.transpose();
      ++out.rank;
    }
  }
  out.pinv = symmetrize(out.pinv);
  return out;
}

MatrixXd psd_pinv_sqrt(const MatrixXd& a, double rel_tol) {
  const auto n = a.rows();
  MatrixXd out = MatrixXd::Zero(n, n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrize(a));
  const VectorXd& values = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(values.maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values(k) > cutoff && values(k) > 0.0) {
      const VectorXd v = eig.eigenvectors().col(k);
      out.noalias() += (v / std::sqrt(values(k))) * v.transpose();
    }
  }
  return symmetrize(out);
}

int numerical_rank(const MatrixXd& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = rel_tol * s(0);
  return static_cast<int>((s.array() > cutoff).count());
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotCentered: return "NotCentered";
    case ErrorCode::SingularSigma: return "SingularSigma";
    case ErrorCode::SingularSigmaW: return "SingularSigmaW";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ClassMissingInFold: return "ClassMissingInFold";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::NonNumericFeature: return "NonNumericFeature";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::KTooLarge:
      return ErrorClass::Usage;
    case ErrorCode::NotCentered:
    case ErrorCode::SingularSigma:
    case ErrorCode::SingularSigmaW:
    case ErrorCode::SingularDesign:
    case ErrorCode::CholeskyFailure:
    case ErrorCode::NotConverged:
      return ErrorClass::Numeric;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace ldrr
