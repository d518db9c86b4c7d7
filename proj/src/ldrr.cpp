#include "ldrr/ldrr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ldrr {

namespace {

void check_columns(Eigen::Index expected, Eigen::Index actual) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(expected) + " feature columns, got " +
                    std::to_string(actual));
  }
}

VectorXd log_prior_term(const VectorXd& pi_hat) {
  return -2.0 * pi_hat.array().log().matrix();
}

}  // namespace

ClassStats estimate_class_stats(const LabeledDataset& data) {
  data.validate(/*require_all_classes=*/false);
  ClassStats s;
  s.counts = data.class_counts();
  const auto L = data.L();
  for (Eigen::Index l = 0; l < L; ++l) {
    if (s.counts[static_cast<std::size_t>(l)] == 0) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(l) + " has no samples");
    }
  }
  const double n = static_cast<double>(data.n());
  s.M_hat = MatrixXd::Zero(data.p(), L);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    s.M_hat.col(data.labels[static_cast<std::size_t>(i)]) += data.X.row(i).transpose();
  }
  s.pi_hat.resize(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const double count = static_cast<double>(s.counts[static_cast<std::size_t>(l)]);
    s.M_hat.col(l) /= count;
    s.pi_hat(l) = count / n;
  }
  return s;
}

MatrixXd estimate_H(const LabeledDataset& data, const MatrixXd& B_hat) {
  check_columns(data.p(), B_hat.rows());
  if (B_hat.cols() != data.L()) {
    throw Error(ErrorCode::DimensionMismatch, "estimate_H: B has wrong column count");
  }
  const double n = static_cast<double>(data.n());
  const MatrixXd fitted = data.X * B_hat;
  MatrixXd h = -(fitted.transpose() * fitted) / n;
  const auto counts = data.class_counts();
  for (Eigen::Index l = 0; l < data.L(); ++l) {
    h(l, l) += static_cast<double>(counts[static_cast<std::size_t>(l)]) / n;
  }
  return symmetrize(h);
}

BstarEstimate estimate_Bstar(const MatrixXd& B_hat, const MatrixXd& H_hat) {
  if (H_hat.rows() != H_hat.cols() || H_hat.rows() != B_hat.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "estimate_Bstar: H must be L x L");
  }
  const SymmetricPinv inv = symmetric_pinv(H_hat);
  BstarEstimate out;
  out.B_star = B_hat * inv.pinv;
  out.h_min_singular = inv.min_singular;
  out.h_max_singular = inv.max_singular;
  out.near_singular = !(inv.min_singular >= 1e-8 * inv.max_singular) || inv.max_singular == 0.0;
  return out;
}

FeatureTransform FeatureTransform::identity(Eigen::Index p) {
  return {VectorXd::Zero(p), VectorXd::Ones(p)};
}

FeatureTransform FeatureTransform::fit(const MatrixXd& X, bool standardize) {
  FeatureTransform t = identity(X.cols());
  if (X.rows() == 0) return t;
  t.mean = X.colwise().mean().transpose();
  if (standardize) {
    const MatrixXd centered = X.rowwise() - t.mean.transpose();
    const VectorXd sd =
        (centered.colwise().squaredNorm() / static_cast<double>(X.rows())).cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      t.scale(j) = sd(j) > 0.0 ? sd(j) : 1.0;
    }
  }
  return t;
}

MatrixXd FeatureTransform::apply(const MatrixXd& X) const {
  check_columns(mean.size(), X.cols());
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

VectorXd FeatureTransform::apply_row(const Eigen::Ref<const VectorXd>& x) const {
  check_columns(mean.size(), x.size());
  return (x - mean).cwiseQuotient(scale);
}

LdrrModel assemble_ldrr(const LabeledDataset& transformed, MatrixXd B_hat,
                        const PenaltyConfig& penalty, FeatureTransform transform) {
  LdrrModel model;
  model.stats = estimate_class_stats(transformed);
  model.H_hat = estimate_H(transformed, B_hat);
  const BstarEstimate est = estimate_Bstar(B_hat, model.H_hat);
  model.B_hat = std::move(B_hat);
  model.B_star_hat = est.B_star;
  model.h_min_singular = est.h_min_singular;
  model.h_max_singular = est.h_max_singular;
  model.h_near_singular = est.near_singular;
  model.penalty = penalty;
  model.transform = std::move(transform);
  return model;
}

LdrrModel fit_ldrr(const LabeledDataset& data, const PenaltyConfig& penalty,
                   const FitOptions& opts) {
  data.validate();
  FeatureTransform transform = FeatureTransform::fit(data.X, opts.standardize);
  LabeledDataset centered = data;
  centered.X = transform.apply(data.X);
  const RegressionFit fit = fit_penalized(centered.X, centered.Y, penalty, opts.solver);
  LdrrModel model = assemble_ldrr(centered, fit.B_hat, penalty, std::move(transform));
  model.objective = fit.objective;
  model.converged = fit.converged;
  model.selected_rank = fit.selected_rank;
  return model;
}

VectorXd discriminant_scores(const LdrrModel& model, const Eigen::Ref<const VectorXd>& x) {
  const VectorXd xt = model.transform.apply_row(x);
  const auto L = model.classes();
  VectorXd scores(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const auto b = model.B_star_hat.col(l);
    scores(l) = model.stats.M_hat.col(l).dot(b) - 2.0 * xt.dot(b) -
                2.0 * std::log(model.stats.pi_hat(l));
  }
  return scores;
}

std::vector<int> predict(const LdrrModel& model, const MatrixXd& X_new) {
  check_columns(model.dim(), X_new.cols());
  std::vector<int> out(static_cast<std::size_t>(X_new.rows()));
  if (X_new.rows() == 0) return out;
  const auto L = model.classes();
  VectorXd offsets(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    offsets(l) = model.stats.M_hat.col(l).dot(model.B_star_hat.col(l)) -
                 2.0 * std::log(model.stats.pi_hat(l));
  }
  const MatrixXd scores =
      (-2.0 * (model.transform.apply(X_new) * model.B_star_hat)).rowwise() +
      offsets.transpose();
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = argmin_index(scores.row(i).transpose());
  }
  return out;
}

ScatterMatrices class_scatter_matrices(const LabeledDataset& data, const MatrixXd& B_hat) {
  check_columns(data.p(), B_hat.rows());
  const ClassStats stats = estimate_class_stats(data);
  const MatrixXd Z = data.X * B_hat;
  const MatrixXd z_means = B_hat.transpose() * stats.M_hat;  // L x L, columns per class
  const double n = static_cast<double>(data.n());
  ScatterMatrices out;
  out.C_b = z_means * stats.pi_hat.asDiagonal() * z_means.transpose();
  MatrixXd within = Z;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    within.row(i) -= z_means.col(data.labels[static_cast<std::size_t>(i)]).transpose();
  }
  out.C_w = within.transpose() * within / n;
  out.C_b = symmetrize(out.C_b);
  out.C_w = symmetrize(out.C_w);
  return out;
}

FisherDirections fisher_directions(const MatrixXd& C_b, const MatrixXd& C_w,
                                   std::optional<int> K) {
  const auto L = C_b.rows();
  if (C_b.cols() != L || C_w.rows() != L || C_w.cols() != L) {
    throw Error(ErrorCode::DimensionMismatch, "fisher_directions: C_b, C_w must be L x L");
  }
  if (K && *K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");

  const MatrixXd root = psd_pinv_sqrt(C_w);
  const MatrixXd pencil = symmetrize(root * C_b * root);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(pencil);
  const VectorXd values = eig.eigenvalues().reverse();
  const MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  FisherDirections out;
  const double top = L > 0 ? std::max(values(0), 0.0) : 0.0;
  for (Eigen::Index k = 0; k < L; ++k) {
    if (values(k) > 0.0 && values(k) > kPinvRelTol * top) ++out.rank;
  }
  out.eigenvalues = values.head(out.rank);

  const int k_used =
      K ? *K : static_cast<int>(std::min<Eigen::Index>(std::max<Eigen::Index>(L - 1, 0), out.rank));
  if (k_used > out.rank) {
    throw Error(ErrorCode::KTooLarge, "K = " + std::to_string(k_used) +
                                          " exceeds the rank " + std::to_string(out.rank) +
                                          " of the Fisher pencil");
  }
  out.directions = root * vectors.leftCols(k_used);
  for (int k = 0; k < k_used; ++k) {
    auto col = out.directions.col(k);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < L; ++i) {
      if (std::abs(col(i)) > 1e-12 * scale) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  return out;
}

namespace {

LdrrFModel assemble_fisher(MatrixXd B_hat, ScatterMatrices scatter, ClassStats stats,
                           std::optional<int> K) {
  const FisherDirections dirs = fisher_directions(scatter.C_b, scatter.C_w, K);
  LdrrFModel model;
  model.B_hat = std::move(B_hat);
  model.C_b = std::move(scatter.C_b);
  model.C_w = std::move(scatter.C_w);
  model.directions = dirs.directions;
  model.eigenvalues = dirs.eigenvalues;
  model.K = static_cast<int>(dirs.directions.cols());
  model.stats = std::move(stats);
  return model;
}

}  // namespace

LdrrFModel fit_ldrr_f(const LabeledDataset& data, const PenaltyConfig& penalty,
                      std::optional<int> K, const FitOptions& opts) {
  data.validate();
  FeatureTransform transform = FeatureTransform::fit(data.X, opts.standardize);
  LabeledDataset centered = data;
  centered.X = transform.apply(data.X);
  const RegressionFit fit = fit_penalized(centered.X, centered.Y, penalty, opts.solver);
  LdrrFModel model = assemble_fisher(fit.B_hat, class_scatter_matrices(centered, fit.B_hat),
                                     estimate_class_stats(centered), K);
  model.penalty = penalty;
  model.transform = std::move(transform);
  model.objective = fit.objective;
  model.converged = fit.converged;
  model.selected_rank = fit.selected_rank;
  return model;
}

LdrrFModel population_fisher_model(const MixtureModel& centered_model, std::optional<int> K) {
  const MatrixXd B = population_B(centered_model);
  const MatrixXd& M = centered_model.means();
  const MatrixXd z_means = B.transpose() * M;
  ScatterMatrices scatter;
  scatter.C_b = symmetrize(z_means * centered_model.priors().asDiagonal() * z_means.transpose());
  scatter.C_w = symmetrize(B.transpose() * centered_model.within_cov() * B);
  ClassStats stats;
  stats.M_hat = M;
  stats.pi_hat = centered_model.priors();
  stats.counts.assign(static_cast<std::size_t>(M.cols()), 0);
  LdrrFModel model = assemble_fisher(B, std::move(scatter), std::move(stats), K);
  model.transform = FeatureTransform::identity(M.rows());
  return model;
}

namespace {

MatrixXd fisher_centroids(const LdrrFModel& model) {
  return model.directions.transpose() * (model.B_hat.transpose() * model.stats.M_hat);
}

}  // namespace

VectorXd fisher_scores(const LdrrFModel& model, const Eigen::Ref<const VectorXd>& x) {
  const VectorXd proj =
      model.directions.transpose() * (model.B_hat.transpose() * model.transform.apply_row(x));
  const MatrixXd centroids = fisher_centroids(model);
  const VectorXd prior = log_prior_term(model.stats.pi_hat);
  VectorXd scores(model.classes());
  for (Eigen::Index l = 0; l < model.classes(); ++l) {
    scores(l) = (proj - centroids.col(l)).squaredNorm() + prior(l);
  }
  return scores;
}

std::vector<int> predict_f(const LdrrFModel& model, const MatrixXd& X_new) {
  check_columns(model.dim(), X_new.cols());
  std::vector<int> out(static_cast<std::size_t>(X_new.rows()));
  if (X_new.rows() == 0) return out;
  const MatrixXd proj = project(model, X_new);
  const MatrixXd centroids = fisher_centroids(model);
  const VectorXd prior = log_prior_term(model.stats.pi_hat);
  VectorXd scores(model.classes());
  for (Eigen::Index i = 0; i < proj.rows(); ++i) {
    for (Eigen::Index l = 0; l < model.classes(); ++l) {
      scores(l) = (proj.row(i).transpose() - centroids.col(l)).squaredNorm() + prior(l);
    }
    out[static_cast<std::size_t>(i)] = argmin_index(scores);
  }
  return out;
}

MatrixXd project(const LdrrFModel& model, const MatrixXd& X_new) {
  check_columns(model.dim(), X_new.cols());
  return (model.transform.apply(X_new) * model.B_hat) * model.directions;
}

}  // namespace ldrr
