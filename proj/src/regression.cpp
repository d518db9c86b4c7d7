#include "ldrr/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace ldrr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Fallback weight when the l1 / rank share of a mixed penalty is zero; the
// grid is then anchored as if alpha were 1e-3.
constexpr double kMinAlpha = 1e-3;

// Relative tie tolerance for rank selection.
constexpr double kRankTieTol = 1e-12;

void check_shapes(const MatrixXd& X, const MatrixXd& Y) {
  if (X.rows() != Y.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "X has " + std::to_string(X.rows()) + " rows but Y has " +
                    std::to_string(Y.rows()));
  }
  if (X.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty design");
}

void check_options(const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (opts.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
}

// Splits the mixed penalties into (l1-or-group weight, ridge weight).
struct Weights {
  double sparse = 0.0;
  double ridge = 0.0;
};

Weights split_weights(const PenaltyConfig& penalty) {
  return std::visit(
      Overloaded{
          [](const Lasso& p) { return Weights{p.lambda, 0.0}; },
          [](const ElasticNet& p) {
            return Weights{p.lambda * p.alpha, p.lambda * (1.0 - p.alpha)};
          },
          [](const GroupLassoRidge& p) {
            return Weights{p.lambda * p.alpha, p.lambda * (1.0 - p.alpha)};
          },
          [](const ReducedRank& p) { return Weights{p.lambda, 0.0}; },
          [](const ReducedRankRidge& p) {
            return Weights{p.lambda * p.alpha, p.lambda * (1.0 - p.alpha)};
          },
          [](const Ridge& p) { return Weights{0.0, p.lambda}; },
          [](const NoPenalty&) { return Weights{}; },
      },
      penalty);
}

MatrixXd ridge_solve(const GramSystem& sys, double ridge) {
  const auto p = sys.G.rows();
  MatrixXd a = sys.G;
  a.diagonal().array() += 0.5 * ridge;
  if (ridge > 0.0) {
    return spd_factor(a, ErrorCode::SingularDesign, "X^T X / n + ridge I").solve(sys.C);
  }
  Eigen::LLT<MatrixXd> llt(a);
  if (p > 0 && llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    return llt.solve(sys.C);
  }
  // Minimum-norm least squares when the design is rank deficient.
  return symmetric_pinv(a).pinv * sys.C;
}

}  // namespace

LabeledDataset LabeledDataset::from_labels(MatrixXd X, std::vector<int> labels,
                                           int classes) {
  if (static_cast<Eigen::Index>(labels.size()) != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "label count does not match X rows");
  }
  if (classes < 1) throw Error(ErrorCode::InvalidArgument, "need at least one class");
  LabeledDataset d;
  d.Y = MatrixXd::Zero(X.rows(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw Error(ErrorCode::InvalidArgument,
                  "label " + std::to_string(labels[i]) + " out of range");
    }
    d.Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  d.X = std::move(X);
  d.labels = std::move(labels);
  return d;
}

std::vector<Eigen::Index> LabeledDataset::class_counts() const {
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(L()), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

void LabeledDataset::validate(bool require_all_classes) const {
  if (Y.rows() != X.rows() || static_cast<Eigen::Index>(labels.size()) != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset: X, Y and labels disagree on n");
  }
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    bool ok = label >= 0 && label < Y.cols();
    for (Eigen::Index l = 0; ok && l < Y.cols(); ++l) {
      ok = Y(i, l) == (l == label ? 1.0 : 0.0);
    }
    if (!ok) {
      throw Error(ErrorCode::InvalidArgument,
                  "dataset: row " + std::to_string(i) + " of Y is not one-hot");
    }
  }
  if (require_all_classes) {
    const auto counts = class_counts();
    for (std::size_t l = 0; l < counts.size(); ++l) {
      if (counts[l] == 0) {
        throw Error(ErrorCode::EmptyClass,
                    "class " + std::to_string(l) + " has no samples");
      }
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& rows) const {
  LabeledDataset d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  d.Y.resize(static_cast<Eigen::Index>(rows.size()), Y.cols());
  d.labels.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    d.X.row(i) = X.row(rows[k]);
    d.Y.row(i) = Y.row(rows[k]);
    d.labels[k] = labels[static_cast<std::size_t>(rows[k])];
  }
  return d;
}

PenaltyKind kind_of(const PenaltyConfig& penalty) {
  return std::visit(Overloaded{
                        [](const Lasso&) { return PenaltyKind::Lasso; },
                        [](const ElasticNet&) { return PenaltyKind::ElasticNet; },
                        [](const GroupLassoRidge&) { return PenaltyKind::GroupLassoRidge; },
                        [](const ReducedRank&) { return PenaltyKind::ReducedRank; },
                        [](const ReducedRankRidge&) { return PenaltyKind::ReducedRankRidge; },
                        [](const Ridge&) { return PenaltyKind::Ridge; },
                        [](const NoPenalty&) { return PenaltyKind::None; },
                    },
                    penalty);
}

double lambda_of(const PenaltyConfig& penalty) {
  return std::visit(
      [](const auto& p) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, NoPenalty>) {
          return 0.0;
        } else {
          return p.lambda;
        }
      },
      penalty);
}

double alpha_of(const PenaltyConfig& penalty) {
  return std::visit(
      [](const auto& p) -> double {
        if constexpr (requires { p.alpha; }) {
          return p.alpha;
        } else {
          return 1.0;
        }
      },
      penalty);
}

PenaltyConfig with_lambda(const PenaltyConfig& penalty, double lambda) {
  return std::visit(
      [lambda](auto p) -> PenaltyConfig {
        if constexpr (!std::is_same_v<decltype(p), NoPenalty>) p.lambda = lambda;
        return p;
      },
      penalty);
}

bool is_rank_penalty(const PenaltyConfig& penalty) {
  const auto k = kind_of(penalty);
  return k == PenaltyKind::ReducedRank || k == PenaltyKind::ReducedRankRidge;
}

void validate(const PenaltyConfig& penalty) {
  const double lambda = lambda_of(penalty);
  const double alpha = alpha_of(penalty);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "penalty lambda must be finite and >= 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalty alpha must lie in [0, 1]");
  }
}

std::string penalty_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::ElasticNet: return "enet";
    case PenaltyKind::GroupLassoRidge: return "grplasso";
    case PenaltyKind::ReducedRank: return "rr";
    case PenaltyKind::ReducedRankRidge: return "rr-ridge";
    case PenaltyKind::Ridge: return "ridge";
    case PenaltyKind::None: return "none";
  }
  return "none";
}

std::optional<PenaltyKind> parse_penalty_kind(const std::string& name) {
  for (auto kind : {PenaltyKind::Lasso, PenaltyKind::ElasticNet,
                    PenaltyKind::GroupLassoRidge, PenaltyKind::ReducedRank,
                    PenaltyKind::ReducedRankRidge, PenaltyKind::Ridge,
                    PenaltyKind::None}) {
    if (penalty_name(kind) == name) return kind;
  }
  return std::nullopt;
}

PenaltyConfig make_penalty(PenaltyKind kind, double lambda, double alpha) {
  switch (kind) {
    case PenaltyKind::Lasso: return Lasso{lambda};
    case PenaltyKind::ElasticNet: return ElasticNet{lambda, alpha};
    case PenaltyKind::GroupLassoRidge: return GroupLassoRidge{lambda, alpha};
    case PenaltyKind::ReducedRank: return ReducedRank{lambda};
    case PenaltyKind::ReducedRankRidge: return ReducedRankRidge{lambda, alpha};
    case PenaltyKind::Ridge: return Ridge{lambda};
    case PenaltyKind::None: return NoPenalty{};
  }
  return NoPenalty{};
}

double penalty_value(const PenaltyConfig& penalty, const MatrixXd& B) {
  const double sq = B.squaredNorm();
  return std::visit(
      Overloaded{
          [&](const Lasso& p) { return p.lambda * B.cwiseAbs().sum(); },
          [&](const ElasticNet& p) {
            return p.lambda * (p.alpha * B.cwiseAbs().sum() + 0.5 * (1.0 - p.alpha) * sq);
          },
          [&](const GroupLassoRidge& p) {
            return p.lambda *
                   (p.alpha * B.rowwise().norm().sum() + 0.5 * (1.0 - p.alpha) * sq);
          },
          [&](const ReducedRank& p) { return p.lambda * numerical_rank(B); },
          [&](const ReducedRankRidge& p) {
            return p.lambda * (p.alpha * numerical_rank(B) + 0.5 * (1.0 - p.alpha) * sq);
          },
          [&](const Ridge& p) { return 0.5 * p.lambda * sq; },
          [](const NoPenalty&) { return 0.0; },
      },
      penalty);
}

double regression_objective(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& B,
                            const PenaltyConfig& penalty) {
  const double n = static_cast<double>(X.rows());
  return (Y - X * B).squaredNorm() / n + penalty_value(penalty, B);
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

GramSystem GramSystem::from_data(const MatrixXd& X, const MatrixXd& Y) {
  check_shapes(X, Y);
  GramSystem sys;
  sys.n = X.rows();
  const double n = static_cast<double>(sys.n);
  sys.G = MatrixXd(X.cols(), X.cols());
  sys.G.setZero();
  sys.G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / n);
  sys.G = sys.G.selfadjointView<Eigen::Lower>();
  sys.C = X.transpose() * Y / n;
  sys.yy = Y.colwise().squaredNorm().transpose() / n;
  return sys;
}

ColumnFit fit_elastic_net_gram(const GramSystem& sys, Eigen::Index column,
                               double lambda_l1, double lambda_l2,
                               const VectorXd& start, const SolverOptions& opts) {
  check_options(opts);
  if (!(lambda_l1 >= 0.0) || !(lambda_l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalty weights must be >= 0");
  }
  const auto p = sys.G.rows();
  const auto c = sys.C.col(column);
  ColumnFit fit;
  fit.coef = start.size() == p ? start : VectorXd::Zero(p);
  VectorXd& b = fit.coef;
  VectorXd q = sys.G * b;  // G b, maintained incrementally

  const VectorXd curvature = (2.0 * sys.G.diagonal()).array() + lambda_l2;

  auto update = [&](Eigen::Index j) {
    if (!(curvature(j) > 0.0)) {
      // Zero-variance column without ridge: the coefficient is pinned at 0.
      if (b(j) != 0.0) {
        q.noalias() -= sys.G.col(j) * b(j);
        b(j) = 0.0;
      }
      return 0.0;
    }
    const double z = 2.0 * (c(j) - q(j) + sys.G(j, j) * b(j));
    const double next = soft_threshold(z, lambda_l1) / curvature(j);
    const double delta = next - b(j);
    if (delta == 0.0) return 0.0;
    q.noalias() += sys.G.col(j) * delta;
    b(j) = next;
    return curvature(j) * std::abs(delta);
  };
  auto record = [&] {
    if (opts.objective_trace) {
      opts.objective_trace->push_back(sys.yy(column) - 2.0 * c.dot(b) + b.dot(q) +
                                      lambda_l1 * b.lpNorm<1>() +
                                      0.5 * lambda_l2 * b.squaredNorm());
    }
  };

  std::vector<Eigen::Index> active;
  fit.converged = false;
  while (fit.n_iters < opts.max_iter) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    ++fit.n_iters;
    record();
    if (change <= opts.tol) {
      fit.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (b(j) != 0.0) active.push_back(j);
    }
    // Inner sweeps only touch the active block, so work on a compact copy of
    // G restricted to it. b is zero off the active set, hence q_A = G_AA b_A.
    const auto a = static_cast<Eigen::Index>(active.size());
    MatrixXd g_aa(a, a);
    VectorXd c_a(a), b_a(a), q_a(a), curv_a(a);
    for (Eigen::Index k = 0; k < a; ++k) {
      for (Eigen::Index i = 0; i < a; ++i) g_aa(i, k) = sys.G(active[i], active[k]);
      c_a(k) = c(active[k]);
      b_a(k) = b(active[k]);
      q_a(k) = q(active[k]);
      curv_a(k) = curvature(active[k]);
    }
    auto compact_update = [&](Eigen::Index k) {
      const double z = 2.0 * (c_a(k) - q_a(k) + g_aa(k, k) * b_a(k));
      const double next = soft_threshold(z, lambda_l1) / curv_a(k);
      const double delta = next - b_a(k);
      if (delta == 0.0) return 0.0;
      q_a.noalias() += g_aa.col(k) * delta;
      b_a(k) = next;
      return curv_a(k) * std::abs(delta);
    };
    while (fit.n_iters < opts.max_iter) {
      double inner = 0.0;
      for (Eigen::Index k = 0; k < a; ++k) inner = std::max(inner, compact_update(k));
      ++fit.n_iters;
      if (opts.objective_trace) {
        opts.objective_trace->push_back(sys.yy(column) - 2.0 * c_a.dot(b_a) + b_a.dot(q_a) +
                                        lambda_l1 * b_a.lpNorm<1>() +
                                        0.5 * lambda_l2 * b_a.squaredNorm());
      }
      if (inner <= opts.tol) break;
    }
    for (Eigen::Index k = 0; k < a; ++k) b(active[k]) = b_a(k);
    q.noalias() = sys.G * b;
  }
  return fit;
}

ColumnFit fit_elastic_net_column(const MatrixXd& X, const VectorXd& y, double lambda_l1,
                                 double lambda_l2, const std::optional<VectorXd>& start,
                                 const SolverOptions& opts) {
  const GramSystem sys = GramSystem::from_data(X, MatrixXd(y));
  if (start && start->size() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "warm start has wrong length");
  }
  return fit_elastic_net_gram(sys, 0, lambda_l1, lambda_l2,
                              start ? *start : VectorXd::Zero(X.cols()), opts);
}

MatrixFit fit_group_lasso_ridge_gram(const GramSystem& sys, double lambda, double alpha,
                                     const MatrixXd& start, const SolverOptions& opts) {
  check_options(opts);
  if (!(lambda >= 0.0) || !(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "group lasso: need lambda >= 0, alpha in [0,1]");
  }
  const auto p = sys.G.rows();
  const auto L = sys.C.cols();
  const double group_weight = lambda * alpha;
  const double ridge_weight = lambda * (1.0 - alpha);

  MatrixFit fit;
  fit.B = (start.rows() == p && start.cols() == L) ? start : MatrixXd::Zero(p, L);
  MatrixXd& B = fit.B;
  MatrixXd Q = sys.G * B;
  const VectorXd curvature = (2.0 * sys.G.diagonal()).array() + ridge_weight;

  auto update = [&](Eigen::Index j) {
    VectorXd next = VectorXd::Zero(L);
    if (curvature(j) > 0.0) {
      const VectorXd g =
          2.0 * (sys.C.row(j) - Q.row(j) + sys.G(j, j) * B.row(j)).transpose();
      const double norm = g.norm();
      if (norm > group_weight) next = g * ((1.0 - group_weight / norm) / curvature(j));
    }
    const VectorXd delta = next - B.row(j).transpose();
    const double size = delta.cwiseAbs().maxCoeff();
    if (size == 0.0) return 0.0;
    Q.noalias() += sys.G.col(j) * delta.transpose();
    B.row(j) = next.transpose();
    return curvature(j) > 0.0 ? curvature(j) * size : size;
  };
  auto record = [&] {
    if (opts.objective_trace) {
      opts.objective_trace->push_back(
          sys.yy.sum() - 2.0 * (sys.C.array() * B.array()).sum() +
          (B.array() * Q.array()).sum() + group_weight * B.rowwise().norm().sum() +
          0.5 * ridge_weight * B.squaredNorm());
    }
  };

  std::vector<Eigen::Index> active;
  fit.converged = false;
  while (fit.n_iters < opts.max_iter) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    ++fit.n_iters;
    record();
    if (change <= opts.tol) {
      fit.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (B.row(j).squaredNorm() != 0.0) active.push_back(j);
    }
    while (fit.n_iters < opts.max_iter) {
      double inner = 0.0;
      for (auto j : active) inner = std::max(inner, update(j));
      ++fit.n_iters;
      record();
      if (inner <= opts.tol) break;
    }
  }
  return fit;
}

MatrixFit fit_group_lasso_ridge(const MatrixXd& X, const MatrixXd& Y, double lambda,
                                double alpha, const SolverOptions& opts) {
  const GramSystem sys = GramSystem::from_data(X, Y);
  return fit_group_lasso_ridge_gram(sys, lambda, alpha, MatrixXd(), opts);
}

namespace {

// Full (ridge-)OLS fit and the right singular vectors of the fitted values
// on the ridge-augmented design, sorted by decreasing singular value.
struct RankBasis {
  MatrixXd B_full;
  MatrixXd V;
  VectorXd sq_singular;  // squared singular values of the fitted values / n
};

RankBasis rank_basis(const GramSystem& sys, double ridge) {
  if (!(ridge >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge must be >= 0");
  RankBasis basis;
  if (ridge == 0.0) {
    Eigen::LLT<MatrixXd> llt(sys.G);
    if (sys.G.rows() == 0 || llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
      throw Error(ErrorCode::SingularDesign,
                  "reduced-rank regression without ridge needs X^T X invertible");
    }
    basis.B_full = llt.solve(sys.C);
  } else {
    basis.B_full = ridge_solve(sys, ridge);
  }
  // (X~ B)^T (X~ B) / n = B^T (G + ridge/2 I) B = B^T C.
  const MatrixXd fitted_gram = symmetrize(basis.B_full.transpose() * sys.C);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(fitted_gram);
  basis.V = eig.eigenvectors().rowwise().reverse();
  basis.sq_singular = eig.eigenvalues().reverse().cwiseMax(0.0);
  return basis;
}

MatrixXd truncate(const RankBasis& basis, Eigen::Index rank) {
  if (rank == 0) return MatrixXd::Zero(basis.B_full.rows(), basis.B_full.cols());
  const MatrixXd vr = basis.V.leftCols(rank);
  return basis.B_full * vr * vr.transpose();
}

Eigen::Index max_rank(const GramSystem& sys) {
  return std::min(sys.G.rows(), sys.C.cols());
}

}  // namespace

RankPath reduced_rank_path_gram(const GramSystem& sys, double ridge) {
  const RankBasis basis = rank_basis(sys, ridge);
  RankPath path;
  const Eigen::Index rmax = max_rank(sys);
  const double total = sys.yy.sum();
  double explained = 0.0;
  for (Eigen::Index r = 0; r <= rmax; ++r) {
    if (r > 0) explained += basis.sq_singular(r - 1);
    path.fits.push_back(truncate(basis, r));
    path.loss.push_back(total - explained);
  }
  return path;
}

RankPath reduced_rank_path(const MatrixXd& X, const MatrixXd& Y, double ridge) {
  const GramSystem sys = GramSystem::from_data(X, Y);
  RankPath path = reduced_rank_path_gram(sys, ridge);
  const Ridge ridge_pen{ridge};
  for (std::size_t r = 0; r < path.fits.size(); ++r) {
    path.loss[r] = regression_objective(X, Y, path.fits[r], ridge_pen);
  }
  return path;
}

int select_rank(const std::vector<double>& loss, double lambda) {
  int best = 0;
  double best_value = loss.empty() ? 0.0 : loss[0];
  for (std::size_t r = 1; r < loss.size(); ++r) {
    const double value = loss[r] + lambda * static_cast<double>(r);
    const double scale = std::max({1.0, std::abs(value), std::abs(best_value)});
    if (value < best_value - kRankTieTol * scale) {
      best = static_cast<int>(r);
      best_value = value;
    }
  }
  return best;
}

RegressionFit fit_reduced_rank(const MatrixXd& X, const MatrixXd& Y, double lambda,
                               double ridge) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  const RankPath path = reduced_rank_path(X, Y, ridge);
  const int rank = select_rank(path.loss, lambda);
  RegressionFit fit;
  fit.B_hat = path.fits[static_cast<std::size_t>(rank)];
  fit.selected_rank = rank;
  fit.objective = path.loss[static_cast<std::size_t>(rank)] + lambda * rank;
  if (ridge > 0.0) {
    const double alpha = lambda / (lambda + ridge);
    fit.penalty = ReducedRankRidge{lambda + ridge, alpha};
  } else {
    fit.penalty = ReducedRank{lambda};
  }
  return fit;
}

GramFit fit_from_gram(const GramSystem& sys, const PenaltyConfig& penalty,
                      const SolverOptions& opts, const std::optional<MatrixXd>& start) {
  validate(penalty);
  const auto p = sys.G.rows();
  const auto L = sys.C.cols();
  const Weights w = split_weights(penalty);
  GramFit out;
  switch (kind_of(penalty)) {
    case PenaltyKind::Lasso:
    case PenaltyKind::ElasticNet: {
      out.B = MatrixXd::Zero(p, L);
      for (Eigen::Index l = 0; l < L; ++l) {
        const VectorXd init =
            (start && start->rows() == p && start->cols() == L) ? VectorXd(start->col(l))
                                                                : VectorXd::Zero(p);
        const ColumnFit col = fit_elastic_net_gram(sys, l, w.sparse, w.ridge, init, opts);
        out.B.col(l) = col.coef;
        out.n_iters = std::max(out.n_iters, col.n_iters);
        out.converged = out.converged && col.converged;
      }
      break;
    }
    case PenaltyKind::GroupLassoRidge: {
      const MatrixFit fit = fit_group_lasso_ridge_gram(
          sys, lambda_of(penalty), alpha_of(penalty), start ? *start : MatrixXd(), opts);
      out.B = fit.B;
      out.n_iters = fit.n_iters;
      out.converged = fit.converged;
      break;
    }
    case PenaltyKind::ReducedRank:
    case PenaltyKind::ReducedRankRidge: {
      const RankPath path = reduced_rank_path_gram(sys, w.ridge);
      const int rank = select_rank(path.loss, w.sparse);
      out.B = path.fits[static_cast<std::size_t>(rank)];
      out.selected_rank = rank;
      break;
    }
    case PenaltyKind::Ridge:
    case PenaltyKind::None:
      out.B = ridge_solve(sys, w.ridge);
      break;
  }
  return out;
}

RegressionFit fit_penalized(const MatrixXd& X, const MatrixXd& Y,
                            const PenaltyConfig& penalty, const SolverOptions& opts,
                            const std::optional<MatrixXd>& start) {
  check_shapes(X, Y);
  validate(penalty);
  RegressionFit fit;
  if (is_rank_penalty(penalty)) {
    const Weights w = split_weights(penalty);
    const RankPath path = reduced_rank_path(X, Y, w.ridge);
    const int rank = select_rank(path.loss, w.sparse);
    fit.B_hat = path.fits[static_cast<std::size_t>(rank)];
    fit.selected_rank = rank;
  } else {
    const GramSystem sys = GramSystem::from_data(X, Y);
    GramFit g = fit_from_gram(sys, penalty, opts, start);
    fit.B_hat = std::move(g.B);
    fit.n_iters = g.n_iters;
    fit.converged = g.converged;
  }
  fit.penalty = penalty;
  fit.objective = regression_objective(X, Y, fit.B_hat, penalty);
  return fit;
}

double lambda_max(const MatrixXd& X, const MatrixXd& Y, const PenaltyConfig& family) {
  const GramSystem sys = GramSystem::from_data(X, Y);
  const double alpha = std::max(alpha_of(family), kMinAlpha);
  switch (kind_of(family)) {
    case PenaltyKind::Lasso:
      return 2.0 * sys.C.cwiseAbs().maxCoeff();
    case PenaltyKind::ElasticNet:
    case PenaltyKind::Ridge:
      return 2.0 * sys.C.cwiseAbs().maxCoeff() /
             (kind_of(family) == PenaltyKind::Ridge ? kMinAlpha : alpha);
    case PenaltyKind::GroupLassoRidge:
      return 2.0 * sys.C.rowwise().norm().maxCoeff() / alpha;
    case PenaltyKind::ReducedRank:
    case PenaltyKind::ReducedRankRidge: {
      // Without ridge: rank 0 wins once lambda r >= loss_0 - loss_r for all r.
      const RankPath path = reduced_rank_path_gram(sys, 0.0);
      double top = 0.0;
      for (std::size_t r = 1; r < path.loss.size(); ++r) {
        top = std::max(top, (path.loss[0] - path.loss[r]) / static_cast<double>(r));
      }
      if (kind_of(family) == PenaltyKind::ReducedRank) return top;
      // With ridge the rank-0 threshold moves with lambda itself; bisect on
      // the smallest lambda for which rank 0 is selected.
      const double a = alpha_of(family);
      double hi = top / alpha;
      if (a <= 0.0) return hi;
      auto rank_zero = [&](double lambda) {
        const RankPath rp = reduced_rank_path_gram(sys, lambda * (1.0 - a));
        return select_rank(rp.loss, lambda * a) == 0;
      };
      double lo = 0.0;
      for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rank_zero(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    case PenaltyKind::None:
      return 0.0;
  }
  return 0.0;
}

std::vector<double> lambda_grid(const MatrixXd& X, const MatrixXd& Y,
                                const PenaltyConfig& family, int n_grid) {
  if (n_grid < 2) throw Error(ErrorCode::InvalidArgument, "n_grid must be >= 2");
  if (kind_of(family) == PenaltyKind::None) return {0.0};
  const double top = lambda_max(X, Y, family);
  if (!(top > 0.0)) return {0.0};
  std::vector<double> grid(static_cast<std::size_t>(n_grid));
  const double log_top = std::log(top);
  const double log_bottom = std::log(top * 1e-3);
  for (int k = 0; k < n_grid; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_grid - 1);
    grid[static_cast<std::size_t>(k)] = std::exp(log_top + t * (log_bottom - log_top));
  }
  grid.front() = top;
  grid.back() = top * 1e-3;
  return grid;
}

std::vector<PenaltyConfig> penalty_path(const PenaltyConfig& family,
                                        const std::vector<double>& lambdas) {
  std::vector<PenaltyConfig> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) out.push_back(with_lambda(family, lambda));
  return out;
}

}  // namespace ldrr
