#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldrr/linalg.hpp"

namespace ldrr {

// Feature matrix X (n x p, rows are samples) with one-hot labels Y (n x L).
struct LabeledDataset {
  MatrixXd X;
  MatrixXd Y;
  std::vector<int> labels;  // argmax of each Y row, 0-based

  static LabeledDataset from_labels(MatrixXd X, std::vector<int> labels, int classes);

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  Eigen::Index L() const { return Y.cols(); }

  std::vector<Eigen::Index> class_counts() const;

  // Throws InvalidArgument on malformed one-hot rows and EmptyClass when
  // require_all_classes is set and some class has no rows.
  void validate(bool require_all_classes = true) const;

  LabeledDataset subset(const std::vector<Eigen::Index>& rows) const;
};

// Penalties for min_B n^{-1} ||Y - X B||_F^2 + pen(B):
//   Lasso            lambda ||B||_1
//   ElasticNet       lambda [alpha ||B||_1 + (1-alpha)/2 ||B||_F^2]
//   GroupLassoRidge  lambda [alpha sum_j ||B_j.||_2 + (1-alpha)/2 ||B||_F^2]
//   ReducedRank      lambda rank(B)
//   ReducedRankRidge lambda [alpha rank(B) + (1-alpha)/2 ||B||_F^2]
//   Ridge            lambda / 2 ||B||_F^2
//   NoPenalty        0 (minimum-norm least squares)
struct Lasso { double lambda = 0.0; };
struct ElasticNet { double lambda = 0.0; double alpha = 0.5; };
struct GroupLassoRidge { double lambda = 0.0; double alpha = 1.0; };
struct ReducedRank { double lambda = 0.0; };
struct ReducedRankRidge { double lambda = 0.0; double alpha = 0.5; };
struct Ridge { double lambda = 0.0; };
struct NoPenalty {};

using PenaltyConfig = std::variant<Lasso, ElasticNet, GroupLassoRidge, ReducedRank,
                                   ReducedRankRidge, Ridge, NoPenalty>;

enum class PenaltyKind { Lasso, ElasticNet, GroupLassoRidge, ReducedRank,
                         ReducedRankRidge, Ridge, None };

PenaltyKind kind_of(const PenaltyConfig& penalty);
double lambda_of(const PenaltyConfig& penalty);
double alpha_of(const PenaltyConfig& penalty);  // 1 for penalties without alpha
PenaltyConfig with_lambda(const PenaltyConfig& penalty, double lambda);
bool is_rank_penalty(const PenaltyConfig& penalty);
void validate(const PenaltyConfig& penalty);

// CLI spelling: lasso, enet, grplasso, rr, rr-ridge, ridge, none.
std::string penalty_name(PenaltyKind kind);
std::optional<PenaltyKind> parse_penalty_kind(const std::string& name);
PenaltyConfig make_penalty(PenaltyKind kind, double lambda, double alpha);

double penalty_value(const PenaltyConfig& penalty, const MatrixXd& B);

// n^{-1} ||Y - X B||_F^2 + pen(B), evaluated from the residuals.
double regression_objective(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& B,
                            const PenaltyConfig& penalty);

struct SolverOptions {
  double tol = 1e-7;     // on curvature-scaled coordinate updates
  int max_iter = 100000;  // sweeps
  // Objective after every full or active-set sweep, when non-null. The
  // column-wise solvers append one run per response column.
  std::vector<double>* objective_trace = nullptr;
};

struct RegressionFit {
  MatrixXd B_hat;
  PenaltyConfig penalty = NoPenalty{};
  double objective = 0.0;
  int n_iters = 0;
  bool converged = true;
  std::optional<int> selected_rank;
};

double soft_threshold(double z, double t);

struct ColumnFit {
  VectorXd coef;
  int n_iters = 0;
  bool converged = true;
};

// Coordinate descent for
//   n^{-1} ||y - X b||^2 + lambda_l1 ||b||_1 + lambda_l2 / 2 ||b||^2.
// NotConverged is reported through the flag, never thrown.
ColumnFit fit_elastic_net_column(const MatrixXd& X, const VectorXd& y,
                                 double lambda_l1, double lambda_l2,
                                 const std::optional<VectorXd>& start = std::nullopt,
                                 const SolverOptions& opts = {});

// Sufficient statistics G = X^T X / n, C = X^T Y / n and ||Y_l||^2 / n.
struct GramSystem {
  MatrixXd G;
  MatrixXd C;
  VectorXd yy;  // per response column
  Eigen::Index n = 0;

  static GramSystem from_data(const MatrixXd& X, const MatrixXd& Y);
};

ColumnFit fit_elastic_net_gram(const GramSystem& sys, Eigen::Index column,
                               double lambda_l1, double lambda_l2,
                               const VectorXd& start, const SolverOptions& opts);

struct MatrixFit {
  MatrixXd B;
  int n_iters = 0;
  bool converged = true;
};

// Block coordinate descent over rows for
//   n^{-1} ||Y - X B||_F^2 + lambda [alpha sum_j ||B_j.||_2 + (1-alpha)/2 ||B||_F^2].
MatrixFit fit_group_lasso_ridge(const MatrixXd& X, const MatrixXd& Y, double lambda,
                                double alpha, const SolverOptions& opts = {});
MatrixFit fit_group_lasso_ridge_gram(const GramSystem& sys, double lambda, double alpha,
                                     const MatrixXd& start, const SolverOptions& opts);

// Exact minimiser of n^{-1} ||Y - X B||_F^2 + ridge / 2 ||B||_F^2 + lambda rank(B)
// over all ranks 0..min(p, L).
RegressionFit fit_reduced_rank(const MatrixXd& X, const MatrixXd& Y, double lambda,
                               double ridge = 0.0);

// Candidate rank-r solutions of the reduced-rank problem, r = 0..min(p, L),
// with their unpenalised objectives n^{-1}||Y - XB||^2 + ridge/2 ||B||^2.
struct RankPath {
  std::vector<MatrixXd> fits;
  std::vector<double> loss;
};
RankPath reduced_rank_path(const MatrixXd& X, const MatrixXd& Y, double ridge);
RankPath reduced_rank_path_gram(const GramSystem& sys, double ridge);

// Picks the rank minimising loss[r] + lambda r; near-ties (1e-12 relative)
// go to the smaller rank.
int select_rank(const std::vector<double>& loss, double lambda);

struct GramFit {
  MatrixXd B;
  int n_iters = 0;
  bool converged = true;
  std::optional<int> selected_rank;
};

// Solves the penalised problem from sufficient statistics only.
GramFit fit_from_gram(const GramSystem& sys, const PenaltyConfig& penalty,
                      const SolverOptions& opts = {},
                      const std::optional<MatrixXd>& start = std::nullopt);

// Dispatches on the penalty. `start` warm-starts the iterative solvers.
RegressionFit fit_penalized(const MatrixXd& X, const MatrixXd& Y,
                            const PenaltyConfig& penalty, const SolverOptions& opts = {},
                            const std::optional<MatrixXd>& start = std::nullopt);

// Smallest lambda at which the solution is identically zero (rank zero for
// the rank penalties).
double lambda_max(const MatrixXd& X, const MatrixXd& Y, const PenaltyConfig& family);

// n_grid values log-spaced from lambda_max down to lambda_max * 1e-3.
std::vector<double> lambda_grid(const MatrixXd& X, const MatrixXd& Y,
                                const PenaltyConfig& family, int n_grid);

enum class CvLoss { RegressionMSE, Misclassification };

struct CvOptions {
  int n_folds = 10;
  std::uint64_t seed = 0;
  CvLoss loss = CvLoss::RegressionMSE;
  int threads = 1;
  SolverOptions solver;
};

struct CvResult {
  PenaltyConfig best;
  std::size_t best_index = 0;
  std::vector<PenaltyConfig> candidates;
  std::vector<double> mean_loss;
  std::vector<double> se;
};

// Stratified K-fold fold index per row. Throws ClassMissingInFold when some
// class has fewer rows than folds.
std::vector<int> stratified_folds(const LabeledDataset& data, int n_folds,
                                  std::uint64_t seed);

// Candidates are evaluated on centred training folds; RegressionMSE scores
// held-out ||y - pi_train - (x - xbar)^T B||^2, Misclassification runs the
// full discriminant pipeline. The minimum mean loss wins; ties go to the
// larger lambda.
CvResult cross_validate(const LabeledDataset& data,
                        const std::vector<PenaltyConfig>& candidates,
                        const CvOptions& opts = {});

std::vector<PenaltyConfig> penalty_path(const PenaltyConfig& family,
                                        const std::vector<double>& lambdas);

}  // namespace ldrr
