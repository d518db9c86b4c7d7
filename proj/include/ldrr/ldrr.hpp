#pragma once

#include <optional>
#include <vector>

#include "ldrr/model_core.hpp"
#include "ldrr/regression.hpp"

namespace ldrr {

struct ClassStats {
  MatrixXd M_hat;  // p x L, class means as columns
  VectorXd pi_hat;
  std::vector<Eigen::Index> counts;
};

// M_hat = X^T Y (Y^T Y)^{-1}, pi_hat = counts / n. Throws EmptyClass.
ClassStats estimate_class_stats(const LabeledDataset& data);

// H_hat = D_pi_hat - n^{-1} (X B)^T (X B), symmetrised.
MatrixXd estimate_H(const LabeledDataset& data, const MatrixXd& B_hat);

struct BstarEstimate {
  MatrixXd B_star;
  double h_min_singular = 0.0;
  double h_max_singular = 0.0;
  bool near_singular = false;  // sigma_min(H) < 1e-8 sigma_max(H)
};

// B* = B H^+ with the pseudo-inverse cut at 1e-10 sigma_max(H).
BstarEstimate estimate_Bstar(const MatrixXd& B_hat, const MatrixXd& H_hat);

// Affine map applied to raw features before anything else:
// x -> (x - mean) ./ scale.
struct FeatureTransform {
  VectorXd mean;
  VectorXd scale;

  static FeatureTransform identity(Eigen::Index p);
  // Centres by the column means; with standardize, also divides by the
  // column standard deviations (zero-variance columns keep scale 1).
  static FeatureTransform fit(const MatrixXd& X, bool standardize);

  MatrixXd apply(const MatrixXd& X) const;
  VectorXd apply_row(const Eigen::Ref<const VectorXd>& x) const;
};

struct FitOptions {
  SolverOptions solver;
  bool standardize = false;
};

struct LdrrModel {
  MatrixXd B_hat;
  MatrixXd H_hat;
  MatrixXd B_star_hat;
  ClassStats stats;  // in the transformed feature frame
  PenaltyConfig penalty = NoPenalty{};
  FeatureTransform transform;
  double h_min_singular = 0.0;
  double h_max_singular = 0.0;
  bool h_near_singular = false;
  double objective = 0.0;
  bool converged = true;
  std::optional<int> selected_rank;

  Eigen::Index dim() const { return B_hat.rows(); }
  Eigen::Index classes() const { return B_hat.cols(); }
};

// Estimate H, B* and the class statistics from an already transformed
// training set and a regression estimate.
LdrrModel assemble_ldrr(const LabeledDataset& transformed, MatrixXd B_hat,
                        const PenaltyConfig& penalty, FeatureTransform transform);

LdrrModel fit_ldrr(const LabeledDataset& data, const PenaltyConfig& penalty,
                   const FitOptions& opts = {});

// Scores G_l(x) = mu_l^T B*_l - 2 x^T B*_l - 2 log pi_l for a raw feature
// vector (the model applies its own transform). Lower is more likely.
VectorXd discriminant_scores(const LdrrModel& model, const Eigen::Ref<const VectorXd>& x);

// Row-wise argmin of the scores, ties to the smallest index.
std::vector<int> predict(const LdrrModel& model, const MatrixXd& X_new);

// C_b = n^{-1} B^T X^T P_Y X B and C_w = n^{-1} B^T X^T (I - P_Y) X B,
// computed from per-class means of Z = X B.
struct ScatterMatrices {
  MatrixXd C_b;
  MatrixXd C_w;
};
ScatterMatrices class_scatter_matrices(const LabeledDataset& data, const MatrixXd& B_hat);

struct FisherDirections {
  MatrixXd directions;   // L x K, C_w-orthonormal
  VectorXd eigenvalues;  // all nonzero pencil eigenvalues, descending
  int rank = 0;          // numerical rank of (C_w^+)^{1/2} C_b (C_w^+)^{1/2}
};

// Top-K eigenvectors u_k of (C_w^+)^{1/2} C_b (C_w^+)^{1/2} mapped to
// alpha_k = (C_w^+)^{1/2} u_k; the first non-negligible entry of each
// direction is positive. Without K, K = min(L-1, rank). Throws KTooLarge.
FisherDirections fisher_directions(const MatrixXd& C_b, const MatrixXd& C_w,
                                   std::optional<int> K = std::nullopt);

struct LdrrFModel {
  MatrixXd B_hat;
  MatrixXd C_b;
  MatrixXd C_w;
  MatrixXd directions;  // L x K
  VectorXd eigenvalues;
  int K = 0;
  ClassStats stats;
  PenaltyConfig penalty = NoPenalty{};
  FeatureTransform transform;
  double objective = 0.0;
  bool converged = true;
  std::optional<int> selected_rank;

  Eigen::Index dim() const { return B_hat.rows(); }
  Eigen::Index classes() const { return B_hat.cols(); }
};

LdrrFModel fit_ldrr_f(const LabeledDataset& data, const PenaltyConfig& penalty,
                      std::optional<int> K = std::nullopt, const FitOptions& opts = {});

// LDRR-F built from population quantities of a centred mixture:
// B = Sigma^{-1} M D_pi, C_b = B^T M D_pi M^T B, C_w = B^T Sigma_W B.
LdrrFModel population_fisher_model(const MixtureModel& centered_model,
                                   std::optional<int> K = std::nullopt);

// argmin_l || A^T B^T (x - mu_l) ||^2 - 2 log pi_l.
VectorXd fisher_scores(const LdrrFModel& model, const Eigen::Ref<const VectorXd>& x);
std::vector<int> predict_f(const LdrrFModel& model, const MatrixXd& X_new);

// Coordinates A^T B^T x of transformed rows, m x K.
MatrixXd project(const LdrrFModel& model, const MatrixXd& X_new);

}  // namespace ldrr
