#pragma once

#include <cstdint>
#include <vector>

#include "ldrr/linalg.hpp"
#include "ldrr/rng.hpp"

namespace ldrr {

// Gaussian mixture X | Y = e_l ~ N_p(mu_l, Sigma_W) with class priors pi.
// Immutable after construction; the Cholesky factor of Sigma_W is computed
// once and shared by every solve.
class MixtureModel {
 public:
  // Validates the invariants: shapes conform, Sigma_W symmetric positive
  // definite, priors positive and summing to one within 1e-12.
  MixtureModel(MatrixXd means, MatrixXd within_cov, VectorXd priors);

  const MatrixXd& means() const { return means_; }
  const MatrixXd& within_cov() const { return within_cov_; }
  const VectorXd& priors() const { return priors_; }
  const Eigen::LLT<MatrixXd>& within_cov_factor() const { return within_llt_; }

  Eigen::Index dim() const { return means_.rows(); }
  Eigen::Index classes() const { return means_.cols(); }

  // Mean of the marginal distribution of X, i.e. M pi.
  VectorXd overall_mean() const { return means_ * priors_; }
  bool is_centered(double tol = 1e-10) const;

  // Shifts every class mean by -M pi so that E(X) = 0.
  MixtureModel centered() const;

  // M scaled by a constant, everything else unchanged.
  MixtureModel with_scaled_means(double c) const;

 private:
  MatrixXd means_;
  MatrixXd within_cov_;
  VectorXd priors_;
  Eigen::LLT<MatrixXd> within_llt_;
};

// Sigma_W^{-1} a through the stored Cholesky factor.
MatrixXd solve_within(const MixtureModel& model, const MatrixXd& rhs);

// Sigma = Sigma_W + M D_pi M^T. In strict mode a non-centered model raises
// NotCentered because the identity only equals Cov(X) when E(X) = 0.
MatrixXd population_sigma(const MixtureModel& model, bool strict = true);

// B = Sigma^{-1} M D_pi.
MatrixXd population_B(const MixtureModel& model, bool strict = true);

enum class HForm { ViaSigma, ViaMLeft, ViaMRight };

// H = D_pi - B^T Sigma B = D_pi - D_pi M^T B = D_pi - B^T M D_pi.
MatrixXd population_H(const MixtureModel& model, HForm form = HForm::ViaMLeft,
                      bool strict = true);

// B* = Sigma_W^{-1} M.
MatrixXd population_Bstar(const MixtureModel& model);

// Omega = D_pi^{-1} + M^T Sigma_W^{-1} M, which equals H^{-1}.
MatrixXd population_omega(const MixtureModel& model);

// max_l mu_l^T Sigma_W^{-1} mu_l.
double separation_delta(const MixtureModel& model);

struct PopulationDerived {
  MatrixXd sigma;
  MatrixXd B;
  MatrixXd H;
  MatrixXd B_star;
  double delta_inf = 0.0;
};

PopulationDerived derive_population(const MixtureModel& model);

// Bayes discriminant functions G_l(x) = mu_l^T B*_l - 2 x^T B*_l - 2 log pi_l.
// They differ from the Mahalanobis scores (x-mu_l)^T Sigma_W^{-1} (x-mu_l)
// - 2 log pi_l by x^T Sigma_W^{-1} x, which is common to all classes.
class BayesRule {
 public:
  explicit BayesRule(const MixtureModel& model);

  VectorXd scores(const Eigen::Ref<const VectorXd>& x) const;
  int classify(const Eigen::Ref<const VectorXd>& x) const;
  std::vector<int> classify_rows(const MatrixXd& x) const;

 private:
  MatrixXd b_star_;
  VectorXd offsets_;  // mu_l^T B*_l - 2 log pi_l
};

// Full Mahalanobis form (x-mu_l)^T Sigma_W^{-1} (x-mu_l) - 2 log pi_l.
VectorXd bayes_scores(const MixtureModel& model,
                      const Eigen::Ref<const VectorXd>& x);

// argmin of bayes_scores, ties to the smallest index.
int bayes_classify(const MixtureModel& model,
                   const Eigen::Ref<const VectorXd>& x);

// Scores (x-mu_l)^T D (D^T Sigma_W D)^+ D^T (x-mu_l) - 2 log pi_l for a p x q
// direction matrix D. With D = B* or D = B (centered model) the argmin agrees
// with the Bayes rule.
class ProjectedRule {
 public:
  ProjectedRule(const MixtureModel& model, const MatrixXd& directions);

  VectorXd scores(const Eigen::Ref<const VectorXd>& x) const;
  int classify(const Eigen::Ref<const VectorXd>& x) const;

 private:
  MatrixXd directions_;   // D
  MatrixXd metric_;       // (D^T Sigma_W D)^+
  MatrixXd projected_means_;  // D^T M
  VectorXd log_prior_term_;
};

// Index of the minimum entry, ties broken towards the smallest index.
int argmin_index(const Eigen::Ref<const VectorXd>& scores);

// Labels drawn i.i.d. Categorical(pi) and features mu_y + chol(Sigma_W) z.
struct MixtureSample {
  MatrixXd x;
  std::vector<int> labels;
};

MixtureSample sample_mixture(const MixtureModel& model, Eigen::Index n, Rng& rng);

// Monte-Carlo estimate of P{Y != g*(X)}. Samples are drawn in fixed-size
// chunks with per-chunk seeds, so the value does not depend on `threads`.
double bayes_error_mc(const MixtureModel& model, std::int64_t n_samples,
                      std::uint64_t seed, int threads = 1);

}  // namespace ldrr
