#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldrr/ldrr.hpp"
#include "ldrr/model_core.hpp"
#include "ldrr/regression.hpp"

namespace ldrr {

// Block-sparse mean shift: class l has N(0, 4) entries on its own block of
// five coordinates, Sigma_W = sigma^2 W with W an AR(1)-correlated matrix with
// Uniform(1, 3) variances, and priors pi_l proportional to nu_l^alpha.
struct SparseScenarioConfig {
  int n = 300;
  int p = 500;
  int L = 5;
  double rho = 0.6;
  double sigma = 1.0;
  double alpha = 0.0;
  int n_test = 500;
  std::uint64_t seed = 0;
};

enum class LowRankVariant { Model1, Model2 };

// M = eta A alpha with A a random p x r orthonormal frame and alpha entries
// N(0, 32 / r); balanced priors.
//   Model1: [Sigma_W]_ij = rho^|i-j|.
//   Model2: Sigma_W = eta^2 A Sigma_z A^T + Cov(W), [Sigma_z]_ij = 0.6^|i-j|
//           and Cov(W) AR(1)-correlated with coefficient rho and
//           Uniform(0, 1) variances.
struct LowRankScenarioConfig {
  LowRankVariant variant = LowRankVariant::Model1;
  int n = 1000;
  int p = 100;
  int L = 10;
  int r = 3;
  double rho = 0.6;
  double eta = 1.0;
  int n_test = 500;
  std::uint64_t seed = 0;

  static LowRankScenarioConfig model1();
  static LowRankScenarioConfig model2();
};

using ScenarioConfig = std::variant<SparseScenarioConfig, LowRankScenarioConfig>;

std::string scenario_name(const ScenarioConfig& cfg);
std::string describe(const ScenarioConfig& cfg);
ScenarioConfig with_seed(const ScenarioConfig& cfg, std::uint64_t seed);

struct Scenario {
  MixtureModel model;  // raw parameters, M pi is not forced to zero
  LabeledDataset train;
  LabeledDataset test;
};

VectorXd gen_class_probs(int L, double alpha, std::uint64_t seed);

// W_ij = sqrt(W_ii W_jj) rho^|i-j| with W_ii ~ Uniform(diag_low, diag_high).
MatrixXd gen_ar1_scaled_cov(int p, double rho, double diag_low, double diag_high,
                            std::uint64_t seed);

// p x r matrix with orthonormal columns, uniformly distributed (QR of a
// Gaussian matrix with R's diagonal made positive).
MatrixXd random_orthonormal_frame(int p, int r, std::uint64_t seed);

Scenario gen_sparse_scenario(const SparseScenarioConfig& cfg);
Scenario gen_lowrank_scenario(const LowRankScenarioConfig& cfg);
Scenario generate(const ScenarioConfig& cfg);

// n labelled draws from the mixture. With require_all_classes the draw is
// repeated (up to 100 attempts) until every class appears.
LabeledDataset sample_dataset(const MixtureModel& model, Eigen::Index n, std::uint64_t seed,
                              bool require_all_classes = false);

using PredictFn = std::function<std::vector<int>(const MatrixXd&)>;

// Fraction of rows whose prediction differs from the true label.
double evaluate(const PredictFn& predict_fn, const LabeledDataset& test);

enum class MethodKind { Oracle, Ldrr, LdrrF };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::Ldrr;
  PenaltyConfig penalty = NoPenalty{};
  bool tune_lambda = true;  // choose lambda by cross-validation
  std::optional<int> K;     // LDRR-F only
};

struct ExperimentOptions {
  int threads = 1;
  std::int64_t bayes_samples = 20000;
  int cv_folds = 10;
  int grid_size = 30;
  CvLoss cv_loss = CvLoss::RegressionMSE;
  FitOptions fit;
};

struct MethodResult {
  std::string name;
  std::vector<double> errors;  // NaN where the rep failed
  std::vector<double> h_ratio;  // sigma_min / sigma_max of H_hat (LDRR only)
  std::vector<std::string> failures;
  double mean_error = 0.0;
  double se = 0.0;
  bool se_defined = false;
  int h_warnings = 0;
  double excess_risk = 0.0;
};

struct ExperimentReport {
  std::string scenario;
  std::string config;
  int n_reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> rep_seeds;
  std::vector<double> bayes_errors;
  std::vector<double> delta_inf;
  double bayes_error = 0.0;
  double bayes_se = 0.0;
  std::vector<MethodResult> methods;
};

// Fits a method on a training set and returns its predictor.
PredictFn train_method(const MethodSpec& method, const Scenario& scenario,
                       const ExperimentOptions& opts, std::uint64_t seed,
                       double* h_ratio = nullptr);

ExperimentReport run_experiment(const ScenarioConfig& scenario,
                                const std::vector<MethodSpec>& methods, int n_reps,
                                std::uint64_t base_seed, const ExperimentOptions& opts = {});

}  // namespace ldrr
