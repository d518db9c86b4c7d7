#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ldrr/regression.hpp"
#include "test_util.hpp"

using namespace ldrr;
using ldrr::testing::random_normal;

namespace {

LabeledDataset random_problem(Eigen::Index n, Eigen::Index p, int L, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % L);
  std::shuffle(labels.begin(), labels.end(), rng);
  MatrixXd X = random_normal(n, p, rng);
  for (Eigen::Index i = 0; i < n; ++i) X(i, labels[static_cast<std::size_t>(i)] % p) += 1.5;
  return LabeledDataset::from_labels(X, labels, L);
}

// Worst violation of the elastic-net optimality conditions of
// n^{-1}||y - Xb||^2 + l1 ||b||_1 + l2/2 ||b||^2.
double kkt_residual(const MatrixXd& X, const VectorXd& y, const VectorXd& b, double l1,
                    double l2) {
  const double n = static_cast<double>(X.rows());
  const VectorXd grad = (2.0 / n) * X.transpose() * (y - X * b);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    double v;
    if (b(j) == 0.0) {
      v = std::max(0.0, std::abs(grad(j)) - l1);
    } else {
      v = std::abs(grad(j) - l1 * (b(j) > 0 ? 1.0 : -1.0) - l2 * b(j));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// Rank-r truncation of the OLS fit, computed through a QR least-squares
// solve and a singular value decomposition of the fitted values.
double brute_force_rank_objective(const MatrixXd& X, const MatrixXd& Y, int r) {
  const double n = static_cast<double>(X.rows());
  const MatrixXd B_ols = ldrr::testing::qr_solve(X, Y);
  const MatrixXd fitted = X * B_ols;
  Eigen::JacobiSVD<MatrixXd> svd(fitted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const MatrixXd V = svd.matrixV().leftCols(r);
  const MatrixXd B = B_ols * V * V.transpose();
  return (Y - X * B).squaredNorm() / n;
}

}  // namespace

TEST_CASE("soft_threshold examples") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 0.5) == -2.5);
}

TEST_CASE("LabeledDataset from_labels and validation") {
  MatrixXd X(3, 1);
  X << 1, 2, 3;
  const auto d = LabeledDataset::from_labels(X, {0, 1, 0}, 2);
  CHECK(d.Y(0, 0) == 1.0);
  CHECK(d.Y(1, 1) == 1.0);
  CHECK(d.class_counts() == std::vector<Eigen::Index>{2, 1});
  const auto missing = LabeledDataset::from_labels(X, {0, 0, 0}, 2);
  try {
    missing.validate();
    FAIL("expected EmptyClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyClass);
  }
  CHECK_NOTHROW(missing.validate(false));
}

TEST_CASE("elastic net column satisfies KKT on random problems") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd X = random_normal(40, 10, rng);
    const VectorXd y = random_normal(40, 1, rng);
    const double lmax = ((2.0 / 40.0) * X.transpose() * y).cwiseAbs().maxCoeff();
    for (double frac : {0.5, 0.1, 0.01}) {
      for (double l2 : {0.0, 0.3}) {
        const ColumnFit f = fit_elastic_net_column(X, y, frac * lmax, l2);
        CHECK(f.converged);
        CHECK(kkt_residual(X, y, f.coef, frac * lmax, l2) <= 1e-6);
      }
    }
  }
}

TEST_CASE("scaled orthonormal design matches the soft-threshold closed form") {
  Rng rng(2);
  const Eigen::Index n = 50, p = 6;
  Eigen::HouseholderQR<MatrixXd> qr(random_normal(n, p, rng));
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, p);
  const MatrixXd X = std::sqrt(static_cast<double>(n)) * Q;  // X^T X / n = I
  const VectorXd y = random_normal(n, 1, rng) + X.col(0) * 0.8;
  const double lambda = 0.3;
  const VectorXd ols = X.transpose() * y / static_cast<double>(n);
  const ColumnFit f = fit_elastic_net_column(X, y, lambda, 0.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double thr = static_cast<double>(n) * lambda / (2.0 * X.col(j).squaredNorm());
    const double expected = soft_threshold(ols(j), thr);
    CHECK(std::abs(f.coef(j) - expected) <= 1e-8);
  }
}

TEST_CASE("unpenalised column fit is the OLS solution") {
  Rng rng(3);
  const MatrixXd X = random_normal(30, 5, rng);
  const VectorXd y = random_normal(30, 1, rng);
  const ColumnFit f = fit_elastic_net_column(X, y, 0.0, 0.0);
  CHECK((X.transpose() * (y - X * f.coef)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lambda at or above lambda_max gives exactly zero") {
  Rng rng(4);
  const MatrixXd X = random_normal(40, 10, rng);
  const VectorXd y = random_normal(40, 1, rng);
  const double lmax = ((2.0 / 40.0) * X.transpose() * y).cwiseAbs().maxCoeff();
  const ColumnFit f = fit_elastic_net_column(X, y, lmax, 0.0);
  CHECK((f.coef.array() == 0.0).all());
}

TEST_CASE("coordinate descent objective is non-increasing across sweeps") {
  Rng rng(5);
  const LabeledDataset d = random_problem(60, 15, 3, rng);
  const double lmax = lambda_max(d.X, d.Y, Lasso{});
  auto monotone = [](const std::vector<double>& trace) {
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] <= trace[i - 1] + 1e-12 * std::abs(trace[i - 1]));
    }
  };
  for (Eigen::Index l = 0; l < d.L(); ++l) {
    std::vector<double> trace;
    SolverOptions opts;
    opts.objective_trace = &trace;
    fit_elastic_net_column(d.X, d.Y.col(l), 0.05 * lmax * 0.7, 0.05 * lmax * 0.3, std::nullopt,
                           opts);
    monotone(trace);
  }
  std::vector<double> trace;
  SolverOptions opts;
  opts.objective_trace = &trace;
  fit_group_lasso_ridge(d.X, d.Y, 0.05 * lmax, 0.7, opts);
  monotone(trace);
}

TEST_CASE("elastic net degenerates to lasso and ridge") {
  Rng rng(6);
  const LabeledDataset d = random_problem(50, 8, 3, rng);
  const double lambda = 0.05;
  const auto enet1 = fit_penalized(d.X, d.Y, ElasticNet{lambda, 1.0});
  const auto lasso = fit_penalized(d.X, d.Y, Lasso{lambda});
  CHECK(max_abs(enet1.B_hat - lasso.B_hat) <= 1e-8);
  const auto enet0 = fit_penalized(d.X, d.Y, ElasticNet{lambda, 0.0});
  const auto ridge = fit_penalized(d.X, d.Y, Ridge{lambda});
  CHECK(max_abs(enet0.B_hat - ridge.B_hat) <= 1e-8);
  // Ridge normal equations (X^T X / n + lambda / 2 I) B = X^T Y / n.
  const double n = static_cast<double>(d.n());
  const MatrixXd A = d.X.transpose() * d.X / n + 0.5 * lambda * MatrixXd::Identity(8, 8);
  CHECK(max_abs(A * ridge.B_hat - d.X.transpose() * d.Y / n) <= 1e-8);
}

TEST_CASE("returned objective matches recomputation and beats zero") {
  Rng rng(7);
  const LabeledDataset d = random_problem(50, 8, 3, rng);
  const std::vector<PenaltyConfig> pens = {Lasso{0.02},           ElasticNet{0.05, 0.5},
                                           GroupLassoRidge{0.05, 0.7}, ReducedRank{0.01},
                                           ReducedRankRidge{0.05, 0.5}, Ridge{0.1},
                                           NoPenalty{}};
  for (const auto& pen : pens) {
    const RegressionFit f = fit_penalized(d.X, d.Y, pen);
    const double n = static_cast<double>(d.n());
    const double recomputed = (d.Y - d.X * f.B_hat).squaredNorm() / n + penalty_value(pen, f.B_hat);
    CHECK(std::abs(f.objective - recomputed) <= 1e-9 * std::max(1.0, std::abs(recomputed)));
    CHECK(f.objective <= d.Y.squaredNorm() / n + 1e-12);
  }
}

TEST_CASE("group lasso examples") {
  Rng rng(8);
  const LabeledDataset d = random_problem(40, 6, 3, rng);
  const double n = static_cast<double>(d.n());
  const MatrixXd grad0 = (2.0 / n) * d.X.transpose() * d.Y;
  const double glmax = grad0.rowwise().norm().maxCoeff();
  const MatrixFit zero = fit_group_lasso_ridge(d.X, d.Y, glmax, 1.0);
  CHECK(zero.B.isZero(0.0));
  CHECK(lambda_max(d.X, d.Y, GroupLassoRidge{0.0, 1.0}) == doctest::Approx(glmax).epsilon(1e-12));

  // Single response column: same as the elastic-net column solver.
  const VectorXd y = d.Y.col(0);
  const MatrixFit g1 = fit_group_lasso_ridge(d.X, y, 0.1, 0.6);
  const ColumnFit c1 = fit_elastic_net_column(d.X, y, 0.1 * 0.6, 0.1 * 0.4);
  CHECK(max_abs(g1.B.col(0) - c1.coef) <= 1e-8);

  const MatrixFit r = fit_group_lasso_ridge(d.X, d.Y, 0.2, 0.0);
  const MatrixXd A = d.X.transpose() * d.X / n + 0.1 * MatrixXd::Identity(6, 6);
  CHECK(max_abs(A * r.B - d.X.transpose() * d.Y / n) <= 1e-8);

  // Row-wise optimality.
  const double lambda = 0.3 * glmax, alpha = 0.8;
  const MatrixFit g = fit_group_lasso_ridge(d.X, d.Y, lambda, alpha);
  const MatrixXd grad = (2.0 / n) * d.X.transpose() * (d.Y - d.X * g.B);
  for (Eigen::Index j = 0; j < 6; ++j) {
    const double norm = g.B.row(j).norm();
    if (norm == 0.0) {
      CHECK(grad.row(j).norm() <= lambda * alpha + 1e-6);
    } else {
      const Eigen::RowVectorXd stat =
          grad.row(j) - lambda * alpha * g.B.row(j) / norm - lambda * (1 - alpha) * g.B.row(j);
      CHECK(stat.norm() <= 1e-6);
    }
  }
}

TEST_CASE("reduced rank examples") {
  Rng rng(9);
  const LabeledDataset d = random_problem(60, 8, 6, rng);
  const double n = static_cast<double>(d.n());

  const RegressionFit full = fit_reduced_rank(d.X, d.Y, 0.0);
  CHECK(max_abs(full.B_hat - ldrr::testing::qr_solve(d.X, d.Y)) <= 1e-8);

  const RegressionFit zero = fit_reduced_rank(d.X, d.Y, d.Y.squaredNorm() / n * 1.01);
  CHECK(zero.selected_rank == 0);
  CHECK(zero.B_hat.isZero(0.0));

  for (double lambda : {0.001, 0.01, 0.03, 0.1}) {
    const RegressionFit f = fit_reduced_rank(d.X, d.Y, lambda);
    REQUIRE(f.selected_rank.has_value());
    CHECK(numerical_rank(f.B_hat) == *f.selected_rank);
    for (int r = 0; r <= 6; ++r) {
      CHECK(f.objective <= brute_force_rank_objective(d.X, d.Y, r) + lambda * r + 1e-9);
    }
  }
}

TEST_CASE("reduced rank without ridge needs a full-rank design") {
  Rng rng(10);
  MatrixXd X = random_normal(20, 4, rng);
  X.col(3) = X.col(0) + X.col(1);
  const auto d = LabeledDataset::from_labels(X, std::vector<int>(20, 0), 1);
  try {
    fit_reduced_rank(d.X, d.Y, 0.1);
    FAIL("expected SingularDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDesign);
  }
  CHECK_NOTHROW(fit_reduced_rank(d.X, d.Y, 0.1, 0.5));
}

TEST_CASE("select_rank prefers the smaller rank on ties") {
  CHECK(select_rank({1.0, 0.5, 0.4}, 0.5) == 0);
  CHECK(select_rank({1.0, 0.5, 0.4}, 0.05) == 2);
}

TEST_CASE("lambda grid examples") {
  Rng rng(11);
  const LabeledDataset d = random_problem(40, 10, 3, rng);
  const double n = static_cast<double>(d.n());
  const double lmax = ((2.0 / n) * d.X.transpose() * d.Y).cwiseAbs().maxCoeff();
  const auto grid = lambda_grid(d.X, d.Y, Lasso{}, 12);
  REQUIRE(grid.size() == 12);
  CHECK(grid[0] == doctest::Approx(lmax).epsilon(1e-14));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
  const auto two = lambda_grid(d.X, d.Y, Lasso{}, 2);
  CHECK(two[1] == doctest::Approx(lmax * 1e-3).epsilon(1e-12));
  CHECK(fit_penalized(d.X, d.Y, Lasso{grid[0]}).B_hat.isZero(0.0));
  CHECK(fit_penalized(d.X, d.Y, ElasticNet{lambda_max(d.X, d.Y, ElasticNet{0, 0.5}), 0.5})
            .B_hat.isZero(0.0));
  const double rr_max = lambda_max(d.X, d.Y, ReducedRank{});
  CHECK(fit_penalized(d.X, d.Y, ReducedRank{rr_max}).selected_rank == 0);
  CHECK(fit_penalized(d.X, d.Y, ReducedRank{rr_max * 0.99}).selected_rank > 0);
  const double rrr_max = lambda_max(d.X, d.Y, ReducedRankRidge{0, 0.5});
  CHECK(fit_penalized(d.X, d.Y, ReducedRankRidge{rrr_max, 0.5}).selected_rank == 0);
}

TEST_CASE("zero-variance column gets a zero coefficient") {
  Rng rng(12);
  LabeledDataset d = random_problem(40, 5, 2, rng);
  d.X.col(2).setZero();
  const auto f = fit_penalized(d.X, d.Y, Lasso{0.01});
  CHECK(f.B_hat.row(2).isZero(0.0));
}

TEST_CASE("solvers are bitwise deterministic") {
  Rng rng(13);
  const LabeledDataset d = random_problem(50, 12, 4, rng);
  for (const PenaltyConfig& pen : std::vector<PenaltyConfig>{Lasso{0.01}, GroupLassoRidge{0.05, 0.5},
                                                             ReducedRankRidge{0.02, 0.5}}) {
    const auto a = fit_penalized(d.X, d.Y, pen);
    const auto b = fit_penalized(d.X, d.Y, pen);
    CHECK(a.B_hat == b.B_hat);
  }
}

TEST_CASE("stratified folds") {
  Rng rng(14);
  const LabeledDataset d = random_problem(30, 3, 3, rng);
  const auto folds = stratified_folds(d, 5, 1);
  for (int f = 0; f < 5; ++f) {
    std::vector<int> per_class(3, 0);
    for (std::size_t i = 0; i < folds.size(); ++i)
      if (folds[i] == f) ++per_class[static_cast<std::size_t>(d.labels[i])];
    for (int c : per_class) CHECK(c == 2);
  }
  CHECK(folds == stratified_folds(d, 5, 1));
  try {
    stratified_folds(d, 11, 1);
    FAIL("expected ClassMissingInFold");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClassMissingInFold);
  }
}

TEST_CASE("cross validation examples") {
  Rng rng(15);
  const LabeledDataset d = random_problem(60, 6, 3, rng);
  CvOptions opts;
  opts.n_folds = 5;
  const auto single = cross_validate(d, {Lasso{0.05}}, opts);
  CHECK(lambda_of(single.best) == 0.05);

  // Both candidates are above lambda_max on every fold, so their losses tie.
  const double big = 100.0 * lambda_max(d.X, d.Y, Lasso{});
  const auto tie = cross_validate(d, {Lasso{big}, Lasso{2 * big}}, opts);
  CHECK(tie.mean_loss[0] == tie.mean_loss[1]);
  CHECK(lambda_of(tie.best) == 2 * big);

  const auto grid = penalty_path(Lasso{}, lambda_grid(d.X, d.Y, Lasso{}, 8));
  const auto a = cross_validate(d, grid, opts);
  opts.threads = 3;
  const auto b = cross_validate(d, grid, opts);
  CHECK(a.mean_loss == b.mean_loss);
  CHECK(a.best_index == b.best_index);
}

TEST_CASE("pure-noise responses favour heavy shrinkage") {
  int votes = 0;
  for (int run = 0; run < 20; ++run) {
    Rng rng(1000 + static_cast<std::uint64_t>(run));
    const MatrixXd X = random_normal(80, 20, rng);
    std::vector<int> labels(80);
    for (int i = 0; i < 80; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto d = LabeledDataset::from_labels(X, labels, 3);
    const auto grid = lambda_grid(d.X.rowwise() - d.X.colwise().mean(), d.Y, Lasso{}, 20);
    CvOptions opts;
    opts.n_folds = 5;
    opts.seed = static_cast<std::uint64_t>(run);
    const auto res = cross_validate(d, penalty_path(Lasso{}, grid), opts);
    if (res.best_index < 5) ++votes;
  }
  CHECK(votes > 10);
}
