#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ldrr/ldrr.hpp"
#include "ldrr/parallel.hpp"
#include "ldrr/regression.hpp"
#include "ldrr/rng.hpp"

namespace ldrr {

std::vector<int> stratified_folds(const LabeledDataset& data, int n_folds,
                                  std::uint64_t seed) {
  if (n_folds < 2) throw Error(ErrorCode::InvalidArgument, "n_folds must be >= 2");
  const auto counts = data.class_counts();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < n_folds) {
      throw Error(ErrorCode::ClassMissingInFold,
                  "class " + std::to_string(l) + " has " + std::to_string(counts[l]) +
                      " samples, fewer than " + std::to_string(n_folds) + " folds");
    }
  }
  std::vector<std::vector<Eigen::Index>> by_class(counts.size());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<int> fold(static_cast<std::size_t>(data.n()), 0);
  // Continue the round-robin across classes so fold sizes stay balanced.
  int next = 0;
  for (std::size_t l = 0; l < by_class.size(); ++l) {
    Rng rng = make_rng(seed, "cv-fold", l);
    std::shuffle(by_class[l].begin(), by_class[l].end(), rng);
    for (auto i : by_class[l]) {
      fold[static_cast<std::size_t>(i)] = next;
      next = (next + 1) % n_folds;
    }
  }
  return fold;
}

namespace {

bool same_family(const PenaltyConfig& a, const PenaltyConfig& b) {
  return kind_of(a) == kind_of(b) && alpha_of(a) == alpha_of(b);
}

// Held-out loss of every candidate on one fold, warm-starting along runs of
// candidates from the same family.
std::vector<double> fold_losses(const LabeledDataset& train, const LabeledDataset& test,
                                const std::vector<PenaltyConfig>& candidates,
                                const CvOptions& opts) {
  const FeatureTransform transform = FeatureTransform::fit(train.X, false);
  LabeledDataset train_c = train;
  train_c.X = transform.apply(train.X);
  const MatrixXd test_x = transform.apply(test.X);
  const GramSystem sys = GramSystem::from_data(train_c.X, train_c.Y);
  const VectorXd intercept = train.Y.colwise().mean().transpose();

  std::vector<double> losses(candidates.size(), 0.0);
  std::optional<MatrixXd> warm;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (c > 0 && !same_family(candidates[c], candidates[c - 1])) warm.reset();
    GramFit fit = fit_from_gram(sys, candidates[c], opts.solver, warm);
    if (opts.loss == CvLoss::RegressionMSE) {
      const MatrixXd resid =
          (test.Y - test_x * fit.B).rowwise() - intercept.transpose();
      losses[c] = resid.squaredNorm() / static_cast<double>(test.n());
    } else {
      const LdrrModel model =
          assemble_ldrr(train_c, fit.B, candidates[c], FeatureTransform::identity(train.p()));
      const std::vector<int> predicted = predict(model, test_x);
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        wrong += predicted[i] != test.labels[i];
      }
      losses[c] = static_cast<double>(wrong) / static_cast<double>(test.n());
    }
    warm = std::move(fit.B);
  }
  return losses;
}

}  // namespace

CvResult cross_validate(const LabeledDataset& data,
                        const std::vector<PenaltyConfig>& candidates,
                        const CvOptions& opts) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "empty candidate grid");
  for (const auto& c : candidates) validate(c);
  data.validate();
  const std::vector<int> fold = stratified_folds(data, opts.n_folds, opts.seed);

  const auto K = static_cast<std::size_t>(opts.n_folds);
  std::vector<std::vector<double>> per_fold(K);
  parallel_for(K, opts.threads, [&](std::size_t f) {
    std::vector<Eigen::Index> train_rows, test_rows;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      (fold[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test_rows : train_rows)
          .push_back(i);
    }
    per_fold[f] = fold_losses(data.subset(train_rows), data.subset(test_rows), candidates, opts);
  });

  CvResult result;
  result.candidates = candidates;
  result.mean_loss.assign(candidates.size(), 0.0);
  result.se.assign(candidates.size(), 0.0);
  const double k = static_cast<double>(K);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < K; ++f) sum += per_fold[f][c];
    const double mean = sum / k;
    double ss = 0.0;
    for (std::size_t f = 0; f < K; ++f) ss += (per_fold[f][c] - mean) * (per_fold[f][c] - mean);
    result.mean_loss[c] = mean;
    result.se[c] = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double a = result.mean_loss[c];
    const double b = result.mean_loss[best];
    const double tie = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
    if (a < b - tie) {
      best = c;
    } else if (std::abs(a - b) <= tie && lambda_of(candidates[c]) > lambda_of(candidates[best])) {
      best = c;
    }
  }
  result.best_index = best;
  result.best = candidates[best];
  return result;
}

}  // namespace ldrr
