#include "ldrr/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ldrr/parallel.hpp"

namespace ldrr {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, message);
}

void require_centered(const MixtureModel& model, bool strict) {
  if (strict && !model.is_centered()) {
    throw Error(ErrorCode::NotCentered,
                "mixture model is not centered: max |M pi| = " +
                    std::to_string(model.overall_mean().cwiseAbs().maxCoeff()));
  }
}

}  // namespace

MixtureModel::MixtureModel(MatrixXd means, MatrixXd within_cov, VectorXd priors)
    : means_(std::move(means)),
      within_cov_(std::move(within_cov)),
      priors_(std::move(priors)) {
  const auto p = means_.rows();
  const auto L = means_.cols();
  require(p >= 1 && L >= 1, "mixture model needs p >= 1 and L >= 1");
  if (within_cov_.rows() != p || within_cov_.cols() != p ||
      priors_.size() != L) {
    throw Error(ErrorCode::DimensionMismatch,
                "mixture model: M is " + std::to_string(p) + "x" +
                    std::to_string(L) + ", Sigma_W is " +
                    std::to_string(within_cov_.rows()) + "x" +
                    std::to_string(within_cov_.cols()) + ", pi has " +
                    std::to_string(priors_.size()) + " entries");
  }
  require(means_.allFinite() && within_cov_.allFinite() && priors_.allFinite(),
          "mixture model has non-finite entries");
  require((priors_.array() > 0.0).all(), "class priors must be positive");
  require(std::abs(priors_.sum() - 1.0) <= 1e-12, "class priors must sum to 1");
  const double asym = max_abs(within_cov_ - within_cov_.transpose());
  require(asym <= 1e-12 * std::max(1.0, max_abs(within_cov_)),
          "Sigma_W must be symmetric");
  within_cov_ = symmetrize(within_cov_);
  within_llt_ = spd_factor(within_cov_, ErrorCode::SingularSigmaW, "Sigma_W");
}

bool MixtureModel::is_centered(double tol) const {
  return overall_mean().cwiseAbs().maxCoeff() <= tol;
}

MixtureModel MixtureModel::centered() const {
  MatrixXd shifted = means_.colwise() - overall_mean();
  return MixtureModel(std::move(shifted), within_cov_, priors_);
}

MixtureModel MixtureModel::with_scaled_means(double c) const {
  return MixtureModel(c * means_, within_cov_, priors_);
}

MatrixXd solve_within(const MixtureModel& model, const MatrixXd& rhs) {
  return model.within_cov_factor().solve(rhs);
}

MatrixXd population_sigma(const MixtureModel& model, bool strict) {
  require_centered(model, strict);
  const MatrixXd& m = model.means();
  MatrixXd sigma = model.within_cov();
  sigma.noalias() += m * model.priors().asDiagonal() * m.transpose();
  return symmetrize(sigma);
}

MatrixXd population_B(const MixtureModel& model, bool strict) {
  const MatrixXd sigma = population_sigma(model, strict);
  const auto llt = spd_factor(sigma, ErrorCode::SingularSigma, "Sigma");
  return llt.solve(model.means() * model.priors().asDiagonal());
}

MatrixXd population_H(const MixtureModel& model, HForm form, bool strict) {
  const MatrixXd b = population_B(model, strict);
  const MatrixXd d_pi = model.priors().asDiagonal();
  const MatrixXd& m = model.means();
  switch (form) {
    case HForm::ViaSigma:
      return d_pi - b.transpose() * population_sigma(model, strict) * b;
    case HForm::ViaMLeft:
      return d_pi - d_pi * m.transpose() * b;
    case HForm::ViaMRight:
      return d_pi - b.transpose() * m * d_pi;
  }
  return d_pi;
}

MatrixXd population_Bstar(const MixtureModel& model) {
  return solve_within(model, model.means());
}

MatrixXd population_omega(const MixtureModel& model) {
  MatrixXd omega = model.means().transpose() * population_Bstar(model);
  omega.diagonal() += model.priors().cwiseInverse();
  return symmetrize(omega);
}

double separation_delta(const MixtureModel& model) {
  // ||L^{-1} mu_l||^2 with Sigma_W = L L^T.
  const MatrixXd whitened =
      model.within_cov_factor().matrixL().solve(model.means());
  return whitened.colwise().squaredNorm().maxCoeff();
}

PopulationDerived derive_population(const MixtureModel& model) {
  PopulationDerived d;
  d.sigma = population_sigma(model);
  d.B = population_B(model);
  d.H = population_H(model, HForm::ViaMLeft);
  d.B_star = population_Bstar(model);
  d.delta_inf = separation_delta(model);
  return d;
}

int argmin_index(const Eigen::Ref<const VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index l = 1; l < scores.size(); ++l) {
    if (scores(l) < scores(best)) best = static_cast<int>(l);
  }
  return best;
}

BayesRule::BayesRule(const MixtureModel& model)
    : b_star_(population_Bstar(model)) {
  const MatrixXd& m = model.means();
  offsets_.resize(model.classes());
  for (Eigen::Index l = 0; l < model.classes(); ++l) {
    offsets_(l) = m.col(l).dot(b_star_.col(l)) - 2.0 * std::log(model.priors()(l));
  }
}

VectorXd BayesRule::scores(const Eigen::Ref<const VectorXd>& x) const {
  return offsets_ - 2.0 * (b_star_.transpose() * x);
}

int BayesRule::classify(const Eigen::Ref<const VectorXd>& x) const {
  return argmin_index(scores(x));
}

std::vector<int> BayesRule::classify_rows(const MatrixXd& x) const {
  const MatrixXd all = (-2.0 * (x * b_star_)).rowwise() + offsets_.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = argmin_index(all.row(i).transpose());
  }
  return out;
}

VectorXd bayes_scores(const MixtureModel& model,
                      const Eigen::Ref<const VectorXd>& x) {
  const auto L = model.classes();
  VectorXd out(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const VectorXd diff = x - model.means().col(l);
    const VectorXd whitened = model.within_cov_factor().matrixL().solve(diff);
    out(l) = whitened.squaredNorm() - 2.0 * std::log(model.priors()(l));
  }
  return out;
}

int bayes_classify(const MixtureModel& model,
                   const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "bayes_classify: x has wrong length");
  }
  return argmin_index(bayes_scores(model, x));
}

ProjectedRule::ProjectedRule(const MixtureModel& model, const MatrixXd& directions)
    : directions_(directions) {
  if (directions.rows() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "ProjectedRule: direction rows != p");
  }
  metric_ = symmetric_pinv(directions.transpose() * model.within_cov() * directions).pinv;
  projected_means_ = directions.transpose() * model.means();
  log_prior_term_ = -2.0 * model.priors().array().log().matrix();
}

VectorXd ProjectedRule::scores(const Eigen::Ref<const VectorXd>& x) const {
  const VectorXd z = directions_.transpose() * x;
  VectorXd out(projected_means_.cols());
  for (Eigen::Index l = 0; l < projected_means_.cols(); ++l) {
    const VectorXd diff = z - projected_means_.col(l);
    out(l) = diff.dot(metric_ * diff) + log_prior_term_(l);
  }
  return out;
}

int ProjectedRule::classify(const Eigen::Ref<const VectorXd>& x) const {
  return argmin_index(scores(x));
}

MixtureSample sample_mixture(const MixtureModel& model, Eigen::Index n, Rng& rng) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 0");
  const auto p = model.dim();
  const auto L = model.classes();
  MixtureSample out;
  out.x.resize(n, p);
  out.labels.resize(static_cast<std::size_t>(n));

  VectorXd cumulative(L);
  double acc = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    acc += model.priors()(l);
    cumulative(l) = acc;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd z(p, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = unif(rng) * acc;
    int label = static_cast<int>(L - 1);
    for (Eigen::Index l = 0; l < L; ++l) {
      if (u < cumulative(l)) {
        label = static_cast<int>(l);
        break;
      }
    }
    out.labels[static_cast<std::size_t>(i)] = label;
    for (Eigen::Index j = 0; j < p; ++j) z(j, i) = normal(rng);
  }
  const MatrixXd noise = model.within_cov_factor().matrixL() * z;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.x.row(i) = (noise.col(i) + model.means().col(out.labels[static_cast<std::size_t>(i)]))
                       .transpose();
  }
  return out;
}

double bayes_error_mc(const MixtureModel& model, std::int64_t n_samples,
                      std::uint64_t seed, int threads) {
  if (n_samples < 1) {
    throw Error(ErrorCode::InvalidArgument, "bayes_error_mc needs n_samples >= 1");
  }
  constexpr std::int64_t kChunk = 8192;
  const auto chunks = static_cast<std::size_t>((n_samples + kChunk - 1) / kChunk);
  std::vector<std::int64_t> wrong(chunks, 0);
  const BayesRule rule(model);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t size = std::min(kChunk, n_samples - begin);
    Rng rng = make_rng(seed, "bayes-mc", c);
    const MixtureSample s = sample_mixture(model, size, rng);
    const std::vector<int> predicted = rule.classify_rows(s.x);
    std::int64_t count = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      count += predicted[i] != s.labels[i];
    }
    wrong[c] = count;
  });
  std::int64_t total = 0;
  for (auto w : wrong) total += w;
  return static_cast<double>(total) / static_cast<double>(n_samples);
}

}  // namespace ldrr
