#include "ldrr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "ldrr/parallel.hpp"
#include "ldrr/rng.hpp"

namespace ldrr {

LowRankScenarioConfig LowRankScenarioConfig::model1() { return {}; }

LowRankScenarioConfig LowRankScenarioConfig::model2() {
  LowRankScenarioConfig cfg;
  cfg.variant = LowRankVariant::Model2;
  cfg.rho = 0.2;
  cfg.eta = 2.0;
  return cfg;
}

std::string scenario_name(const ScenarioConfig& cfg) {
  if (const auto* lr = std::get_if<LowRankScenarioConfig>(&cfg)) {
    return lr->variant == LowRankVariant::Model1 ? "lowrank1" : "lowrank2";
  }
  return "sparse";
}

std::string describe(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(10);
  if (const auto* s = std::get_if<SparseScenarioConfig>(&cfg)) {
    os << "scenario=sparse n=" << s->n << " p=" << s->p << " L=" << s->L << " rho=" << s->rho
       << " sigma=" << s->sigma << " alpha=" << s->alpha << " n_test=" << s->n_test
       << " seed=" << s->seed;
  } else {
    const auto& l = std::get<LowRankScenarioConfig>(cfg);
    os << "scenario=" << scenario_name(cfg) << " n=" << l.n << " p=" << l.p << " L=" << l.L
       << " r=" << l.r << " rho=" << l.rho << " eta=" << l.eta << " n_test=" << l.n_test
       << " seed=" << l.seed;
  }
  return os.str();
}

ScenarioConfig with_seed(const ScenarioConfig& cfg, std::uint64_t seed) {
  return std::visit(
      [seed](auto c) -> ScenarioConfig {
        c.seed = seed;
        return c;
      },
      cfg);
}

VectorXd gen_class_probs(int L, double alpha, std::uint64_t seed) {
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "L must be >= 1");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd log_w(L);
  for (int l = 0; l < L; ++l) {
    double nu = unif(rng);
    while (nu == 0.0) nu = unif(rng);
    log_w(l) = alpha == 0.0 ? 0.0 : alpha * std::log(nu);
  }
  if (alpha == 0.0) return VectorXd::Constant(L, 1.0 / L);
  // nu^alpha / sum nu^alpha, normalised in log space against underflow.
  const VectorXd w = (log_w.array() - log_w.maxCoeff()).exp();
  return w / w.sum();
}

MatrixXd gen_ar1_scaled_cov(int p, double rho, double diag_low, double diag_high,
                            std::uint64_t seed) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must be in [0, 1)");
  if (!(diag_low >= 0.0 && diag_high >= diag_low && diag_high > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= diag_low <= diag_high, diag_high > 0");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(diag_low, diag_high);
  VectorXd d(p);
  for (int i = 0; i < p; ++i) {
    double v = diag_low == diag_high ? diag_low : unif(rng);
    while (v <= 0.0) v = unif(rng);
    d(i) = v;
  }
  MatrixXd w(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      w(i, j) = std::sqrt(d(i) * d(j)) * std::pow(rho, std::abs(i - j));
    }
  }
  return w;
}

MatrixXd random_orthonormal_frame(int p, int r, std::uint64_t seed) {
  if (r < 1 || r > p) throw Error(ErrorCode::InvalidArgument, "need 1 <= r <= p");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(p, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(p, r);
  const MatrixXd rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int k = 0; k < r; ++k) {
    if (rmat(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

LabeledDataset sample_dataset(const MixtureModel& model, Eigen::Index n, std::uint64_t seed,
                              bool require_all_classes) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  constexpr int kAttempts = 100;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng = make_rng(seed, "sample", static_cast<std::uint64_t>(attempt));
    MixtureSample s = sample_mixture(model, n, rng);
    LabeledDataset d =
        LabeledDataset::from_labels(std::move(s.x), std::move(s.labels),
                                    static_cast<int>(model.classes()));
    if (!require_all_classes) return d;
    const auto counts = d.class_counts();
    if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c > 0; })) return d;
  }
  throw Error(ErrorCode::EmptyClass, "could not draw every class in " +
                                         std::to_string(kAttempts) + " attempts at n = " +
                                         std::to_string(n));
}

namespace {

Scenario finish(MixtureModel model, int n, int n_test, std::uint64_t seed) {
  LabeledDataset train = sample_dataset(model, n, derive_seed(seed, "train"), true);
  LabeledDataset test = sample_dataset(model, n_test, derive_seed(seed, "test"), false);
  return Scenario{std::move(model), std::move(train), std::move(test)};
}

}  // namespace

Scenario gen_sparse_scenario(const SparseScenarioConfig& cfg) {
  if (cfg.L < 1 || cfg.n < 1 || cfg.n_test < 1) {
    throw Error(ErrorCode::InvalidArgument, "sparse scenario: n, n_test, L must be >= 1");
  }
  if (5 * cfg.L > cfg.p) {
    throw Error(ErrorCode::InvalidArgument, "sparse scenario needs 5 L <= p");
  }
  if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");

  Rng rng = make_rng(cfg.seed, "means");
  std::normal_distribution<double> normal(0.0, 2.0);
  MatrixXd means = MatrixXd::Zero(cfg.p, cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    for (int j = 5 * l; j < 5 * l + 5; ++j) means(j, l) = normal(rng);
  }
  MatrixXd cov = cfg.sigma * cfg.sigma *
                 gen_ar1_scaled_cov(cfg.p, cfg.rho, 1.0, 3.0, derive_seed(cfg.seed, "cov"));
  VectorXd priors = gen_class_probs(cfg.L, cfg.alpha, derive_seed(cfg.seed, "priors"));
  return finish(MixtureModel(std::move(means), std::move(cov), std::move(priors)), cfg.n,
                cfg.n_test, cfg.seed);
}

Scenario gen_lowrank_scenario(const LowRankScenarioConfig& cfg) {
  if (cfg.L < 1 || cfg.n < 1 || cfg.n_test < 1 || cfg.p < 1) {
    throw Error(ErrorCode::InvalidArgument, "low-rank scenario: n, n_test, p, L must be >= 1");
  }
  if (cfg.r < 1 || cfg.r > cfg.p) throw Error(ErrorCode::InvalidArgument, "need 1 <= r <= p");
  if (!(cfg.eta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");

  const MatrixXd frame = random_orthonormal_frame(cfg.p, cfg.r, derive_seed(cfg.seed, "frame"));
  Rng rng = make_rng(cfg.seed, "loadings");
  std::normal_distribution<double> normal(0.0, std::sqrt(32.0 / cfg.r));
  MatrixXd loadings(cfg.r, cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    for (int k = 0; k < cfg.r; ++k) loadings(k, l) = normal(rng);
  }
  MatrixXd means = cfg.eta * frame * loadings;

  MatrixXd cov;
  if (cfg.variant == LowRankVariant::Model1) {
    cov = gen_ar1_scaled_cov(cfg.p, cfg.rho, 1.0, 1.0, derive_seed(cfg.seed, "cov"));
  } else {
    const MatrixXd latent = gen_ar1_scaled_cov(cfg.r, 0.6, 1.0, 1.0, 0);
    cov = cfg.eta * cfg.eta * frame * latent * frame.transpose() +
          gen_ar1_scaled_cov(cfg.p, cfg.rho, 0.0, 1.0, derive_seed(cfg.seed, "cov"));
    cov = symmetrize(cov);
  }
  VectorXd priors = VectorXd::Constant(cfg.L, 1.0 / cfg.L);
  return finish(MixtureModel(std::move(means), std::move(cov), std::move(priors)), cfg.n,
                cfg.n_test, cfg.seed);
}

Scenario generate(const ScenarioConfig& cfg) {
  return std::visit(
      [](const auto& c) -> Scenario {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, SparseScenarioConfig>) {
          return gen_sparse_scenario(c);
        } else {
          return gen_lowrank_scenario(c);
        }
      },
      cfg);
}

double evaluate(const PredictFn& predict_fn, const LabeledDataset& test) {
  if (test.n() == 0) throw Error(ErrorCode::InvalidArgument, "evaluate needs a nonempty test set");
  const std::vector<int> predicted = predict_fn(test.X);
  if (predicted.size() != test.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "predictor returned the wrong number of labels");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != test.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

PredictFn train_method(const MethodSpec& method, const Scenario& scenario,
                       const ExperimentOptions& opts, std::uint64_t seed, double* h_ratio) {
  if (method.kind == MethodKind::Oracle) {
    auto rule = std::make_shared<BayesRule>(scenario.model);
    return [rule](const MatrixXd& x) { return rule->classify_rows(x); };
  }
  const LabeledDataset& train = scenario.train;
  PenaltyConfig penalty = method.penalty;
  if (method.tune_lambda && kind_of(penalty) != PenaltyKind::None) {
    const FeatureTransform t = FeatureTransform::fit(train.X, opts.fit.standardize);
    const std::vector<double> grid =
        lambda_grid(t.apply(train.X), train.Y, penalty, opts.grid_size);
    const auto counts = train.class_counts();
    const auto smallest = *std::min_element(counts.begin(), counts.end());
    CvOptions cv;
    cv.n_folds = static_cast<int>(std::min<Eigen::Index>(opts.cv_folds, smallest));
    cv.seed = derive_seed(seed, "cv");
    cv.loss = opts.cv_loss;
    cv.solver = opts.fit.solver;
    penalty = cross_validate(train, penalty_path(penalty, grid), cv).best;
  }
  if (method.kind == MethodKind::Ldrr) {
    auto model = std::make_shared<LdrrModel>(fit_ldrr(train, penalty, opts.fit));
    if (h_ratio) {
      *h_ratio = model->h_max_singular > 0.0 ? model->h_min_singular / model->h_max_singular
                                             : 0.0;
    }
    return [model](const MatrixXd& x) { return predict(*model, x); };
  }
  auto model = std::make_shared<LdrrFModel>(fit_ldrr_f(train, penalty, method.K, opts.fit));
  return [model](const MatrixXd& x) { return predict_f(*model, x); };
}

ExperimentReport run_experiment(const ScenarioConfig& scenario,
                                const std::vector<MethodSpec>& methods, int n_reps,
                                std::uint64_t base_seed, const ExperimentOptions& opts) {
  if (n_reps < 1) throw Error(ErrorCode::InvalidArgument, "n_reps must be >= 1");
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "method list is empty");

  const auto reps = static_cast<std::size_t>(n_reps);
  const auto n_methods = methods.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  ExperimentReport report;
  report.scenario = scenario_name(scenario);
  report.config = describe(scenario);
  report.n_reps = n_reps;
  report.base_seed = base_seed;
  report.rep_seeds.resize(reps);
  report.bayes_errors.assign(reps, nan);
  report.delta_inf.assign(reps, nan);
  report.methods.resize(n_methods);
  for (std::size_t m = 0; m < n_methods; ++m) {
    report.methods[m].name = methods[m].name;
    report.methods[m].errors.assign(reps, nan);
    report.methods[m].h_ratio.assign(reps, nan);
    report.methods[m].failures.assign(reps, "");
  }
  for (std::size_t r = 0; r < reps; ++r) report.rep_seeds[r] = derive_seed(base_seed, "rep", r);

  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const std::uint64_t seed = report.rep_seeds[r];
    const Scenario draw = generate(with_seed(scenario, seed));
    report.bayes_errors[r] =
        bayes_error_mc(draw.model, opts.bayes_samples, derive_seed(seed, "bayes"));
    report.delta_inf[r] = separation_delta(draw.model.centered());
    for (std::size_t m = 0; m < n_methods; ++m) {
      try {
        double ratio = nan;
        const PredictFn fn =
            train_method(methods[m], draw, opts, derive_seed(seed, "method", m), &ratio);
        report.methods[m].errors[r] = evaluate(fn, draw.test);
        report.methods[m].h_ratio[r] = ratio;
      } catch (const Error& e) {
        report.methods[m].failures[r] = std::string(to_string(e.code())) + ": " + e.what();
      }
    }
  });

  auto mean_se = [](const std::vector<double>& xs, double& mean, double& se, bool& defined) {
    std::vector<double> ok;
    for (double x : xs) {
      if (!std::isnan(x)) ok.push_back(x);
    }
    mean = nan;
    se = 0.0;
    defined = false;
    if (ok.empty()) return;
    double sum = 0.0;
    for (double x : ok) sum += x;
    mean = sum / static_cast<double>(ok.size());
    if (ok.size() < 2) return;
    double ss = 0.0;
    for (double x : ok) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(ok.size() - 1)) /
         std::sqrt(static_cast<double>(ok.size()));
    defined = true;
  };

  bool bayes_defined = false;
  mean_se(report.bayes_errors, report.bayes_error, report.bayes_se, bayes_defined);
  for (auto& res : report.methods) {
    mean_se(res.errors, res.mean_error, res.se, res.se_defined);
    res.excess_risk = res.mean_error - report.bayes_error;
    for (double ratio : res.h_ratio) {
      if (!std::isnan(ratio) && !(ratio >= 1e-8)) ++res.h_warnings;
    }
  }
  return report;
}

}  // namespace ldrr
