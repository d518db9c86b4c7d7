// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "ldrr/io.hpp"
#include "ldrr/ldrr.hpp"
#include "ldrr/simulation.hpp"
#include "test_util.hpp"

using namespace ldrr;
using ldrr::testing::random_centered_model;
using ldrr::testing::random_normal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Dense-inverse oracles for the population identities.
Outcome key_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double bstar_err = 0.0, hform_err = 0.0, omega_err = 0.0;
  for (int m = 0; m < 200; ++m) {
    const MixtureModel model = random_centered_model(rng);
    const MatrixXd& M = model.means();
    const MatrixXd Dpi = model.priors().asDiagonal();
    const MatrixXd Sw = model.within_cov();
    const MatrixXd Sigma = Sw + M * Dpi * M.transpose();
    const MatrixXd B = Sigma.inverse() * M * Dpi;
    const MatrixXd H1 = Dpi - B.transpose() * Sigma * B;
    const MatrixXd H2 = Dpi - Dpi * M.transpose() * B;
    const MatrixXd H3 = Dpi - B.transpose() * M * Dpi;
    hform_err = std::max({hform_err, max_abs(H1 - H2), max_abs(H1 - H3)});

    const MatrixXd Hv = population_H(model, HForm::ViaSigma);
    const MatrixXd Hl = population_H(model, HForm::ViaMLeft);
    const MatrixXd Hr = population_H(model, HForm::ViaMRight);
    hform_err = std::max({hform_err, max_abs(Hv - Hl), max_abs(Hv - Hr), max_abs(Hl - H2)});

    const MatrixXd Bstar = population_Bstar(model);
    const MatrixXd Bstar_ref = Sw.inverse() * M;
    bstar_err = std::max({bstar_err, max_abs(Bstar - population_B(model) * Hl.inverse()),
                          max_abs(Bstar - Bstar_ref)});

    const MatrixXd omega_ref = MatrixXd(model.priors().cwiseInverse().asDiagonal()) +
                               M.transpose() * Sw.inverse() * M;
    omega_err = std::max({omega_err, max_abs(H1.inverse() - omega_ref),
                          max_abs(population_omega(model) - omega_ref)});
  }
  const double secs = seconds_since(t0);
  const bool ok = bstar_err <= 1e-8 && hform_err <= 1e-10 && omega_err <= 1e-8 && secs < 10.0;
  return {ok, "B*-BH^-1 " + fmt("%.2e", bstar_err) + ", H forms " + fmt("%.2e", hform_err) +
                  ", H^-1-Omega " + fmt("%.2e", omega_err) + ", " + fmt("%.2f", secs) + " s"};
}

double top_two_margin(const VectorXd& s) {
  VectorXd v = s;
  std::sort(v.data(), v.data() + v.size());
  return v.size() < 2 ? INFINITY : v(1) - v(0);
}

// Runs `classify` against the Mahalanobis Bayes rule on 50 random models x 100
// points drawn from each model; returns the number of disagreements among
// points with a clear margin.
struct RuleCheck {
  int compared = 0;
  int mismatches = 0;
};

RuleCheck compare_rules(
    const std::function<std::vector<std::function<int(const VectorXd&)>>(const MixtureModel&)>&
        rules_for) {
  Rng rng(202);
  RuleCheck out;
  for (int m = 0; m < 50; ++m) {
    const MixtureModel model = random_centered_model(rng);
    const auto rules = rules_for(model);
    const MixtureSample pts = sample_mixture(model, 100, rng);
    for (Eigen::Index i = 0; i < pts.x.rows(); ++i) {
      const VectorXd x = pts.x.row(i).transpose();
      if (top_two_margin(bayes_scores(model, x)) <= 1e-9) continue;
      const int truth = bayes_classify(model, x);
      ++out.compared;
      for (const auto& rule : rules) out.mismatches += rule(x) != truth;
    }
  }
  return out;
}

Outcome rule_equivalence() {
  const RuleCheck r = compare_rules([](const MixtureModel& model) {
    auto gform = std::make_shared<BayesRule>(model);
    auto via_bstar = std::make_shared<ProjectedRule>(model, population_Bstar(model));
    auto via_b = std::make_shared<ProjectedRule>(model, population_B(model));
    return std::vector<std::function<int(const VectorXd&)>>{
        [gform](const VectorXd& x) { return gform->classify(x); },
        [via_bstar](const VectorXd& x) { return via_bstar->classify(x); },
        [via_b](const VectorXd& x) { return via_b->classify(x); }};
  });
  return {r.mismatches == 0 && r.compared > 0,
          std::to_string(r.compared) + " points compared, " + std::to_string(r.mismatches) +
              " disagreements"};
}

double kkt_residual(const MatrixXd& X, const VectorXd& y, const VectorXd& b, double l1,
                    double l2) {
  const double n = static_cast<double>(X.rows());
  const VectorXd grad = (2.0 / n) * X.transpose() * (y - X * b);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double v = b(j) == 0.0
                         ? std::max(0.0, std::abs(grad(j)) - l1)
                         : std::abs(grad(j) - l1 * (b(j) > 0 ? 1.0 : -1.0) - l2 * b(j));
    worst = std::max(worst, v);
  }
  return worst;
}

LabeledDataset random_problem(Rng& rng, int n, int p, int L) {
  std::uniform_int_distribution<int> cls(0, L - 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < L ? i : cls(rng);
  MatrixXd X = random_normal(n, p, rng);
  for (int i = 0; i < n; ++i) X(i, labels[static_cast<std::size_t>(i)] % p) += 1.0;
  return LabeledDataset::from_labels(X, labels, L);
}

Outcome sparse_solver() {
  Rng rng(303);
  double worst_kkt = 0.0;
  for (int t = 0; t < 50; ++t) {
    const LabeledDataset d = random_problem(rng, 40, 10, 3);
    const double alpha = t % 2 == 0 ? 1.0 : 0.5;
    const PenaltyConfig family = alpha == 1.0 ? PenaltyConfig{Lasso{}} : ElasticNet{0.0, alpha};
    const double lmax = lambda_max(d.X, d.Y, family);
    for (double frac : {0.5, 0.1, 0.01}) {
      const double lambda = frac * lmax;
      const RegressionFit f = fit_penalized(d.X, d.Y, with_lambda(family, lambda));
      for (Eigen::Index l = 0; l < d.L(); ++l)
        worst_kkt = std::max(worst_kkt, kkt_residual(d.X, d.Y.col(l), f.B_hat.col(l),
                                                     alpha * lambda, (1.0 - alpha) * lambda));
    }
  }

  // X^T X / n = I: b_j = S(2 c_j, l1) / (2 + l2) with c = X^T y / n.
  double worst_closed = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 40, p = 10;
    Eigen::HouseholderQR<MatrixXd> qr(random_normal(n, p, rng));
    const MatrixXd X = std::sqrt(static_cast<double>(n)) * (qr.householderQ() * MatrixXd::Identity(n, p));
    const MatrixXd Y = random_normal(n, 3, rng) + X.leftCols(3);
    const MatrixXd C = X.transpose() * Y / static_cast<double>(n);
    for (double alpha : {1.0, 0.5}) {
      const double lambda = 0.4;
      const RegressionFit f = fit_penalized(X, Y, ElasticNet{lambda, alpha});
      const double l1 = alpha * lambda, l2 = (1.0 - alpha) * lambda;
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index l = 0; l < 3; ++l) {
          const double z = 2.0 * C(j, l);
          const double expected = (z > l1 ? z - l1 : z < -l1 ? z + l1 : 0.0) / (2.0 + l2);
          worst_closed = std::max(worst_closed, std::abs(f.B_hat(j, l) - expected));
        }
    }
  }

  bool zero_at_max = true;
  for (int t = 0; t < 10; ++t) {
    const LabeledDataset d = random_problem(rng, 40, 10, 3);
    for (const PenaltyConfig& family : {PenaltyConfig{Lasso{}}, PenaltyConfig{ElasticNet{0.0, 0.3}}}) {
      const double lmax = lambda_max(d.X, d.Y, family);
      for (double scale : {1.0, 1.5}) {
        const RegressionFit f = fit_penalized(d.X, d.Y, with_lambda(family, scale * lmax));
        zero_at_max = zero_at_max && (f.B_hat.array() == 0.0).all();
      }
    }
  }
  const bool ok = worst_kkt <= 1e-6 && worst_closed <= 1e-8 && zero_at_max;
  return {ok, "KKT " + fmt("%.2e", worst_kkt) + ", closed form " + fmt("%.2e", worst_closed) +
                  ", zero at lambda_max " + (zero_at_max ? "yes" : "no")};
}

// Best rank-r fit: OLS through QR, then projection of the fitted values
// onto their top r right singular vectors.
double brute_rank_loss(const MatrixXd& X, const MatrixXd& Y, int r) {
  const MatrixXd B_ols = ldrr::testing::qr_solve(X, Y);
  Eigen::JacobiSVD<MatrixXd> svd(X * B_ols, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const MatrixXd V = svd.matrixV().leftCols(r);
  return (Y - X * B_ols * V * V.transpose()).squaredNorm() / static_cast<double>(X.rows());
}

Outcome reduced_rank() {
  Rng rng(404);
  double worst = 0.0;
  int rank_mismatch = 0, checked = 0;
  for (int t = 0; t < 30; ++t) {
    const LabeledDataset d = random_problem(rng, 60, 8, 6);
    std::vector<double> loss;
    for (int r = 0; r <= 6; ++r) loss.push_back(brute_rank_loss(d.X, d.Y, r));
    for (double lambda : lambda_grid(d.X, d.Y, ReducedRank{}, 10)) {
      const RegressionFit f = fit_reduced_rank(d.X, d.Y, lambda);
      double best = INFINITY, second = INFINITY;
      int best_r = 0;
      for (int r = 0; r <= 6; ++r) {
        const double v = loss[static_cast<std::size_t>(r)] + lambda * r;
        if (v < best) {
          second = best;
          best = v;
          best_r = r;
        } else {
          second = std::min(second, v);
        }
      }
      worst = std::max({worst, std::abs(f.objective - best),
                        std::abs(regression_objective(d.X, d.Y, f.B_hat, ReducedRank{lambda}) - best)});
      if (second - best > 1e-9) {
        ++checked;
        rank_mismatch += !f.selected_rank || *f.selected_rank != best_r;
      }
    }
  }
  return {worst <= 1e-9 && rank_mismatch == 0,
          "objective gap " + fmt("%.2e", worst) + ", rank mismatches " +
              std::to_string(rank_mismatch) + "/" + std::to_string(checked)};
}

struct SimResults {
  std::vector<int> sparse_n{100, 200, 400, 800};
  std::vector<ExperimentReport> sparse;  // one per n
  ExperimentReport lowrank;
};

SimResults run_simulations() {
  SimResults out;
  ExperimentOptions opts;
  opts.bayes_samples = 100000;
  const MethodSpec l1{"ldrr-lasso", MethodKind::Ldrr, Lasso{}, true, std::nullopt};
  for (int n : out.sparse_n) {
    SparseScenarioConfig cfg;
    cfg.n = n;
    cfg.p = 100;
    cfg.L = 4;
    cfg.rho = 0.6;
    cfg.sigma = 1.0;
    cfg.alpha = 0.0;
    cfg.n_test = 1000;
    std::vector<MethodSpec> methods{l1};
    if (n == 800) methods.push_back({"ldrrf-lasso", MethodKind::LdrrF, Lasso{}, true, 3});
    out.sparse.push_back(run_experiment(cfg, methods, 20, 5000 + static_cast<std::uint64_t>(n), opts));
  }
  LowRankScenarioConfig lr = LowRankScenarioConfig::model1();
  lr.n = 800;
  lr.p = 80;
  lr.L = 10;
  lr.r = 3;
  lr.eta = 1.0;
  lr.n_test = 1000;
  out.lowrank = run_experiment(
      lr,
      {l1,
       {"ldrr-rr", MethodKind::Ldrr, ReducedRank{}, true, std::nullopt},
       {"ldrr-rr-ridge", MethodKind::Ldrr, ReducedRankRidge{0.0, 0.5}, true, std::nullopt}},
      20, 6000, opts);
  return out;
}

const MethodResult& method(const ExperimentReport& r, const std::string& name) {
  for (const auto& m : r.methods)
    if (m.name == name) return m;
  throw std::runtime_error("missing method " + name);
}

Outcome consistency_trend(const SimResults& s) {
  std::vector<double> ex;
  std::string detail = "excess risk";
  bool failures = false;
  for (std::size_t i = 0; i < s.sparse.size(); ++i) {
    const MethodResult& m = method(s.sparse[i], "ldrr-lasso");
    for (const auto& f : m.failures) failures = failures || !f.empty();
    ex.push_back(m.excess_risk);
    detail += " n=" + std::to_string(s.sparse_n[i]) + ":" + fmt("%.4f", m.excess_risk);
  }
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
    if (ex[i + 1] > ex[i]) {
      ++inversions;
      small = small && ex[i + 1] - ex[i] <= 0.005;
    }
  }
  const bool ok = !failures && inversions <= 1 && small && ex.back() <= 0.05;
  return {ok, detail + ", inversions " + std::to_string(inversions)};
}

Outcome lowrank_benefit(const SimResults& s) {
  const double l1 = method(s.lowrank, "ldrr-lasso").mean_error;
  const double rr = method(s.lowrank, "ldrr-rr").mean_error;
  const double rrr = method(s.lowrank, "ldrr-rr-ridge").mean_error;
  return {std::min(rr, rrr) <= l1 + 0.02,
          "L1 " + fmt("%.4f", l1) + ", RR " + fmt("%.4f", rr) + ", RR+L2 " + fmt("%.4f", rrr)};
}

Outcome h_invertibility(const SimResults& s) {
  int good = 0, total = 0;
  auto tally = [&](const ExperimentReport& r) {
    for (const auto& m : r.methods)
      for (double v : m.h_ratio) {
        if (std::isnan(v)) continue;  // LDRR-F never forms H
        ++total;
        good += v > 1e-8;
      }
  };
  for (const auto& r : s.sparse) tally(r);
  tally(s.lowrank);
  const double frac = total ? static_cast<double>(good) / total : 0.0;
  return {total > 0 && frac >= 0.95,
          std::to_string(good) + "/" + std::to_string(total) + " reps well conditioned"};
}

double cw_orthonormality(const LdrrFModel& f) {
  const MatrixXd g = f.directions.transpose() * f.C_w * f.directions;
  return max_abs(g - MatrixXd::Identity(g.rows(), g.cols()));
}

Outcome fisher_sanity(const SimResults& s) {
  double worst_ortho = 0.0;
  const RuleCheck r = compare_rules([&](const MixtureModel& model) {
    // Full K is min(L - 1, rank), which is below L - 1 when p < L - 1.
    auto f = std::make_shared<LdrrFModel>(population_fisher_model(model));
    worst_ortho = std::max(worst_ortho, cw_orthonormality(*f));
    return std::vector<std::function<int(const VectorXd&)>>{
        [f](const VectorXd& x) { return argmin_index(fisher_scores(*f, x)); }};
  });

  const ExperimentReport& big = s.sparse.back();
  const double gap = std::abs(method(big, "ldrrf-lasso").mean_error -
                              method(big, "ldrr-lasso").mean_error);

  // Directions of estimated fits on the same data.
  for (int rep = 0; rep < 3; ++rep) {
    SparseScenarioConfig cfg;
    cfg.n = 800;
    cfg.p = 100;
    cfg.L = 4;
    cfg.n_test = 10;
    cfg.seed = big.rep_seeds[static_cast<std::size_t>(rep)];
    const Scenario sc = gen_sparse_scenario(cfg);
    worst_ortho = std::max(worst_ortho, cw_orthonormality(fit_ldrr_f(sc.train, Lasso{0.01}, 3)));
  }
  const bool ok = r.mismatches == 0 && r.compared > 0 && gap <= 0.03 && worst_ortho <= 1e-6;
  return {ok, "population plug-in disagreements " + std::to_string(r.mismatches) + "/" +
                  std::to_string(r.compared) + ", |LDRR-F - LDRR| " + fmt("%.4f", gap) +
                  ", C_w-orthonormality " + fmt("%.2e", worst_ortho)};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "ldrr");
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_csv(const fs::path& p, const LabeledDataset& d) {
  std::ofstream out(p);
  out.precision(17);
  for (Eigen::Index j = 0; j < d.p(); ++j) out << "x" << j << ",";
  out << "label\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) out << d.X(i, j) << ",";
    out << "c" << d.labels[static_cast<std::size_t>(i)] << "\n";
  }
}

bool same_bits(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

Outcome determinism() {
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::create_directories(dir);
  int identical = 0, total = 0;
  auto same = [&](const std::string& a, const std::string& b) {
    ++total;
    identical += !a.empty() && a == b;
  };

  const std::vector<std::string> sims[] = {
      {"simulate", "--scenario", "sparse", "--n", "80", "--p", "30", "--L", "3", "--reps", "3",
       "--n-test", "200", "--bayes-samples", "5000", "--seed", "17", "--quiet"},
      {"simulate", "--scenario", "lowrank2", "--n", "120", "--p", "20", "--L", "5", "--r", "2",
       "--reps", "2", "--n-test", "200", "--bayes-samples", "5000", "--seed", "18", "--quiet",
       "--methods", "oracle,ldrr-rr-ridge,ldrrf-grplasso", "--vary", "n", "--values", "100,150"}};
  for (const auto& args : sims) {
    const CliRun a = run(args);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "2"});
    const CliRun b = run(args);
    const CliRun c = run(threaded);
    same(a.code == 0 ? a.out : "", b.out);
    same(a.code == 0 ? a.out : "", c.out);
  }

  SparseScenarioConfig cfg;
  cfg.n = 150;
  cfg.p = 25;
  cfg.L = 4;
  cfg.n_test = 100;
  cfg.seed = 19;
  const Scenario sc = gen_sparse_scenario(cfg);
  write_csv(dir / "train.csv", sc.train);
  const std::vector<std::vector<std::string>> fits = {
      {"--penalty", "lasso", "--lambda", "cv", "--seed", "3"},
      {"--penalty", "rr-ridge", "--lambda", "cv", "--standardize", "--seed", "4"},
      {"--penalty", "enet", "--lambda", "cv", "--fisher", "--seed", "5"}};
  for (std::size_t k = 0; k < fits.size(); ++k) {
    std::string bytes[2];
    for (int t = 0; t < 2; ++t) {
      const fs::path model = dir / ("fit" + std::to_string(k) + "_" + std::to_string(t) + ".json");
      std::vector<std::string> args{"fit", "--train", (dir / "train.csv").string(), "--model",
                                    model.string(), "--quiet"};
      args.insert(args.end(), fits[k].begin(), fits[k].end());
      if (run(args).code == 0) bytes[t] = slurp(model);
    }
    same(bytes[0], bytes[1]);
  }

  // Save -> load -> predict on 100 random rows, both model kinds.
  Rng rng(909);
  const MatrixXd X = 3.0 * random_normal(100, 25, rng);
  int bitwise = 0;
  for (int kind = 0; kind < 2; ++kind) {
    ModelFile file;
    if (kind == 0) {
      file.model = fit_ldrr(sc.train, ElasticNet{0.01, 0.5}, FitOptions{.solver = {}, .standardize = true});
    } else {
      file.model = fit_ldrr_f(sc.train, GroupLassoRidge{0.01, 0.7});
    }
    file.meta.class_names = {"c0", "c1", "c2", "c3"};
    for (int j = 0; j < 25; ++j) file.meta.feature_names.push_back("x" + std::to_string(j));
    const fs::path path = dir / ("persist" + std::to_string(kind) + ".json");
    save_model(file, path.string());
    const ModelFile back = load_model(path.string());
    bool ok = predict_any(back.model, X) == predict_any(file.model, X);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const VectorXd x = X.row(i).transpose();
      if (kind == 0) {
        ok = ok && same_bits(discriminant_scores(std::get<LdrrModel>(file.model), x),
                             discriminant_scores(std::get<LdrrModel>(back.model), x));
      } else {
        ok = ok && same_bits(fisher_scores(std::get<LdrrFModel>(file.model), x),
                             fisher_scores(std::get<LdrrFModel>(back.model), x));
      }
    }
    bitwise += ok;
  }
  return {identical == total && bitwise == 2,
          std::to_string(identical) + "/" + std::to_string(total) + " reruns identical, " +
              std::to_string(bitwise) + "/2 models bitwise after save/load"};
}

Outcome oracle_floor(const SimResults& s) {
  int violations = 0, checked = 0;
  double worst = -INFINITY;
  auto check = [&](const ExperimentReport& r) {
    for (const auto& m : r.methods) {
      if (m.name == "oracle") continue;
      const double se = std::sqrt(m.se * m.se + r.bayes_se * r.bayes_se);
      const double z = (r.bayes_error - m.mean_error) / se;
      worst = std::max(worst, z);
      ++checked;
      violations += z > 2.0;
    }
  };
  for (const auto& r : s.sparse) check(r);
  check(s.lowrank);
  return {violations == 0 && checked > 0,
          std::to_string(checked) + " method/scenario pairs, largest Bayes-minus-method " +
              fmt("%.2f", worst) + " SE"};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "key identities", key_identities);
  report(2, "rule equivalence", rule_equivalence);
  report(3, "lasso/elastic-net solver", sparse_solver);
  report(4, "reduced-rank solver", reduced_rank);

  const auto t0 = std::chrono::steady_clock::now();
  SimResults sims;
  bool sims_ok = true;
  std::string sims_error;
  try {
    sims = run_simulations();
  } catch (const std::exception& e) {
    sims_ok = false;
    sims_error = e.what();
  }
  std::printf("# simulations for criteria 5-8 and 10 took %.1f s\n", seconds_since(t0));
  auto needs_sims = [&](const std::function<Outcome(const SimResults&)>& fn) {
    return [&, fn]() -> Outcome {
      if (!sims_ok) return {false, "simulation failed: " + sims_error};
      return fn(sims);
    };
  };

  report(5, "consistency trend", needs_sims(consistency_trend));
  report(6, "low-rank benefit", needs_sims(lowrank_benefit));
  report(7, "H invertibility", needs_sims(h_invertibility));
  report(8, "LDRR-F sanity", needs_sims(fisher_sanity));
  report(9, "determinism and persistence", determinism);
  report(10, "oracle floor", needs_sims(oracle_floor));

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
