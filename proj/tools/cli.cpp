#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ldrr/io.hpp"
#include "ldrr/simulation.hpp"

namespace ldrr::cli {

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  bool quiet = false;
};

struct DataOptions {
  std::string label_column = "label";
  std::string penalty = "lasso";
  std::string lambda = "cv";
  double alpha = 0.5;
  bool fisher = false;
  int k = 0;  // 0 = default
  int folds = 10;
  int grid = 30;
  std::string cv_loss = "mse";
  bool standardize = false;
};

struct SimulateOptions {
  std::string scenario;
  int reps = 50;
  std::optional<int> n, p, L, r, n_test;
  std::optional<double> rho, sigma, alpha, eta;
  std::string vary;
  std::vector<std::string> values;
  std::string methods;
  double penalty_alpha = 0.5;
  int folds = 10;
  int grid = 30;
  std::int64_t bayes_samples = 20000;
  std::string cv_loss = "mse";
};

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes to --out when given, otherwise to the result stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

CvLoss parse_loss(const std::string& s) {
  if (s == "mse") return CvLoss::RegressionMSE;
  if (s == "misclass") return CvLoss::Misclassification;
  throw Error(ErrorCode::InvalidArgument, "unknown --cv-loss '" + s + "' (mse|misclass)");
}

PenaltyKind parse_kind(const std::string& s) {
  const auto kind = parse_penalty_kind(s);
  if (!kind) {
    throw Error(ErrorCode::InvalidArgument,
                "unknown penalty '" + s + "' (lasso|enet|grplasso|rr|rr-ridge|ridge|none)");
  }
  return *kind;
}

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output path (default: stdout)");
  sub->add_flag("--quiet", c.quiet, "Do not print the resolved configuration");
}

void add_penalty_options(CLI::App* sub, DataOptions& d) {
  sub->add_option("--label-column", d.label_column, "Name of the label column");
  sub->add_option("--penalty", d.penalty, "lasso|enet|grplasso|rr|rr-ridge|ridge|none");
  sub->add_option("--lambda", d.lambda, "Penalty level or 'cv'");
  sub->add_option("--alpha", d.alpha, "Mixing weight for enet, grplasso, rr-ridge")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--fisher", d.fisher, "Fit the reduced-dimension Fisher variant");
  sub->add_option("--k", d.k, "Number of Fisher directions (default min(L-1, rank))");
  sub->add_option("--folds", d.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  sub->add_option("--grid", d.grid, "Lambda grid size")->check(CLI::Range(2, 10000));
  sub->add_option("--cv-loss", d.cv_loss, "mse|misclass");
  sub->add_flag("--standardize", d.standardize, "Scale features to unit variance");
}

std::string describe_data(const std::string& command, const std::string& data_path,
                          const DataOptions& d, const CommonOptions& c) {
  std::ostringstream os;
  os << "command=" << command << " data=" << data_path << " label_column=" << d.label_column
     << " penalty=" << d.penalty << " lambda=" << d.lambda << " alpha=" << full(d.alpha)
     << " fisher=" << (d.fisher ? 1 : 0) << " k=" << d.k << " folds=" << d.folds
     << " grid=" << d.grid << " cv_loss=" << d.cv_loss
     << " standardize=" << (d.standardize ? 1 : 0) << " seed=" << c.seed;
  return os.str();
}

// Selected penalty plus the CV table when lambda was tuned.
struct Tuning {
  PenaltyConfig penalty;
  std::optional<CvResult> cv;
};

Tuning tune(const LabeledDataset& data, const DataOptions& d, const CommonOptions& c,
            bool force_cv) {
  const PenaltyKind kind = parse_kind(d.penalty);
  Tuning t;
  if (!force_cv && d.lambda != "cv") {
    double lambda = 0.0;
    try {
      std::size_t used = 0;
      lambda = std::stod(d.lambda, &used);
      if (used != d.lambda.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--lambda must be a number or 'cv'");
    }
    t.penalty = make_penalty(kind, lambda, d.alpha);
    validate(t.penalty);
    return t;
  }
  const PenaltyConfig family = make_penalty(kind, 1.0, d.alpha);
  LabeledDataset scaled = data;
  const FeatureTransform transform = FeatureTransform::fit(data.X, d.standardize);
  scaled.X = transform.apply(data.X);
  const std::vector<double> grid = lambda_grid(scaled.X, scaled.Y, family, d.grid);
  CvOptions cv;
  cv.n_folds = d.folds;
  cv.seed = derive_seed(c.seed, "cli-cv");
  cv.loss = parse_loss(d.cv_loss);
  cv.threads = c.threads;
  t.cv = cross_validate(scaled, penalty_path(family, grid), cv);
  t.penalty = t.cv->best;
  return t;
}

FitOptions fit_options(const DataOptions& d) {
  FitOptions opts;
  opts.standardize = d.standardize;
  return opts;
}

int cmd_fit(const std::string& train_path, const std::string& model_path, const DataOptions& d,
            const CommonOptions& c, std::ostream& out, std::ostream& err) {
  const std::string config = describe_data("fit", train_path, d, c);
  if (!c.quiet) err << "# " << config << " model=" << model_path << "\n";
  const CsvDataset csv = load_csv_dataset(train_path, d.label_column);
  const Tuning t = tune(csv.data, d, c, false);

  ModelFile file;
  file.meta.class_names = csv.class_names;
  file.meta.feature_names = csv.feature_names;
  file.meta.label_column = d.label_column;
  file.meta.seed = c.seed;
  file.meta.config = config;
  std::optional<int> k;
  if (d.k > 0) k = d.k;
  if (d.fisher) {
    file.model = fit_ldrr_f(csv.data, t.penalty, k, fit_options(d));
  } else {
    file.model = fit_ldrr(csv.data, t.penalty, fit_options(d));
  }
  save_model(file, model_path);

  const std::vector<int> predicted = predict_any(file.model, csv.data.X);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != csv.data.labels[i];

  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "kind,penalty,lambda,alpha,n,p,L,training_error\n";
  os << (d.fisher ? "ldrr_f" : "ldrr") << "," << penalty_name(kind_of(t.penalty)) << ","
     << full(lambda_of(t.penalty)) << "," << full(alpha_of(t.penalty)) << ","
     << csv.data.n() << "," << csv.data.p() << "," << csv.data.L() << ","
     << fmt(static_cast<double>(wrong) / static_cast<double>(predicted.size())) << "\n";
  if (const auto* m = std::get_if<LdrrModel>(&file.model); m && m->h_near_singular) {
    err << "warning: H_hat is near singular (sigma_min / sigma_max = "
        << fmt(m->h_min_singular / m->h_max_singular) << ")\n";
  }
  return kExitOk;
}

int cmd_cv(const std::string& train_path, const DataOptions& d, const CommonOptions& c,
           std::ostream& out, std::ostream& err) {
  if (!c.quiet) err << "# " << describe_data("cv", train_path, d, c) << "\n";
  const CsvDataset csv = load_csv_dataset(train_path, d.label_column);
  const Tuning t = tune(csv.data, d, c, true);
  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "penalty,lambda,alpha,mean_loss,se,selected\n";
  for (std::size_t i = 0; i < t.cv->candidates.size(); ++i) {
    const auto& cand = t.cv->candidates[i];
    os << penalty_name(kind_of(cand)) << "," << full(lambda_of(cand)) << ","
       << full(alpha_of(cand)) << "," << full(t.cv->mean_loss[i]) << "," << full(t.cv->se[i])
       << "," << (i == t.cv->best_index ? 1 : 0) << "\n";
  }
  return kExitOk;
}

struct LoadedInputs {
  ModelFile file;
  FeatureTable table;
};

LoadedInputs load_inputs(const std::string& model_path, const std::string& data_path) {
  LoadedInputs in{load_model(model_path), {}};
  in.table = load_csv_features(data_path, in.file.meta.feature_names, in.file.meta.label_column);
  return in;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const CommonOptions& c, std::ostream& out, std::ostream& err) {
  if (!c.quiet) {
    err << "# command=predict model=" << model_path << " data=" << data_path
        << " seed=" << c.seed << "\n";
  }
  const LoadedInputs in = load_inputs(model_path, data_path);
  const std::vector<int> predicted = predict_any(in.file.model, in.table.X);
  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "row,predicted\n";
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    os << i << "," << in.file.meta.class_names[static_cast<std::size_t>(predicted[i])] << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const CommonOptions& c, std::ostream& out, std::ostream& err) {
  if (!c.quiet) {
    err << "# command=evaluate model=" << model_path << " data=" << data_path
        << " seed=" << c.seed << "\n";
  }
  const LoadedInputs in = load_inputs(model_path, data_path);
  if (!in.table.labels) {
    throw Error(ErrorCode::MissingLabelColumn,
                data_path + ": label column '" + in.file.meta.label_column + "' not found");
  }
  const std::vector<int> predicted = predict_any(in.file.model, in.table.X);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    wrong += in.file.meta.class_names[static_cast<std::size_t>(predicted[i])] !=
             (*in.table.labels)[i];
  }
  Sink sink(c.out, out);
  auto& os = sink.stream();
  const double rate =
      predicted.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(predicted.size());
  os << "n,errors,error_rate\n" << predicted.size() << "," << wrong << "," << fmt(rate) << "\n";
  return kExitOk;
}

int cmd_project(const std::string& model_path, const std::string& data_path,
                const CommonOptions& c, std::ostream& out, std::ostream& err) {
  if (!c.quiet) {
    err << "# command=project model=" << model_path << " data=" << data_path
        << " seed=" << c.seed << "\n";
  }
  const LoadedInputs in = load_inputs(model_path, data_path);
  const auto* model = std::get_if<LdrrFModel>(&in.file.model);
  if (!model) {
    throw Error(ErrorCode::InvalidArgument, "project needs a model fitted with --fisher");
  }
  const MatrixXd z = project(*model, in.table.X);
  const std::vector<int> predicted = predict_f(*model, in.table.X);
  Sink sink(c.out, out);
  auto& os = sink.stream();
  for (Eigen::Index k = 0; k < z.cols(); ++k) os << "z" << (k + 1) << ",";
  os << "label,predicted\n";
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < z.cols(); ++k) os << full(z(i, k)) << ",";
    os << (in.table.labels ? (*in.table.labels)[static_cast<std::size_t>(i)] : "") << ","
       << in.file.meta.class_names[static_cast<std::size_t>(predicted[static_cast<std::size_t>(i)])]
       << "\n";
  }
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

MethodSpec parse_method(const std::string& name, double alpha) {
  MethodSpec m;
  m.name = name;
  if (name == "oracle") {
    m.kind = MethodKind::Oracle;
    return m;
  }
  std::string pen;
  if (name.rfind("ldrrf-", 0) == 0) {
    m.kind = MethodKind::LdrrF;
    pen = name.substr(6);
  } else if (name.rfind("ldrr-", 0) == 0) {
    m.kind = MethodKind::Ldrr;
    pen = name.substr(5);
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown method '" + name + "' (oracle | ldrr-<penalty> | ldrrf-<penalty>)");
  }
  m.penalty = make_penalty(parse_kind(pen), 1.0, alpha);
  m.tune_lambda = kind_of(m.penalty) != PenaltyKind::None;
  return m;
}

ScenarioConfig base_scenario(const SimulateOptions& s) {
  ScenarioConfig cfg;
  if (s.scenario == "sparse") {
    SparseScenarioConfig sc;
    if (s.n) sc.n = *s.n;
    if (s.p) sc.p = *s.p;
    if (s.L) sc.L = *s.L;
    if (s.n_test) sc.n_test = *s.n_test;
    if (s.rho) sc.rho = *s.rho;
    if (s.sigma) sc.sigma = *s.sigma;
    if (s.alpha) sc.alpha = *s.alpha;
    if (s.eta || s.r) throw Error(ErrorCode::InvalidArgument, "--eta/--r apply to low-rank scenarios");
    cfg = sc;
  } else if (s.scenario == "lowrank1" || s.scenario == "lowrank2") {
    LowRankScenarioConfig lc = s.scenario == "lowrank1" ? LowRankScenarioConfig::model1()
                                                        : LowRankScenarioConfig::model2();
    if (s.n) lc.n = *s.n;
    if (s.p) lc.p = *s.p;
    if (s.L) lc.L = *s.L;
    if (s.r) lc.r = *s.r;
    if (s.n_test) lc.n_test = *s.n_test;
    if (s.rho) lc.rho = *s.rho;
    if (s.eta) lc.eta = *s.eta;
    if (s.sigma || s.alpha) {
      throw Error(ErrorCode::InvalidArgument, "--sigma/--alpha apply to the sparse scenario");
    }
    cfg = lc;
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown scenario '" + s.scenario + "' (sparse|lowrank1|lowrank2)");
  }
  return cfg;
}

ScenarioConfig vary(const ScenarioConfig& cfg, const std::string& param, const std::string& value) {
  double v = 0.0;
  try {
    v = std::stod(value);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--values entry '" + value + "' is not a number");
  }
  ScenarioConfig out = cfg;
  const int iv = static_cast<int>(std::lround(v));
  bool ok = true;
  std::visit(
      [&](auto& c) {
        if (param == "n") c.n = iv;
        else if (param == "p") c.p = iv;
        else if (param == "L") c.L = iv;
        else if (param == "n_test") c.n_test = iv;
        else if (param == "rho") c.rho = v;
        else if constexpr (std::is_same_v<std::decay_t<decltype(c)>, SparseScenarioConfig>) {
          if (param == "sigma") c.sigma = v;
          else if (param == "alpha") c.alpha = v;
          else ok = false;
        } else {
          if (param == "eta") c.eta = v;
          else if (param == "r") c.r = iv;
          else ok = false;
        }
      },
      out);
  if (!ok) throw Error(ErrorCode::InvalidArgument, "cannot vary '" + param + "' in this scenario");
  return out;
}

int cmd_simulate(const SimulateOptions& s, const CommonOptions& c, std::ostream& out,
                 std::ostream& err) {
  const ScenarioConfig base = base_scenario(s);
  std::string method_list = s.methods;
  if (method_list.empty()) {
    method_list = s.scenario == "sparse"
                      ? "oracle,ldrr-lasso,ldrr-enet,ldrrf-lasso,ldrrf-enet"
                      : "oracle,ldrr-rr,ldrr-rr-ridge,ldrrf-rr,ldrrf-rr-ridge";
  }
  std::vector<MethodSpec> methods;
  for (const auto& name : split_list(method_list)) methods.push_back(parse_method(name, s.penalty_alpha));

  ExperimentOptions opts;
  opts.threads = c.threads;
  opts.bayes_samples = s.bayes_samples;
  opts.cv_folds = s.folds;
  opts.grid_size = s.grid;
  opts.cv_loss = parse_loss(s.cv_loss);

  if (!s.vary.empty() && s.values.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--vary needs --values");
  }
  if (!c.quiet) {
    err << "# command=simulate " << describe(with_seed(base, c.seed)) << " reps=" << s.reps
        << " methods=" << method_list << " penalty_alpha=" << full(s.penalty_alpha)
        << " folds=" << s.folds << " grid=" << s.grid << " bayes_samples=" << s.bayes_samples
        << " cv_loss=" << s.cv_loss << " vary=" << (s.vary.empty() ? "none" : s.vary) << "\n";
  }

  std::vector<std::pair<std::string, ScenarioConfig>> settings;
  if (s.vary.empty()) {
    settings.emplace_back("NA", base);
  } else {
    for (const auto& v : s.values) settings.emplace_back(v, vary(base, s.vary, v));
  }

  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "scenario,param,value,method,mean_error,se,bayes_error,excess_risk,h_warnings\n";
  for (const auto& [value, cfg] : settings) {
    const ExperimentReport report = run_experiment(cfg, methods, s.reps, c.seed, opts);
    for (const auto& m : report.methods) {
      os << report.scenario << "," << (s.vary.empty() ? "none" : s.vary) << "," << value << ","
         << m.name << "," << fmt(m.mean_error) << "," << (m.se_defined ? fmt(m.se) : "NA")
         << "," << fmt(report.bayes_error) << "," << fmt(m.excess_risk) << "," << m.h_warnings
         << "\n";
      for (std::size_t r = 0; r < m.failures.size(); ++r) {
        if (!m.failures[r].empty() && !c.quiet) {
          err << "warning: " << m.name << " failed in rep " << r << ": " << m.failures[r] << "\n";
        }
      }
    }
  }
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::Usage: return kExitUsage;
    case ErrorClass::Data: return kExitData;
    case ErrorClass::Numeric: return kExitNumeric;
  }
  return kExitData;
}

std::string_view class_tag(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::Usage: return "usage";
    case ErrorClass::Data: return "data";
    case ErrorClass::Numeric: return "numeric";
  }
  return "data";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear discriminant analysis through regularized regression", "ldrr"};
  app.require_subcommand(1);

  CommonOptions common;
  DataOptions data;
  SimulateOptions sim;
  std::string train_path, data_path, model_path;

  auto* simulate = app.add_subcommand("simulate", "Run a repeated simulation study");
  add_common(simulate, common);
  simulate->add_option("--scenario", sim.scenario, "sparse|lowrank1|lowrank2")->required();
  simulate->add_option("--reps", sim.reps, "Repetitions")->check(CLI::PositiveNumber);
  simulate->add_option("--n", sim.n, "Training sample size");
  simulate->add_option("--p", sim.p, "Feature dimension");
  simulate->add_option("--L", sim.L, "Number of classes");
  simulate->add_option("--r", sim.r, "Rank of the mean matrix (low-rank scenarios)");
  simulate->add_option("--n-test", sim.n_test, "Test sample size");
  simulate->add_option("--rho", sim.rho, "Within-class correlation");
  simulate->add_option("--sigma", sim.sigma, "Noise level (sparse)");
  simulate->add_option("--alpha", sim.alpha, "Class imbalance exponent (sparse)");
  simulate->add_option("--eta", sim.eta, "Mean separation (low-rank)");
  simulate->add_option("--vary", sim.vary, "Scenario parameter to vary");
  simulate->add_option("--values", sim.values, "Values for --vary")->delimiter(',');
  simulate->add_option("--methods", sim.methods, "Comma-separated methods");
  simulate->add_option("--penalty-alpha", sim.penalty_alpha, "Mixing weight for mixed penalties")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--folds", sim.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  simulate->add_option("--grid", sim.grid, "Lambda grid size")->check(CLI::Range(2, 10000));
  simulate->add_option("--bayes-samples", sim.bayes_samples, "Monte-Carlo draws for the Bayes error")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--cv-loss", sim.cv_loss, "mse|misclass");

  auto* fit = app.add_subcommand("fit", "Fit a classifier on a labelled CSV file");
  add_common(fit, common);
  add_penalty_options(fit, data);
  fit->add_option("--train", train_path, "Training CSV")->required();
  fit->add_option("--model", model_path, "Output model file")->required();

  auto* cv = app.add_subcommand("cv", "Cross-validate the penalty level");
  add_common(cv, common);
  add_penalty_options(cv, data);
  cv->add_option("--train", train_path, "Training CSV")->required();

  auto* pred = app.add_subcommand("predict", "Predict labels for a CSV file");
  add_common(pred, common);
  pred->add_option("--model", model_path, "Model file")->required();
  pred->add_option("--data", data_path, "Feature CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Misclassification rate on a labelled CSV file");
  add_common(eval, common);
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--data", data_path, "Labelled CSV")->required();

  auto* proj = app.add_subcommand("project", "Coordinates in the Fisher discriminant space");
  add_common(proj, common);
  proj->add_option("--model", model_path, "Model file fitted with --fisher")->required();
  proj->add_option("--data", data_path, "Feature CSV")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ldrr: error[usage] " << e.get_name() << ": " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, common, out, err);
    if (fit->parsed()) return cmd_fit(train_path, model_path, data, common, out, err);
    if (cv->parsed()) return cmd_cv(train_path, data, common, out, err);
    if (pred->parsed()) return cmd_predict(model_path, data_path, common, out, err);
    if (eval->parsed()) return cmd_evaluate(model_path, data_path, common, out, err);
    if (proj->parsed()) return cmd_project(model_path, data_path, common, out, err);
  } catch (const Error& e) {
    err << "ldrr: error[" << class_tag(e.code()) << "] " << to_string(e.code()) << ": "
        << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "ldrr: error[data] Exception: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace ldrr::cli
