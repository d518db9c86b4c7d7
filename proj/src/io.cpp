#include "ldrr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ldrr {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV line; double quotes group commas, "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError,
                  path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw Error(ErrorCode::ParseError, path + ": missing header row");
  return table;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

std::size_t find_column(const CsvTable& table, const std::string& name) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == name) return j;
  }
  return table.header.size();
}

double parse_cell(const CsvTable& table, std::size_t row, std::size_t col,
                  const std::string& path) {
  const std::string& cell = table.rows[row][col];
  const std::string where = path + ": row " + std::to_string(table.line_numbers[row]) +
                            ", column '" + table.header[col] + "'";
  if (cell.empty()) throw Error(ErrorCode::ParseError, where + " is empty");
  std::string_view view = cell;
  if (view.front() == '+') view.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
  if (ec != std::errc() || ptr != view.data() + view.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::NonNumericFeature, where + " is not a finite number: '" + cell + "'");
  }
  return value;
}

}  // namespace

CsvDataset load_csv_dataset(const std::string& path, const std::string& label_column) {
  const CsvTable table = read_csv(path);
  const std::size_t label_col = find_column(table, label_column);
  if (label_col == table.header.size()) {
    throw Error(ErrorCode::MissingLabelColumn, path + ": label column '" + label_column +
                                                   "' not found; available: " +
                                                   join(table.header));
  }
  CsvDataset out;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j == label_col) continue;
    feature_cols.push_back(j);
    out.feature_names.push_back(table.header[j]);
  }
  if (feature_cols.empty()) throw Error(ErrorCode::ParseError, path + ": no feature columns");
  if (table.rows.empty()) throw Error(ErrorCode::ParseError, path + ": no data rows");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  MatrixXd X(n, static_cast<Eigen::Index>(feature_cols.size()));
  std::vector<int> labels(table.rows.size());
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string& name = table.rows[i][label_col];
    if (name.empty()) {
      throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(table.line_numbers[i]) +
                                             ", column '" + label_column + "' is empty");
    }
    auto [it, inserted] = class_index.emplace(name, static_cast<int>(out.class_names.size()));
    if (inserted) out.class_names.push_back(name);
    labels[i] = it->second;
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          parse_cell(table, i, feature_cols[k], path);
    }
  }
  out.data = LabeledDataset::from_labels(std::move(X), std::move(labels),
                                         static_cast<int>(out.class_names.size()));
  return out;
}

FeatureTable load_csv_features(const std::string& path,
                               const std::vector<std::string>& feature_names,
                               const std::string& label_column) {
  const CsvTable table = read_csv(path);
  std::vector<std::size_t> cols;
  for (const auto& name : feature_names) {
    const std::size_t j = find_column(table, name);
    if (j == table.header.size()) {
      throw Error(ErrorCode::ParseError, path + ": feature column '" + name + "' not found");
    }
    cols.push_back(j);
  }
  FeatureTable out;
  out.X.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          parse_cell(table, i, cols[k], path);
    }
  }
  const std::size_t label_col = find_column(table, label_column);
  if (label_col != table.header.size()) {
    std::vector<std::string> labels;
    labels.reserve(table.rows.size());
    for (const auto& row : table.rows) labels.push_back(row[label_col]);
    out.labels = std::move(labels);
  }
  return out;
}

std::string to_hex_float(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::hex);
  return std::string(buf, ptr);
}

double from_hex_float(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::hex);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "invalid hex float '" + text + "'");
  }
  return value;
}

namespace {

json encode(const MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(to_hex_float(m(i, j)));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

json encode(const VectorXd& v) { return encode(MatrixXd(v)); }

MatrixXd decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorCode::ParseError, "matrix entry count does not match its shape");
  }
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = from_hex_float(data[k++].get<std::string>());
  }
  return m;
}

VectorXd decode_vector(const json& j) {
  const MatrixXd m = decode_matrix(j);
  if (m.cols() != 1) throw Error(ErrorCode::ParseError, "expected a column vector");
  return m.col(0);
}

json encode_penalty(const PenaltyConfig& penalty) {
  return json{{"kind", penalty_name(kind_of(penalty))},
              {"lambda", to_hex_float(lambda_of(penalty))},
              {"alpha", to_hex_float(alpha_of(penalty))}};
}

PenaltyConfig decode_penalty(const json& j) {
  const auto kind = parse_penalty_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::ParseError, "unknown penalty kind");
  return make_penalty(*kind, from_hex_float(j.at("lambda").get<std::string>()),
                      from_hex_float(j.at("alpha").get<std::string>()));
}

json encode_common(const ClassStats& stats, const FeatureTransform& t,
                   const PenaltyConfig& penalty, double objective, bool converged,
                   std::optional<int> selected_rank) {
  json counts = json::array();
  for (auto c : stats.counts) counts.push_back(c);
  return json{{"M_hat", encode(stats.M_hat)},
              {"pi_hat", encode(stats.pi_hat)},
              {"counts", counts},
              {"feature_mean", encode(t.mean)},
              {"feature_scale", encode(t.scale)},
              {"penalty", encode_penalty(penalty)},
              {"objective", to_hex_float(objective)},
              {"converged", converged},
              {"selected_rank", selected_rank ? json(*selected_rank) : json(nullptr)}};
}

template <class Model>
void decode_common(const json& j, Model& m) {
  m.stats.M_hat = decode_matrix(j.at("M_hat"));
  m.stats.pi_hat = decode_vector(j.at("pi_hat"));
  m.stats.counts = j.at("counts").get<std::vector<Eigen::Index>>();
  m.transform.mean = decode_vector(j.at("feature_mean"));
  m.transform.scale = decode_vector(j.at("feature_scale"));
  m.penalty = decode_penalty(j.at("penalty"));
  m.objective = from_hex_float(j.at("objective").get<std::string>());
  m.converged = j.at("converged").get<bool>();
  if (!j.at("selected_rank").is_null()) m.selected_rank = j.at("selected_rank").get<int>();
}

}  // namespace

std::string serialize_model(const ModelFile& file) {
  json doc;
  doc["format_version"] = file.format_version;
  doc["class_names"] = file.meta.class_names;
  doc["feature_names"] = file.meta.feature_names;
  doc["label_column"] = file.meta.label_column;
  doc["seed"] = file.meta.seed;
  doc["config"] = file.meta.config;
  if (const auto* m = std::get_if<LdrrModel>(&file.model)) {
    doc["kind"] = "ldrr";
    json body = encode_common(m->stats, m->transform, m->penalty, m->objective, m->converged,
                              m->selected_rank);
    body["B_hat"] = encode(m->B_hat);
    body["H_hat"] = encode(m->H_hat);
    body["B_star_hat"] = encode(m->B_star_hat);
    body["h_min_singular"] = to_hex_float(m->h_min_singular);
    body["h_max_singular"] = to_hex_float(m->h_max_singular);
    body["h_near_singular"] = m->h_near_singular;
    doc["model"] = std::move(body);
  } else {
    const auto& f = std::get<LdrrFModel>(file.model);
    doc["kind"] = "ldrr_f";
    json body = encode_common(f.stats, f.transform, f.penalty, f.objective, f.converged,
                              f.selected_rank);
    body["B_hat"] = encode(f.B_hat);
    body["C_b"] = encode(f.C_b);
    body["C_w"] = encode(f.C_w);
    body["directions"] = encode(f.directions);
    body["eigenvalues"] = encode(f.eigenvalues);
    body["K"] = f.K;
    doc["model"] = std::move(body);
  }
  return doc.dump(2) + "\n";
}

ModelFile parse_model(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ModelFile file;
    file.format_version = doc.at("format_version").get<int>();
    if (file.format_version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch,
                  "model file has format_version " + std::to_string(file.format_version) +
                      ", this build reads version " + std::to_string(kModelFormatVersion));
    }
    file.meta.class_names = doc.at("class_names").get<std::vector<std::string>>();
    file.meta.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    file.meta.label_column = doc.at("label_column").get<std::string>();
    file.meta.seed = doc.at("seed").get<std::uint64_t>();
    file.meta.config = doc.at("config").get<std::string>();
    const std::string kind = doc.at("kind").get<std::string>();
    const json& body = doc.at("model");
    if (kind == "ldrr") {
      LdrrModel m;
      decode_common(body, m);
      m.B_hat = decode_matrix(body.at("B_hat"));
      m.H_hat = decode_matrix(body.at("H_hat"));
      m.B_star_hat = decode_matrix(body.at("B_star_hat"));
      m.h_min_singular = from_hex_float(body.at("h_min_singular").get<std::string>());
      m.h_max_singular = from_hex_float(body.at("h_max_singular").get<std::string>());
      m.h_near_singular = body.at("h_near_singular").get<bool>();
      file.model = std::move(m);
    } else if (kind == "ldrr_f") {
      LdrrFModel f;
      decode_common(body, f);
      f.B_hat = decode_matrix(body.at("B_hat"));
      f.C_b = decode_matrix(body.at("C_b"));
      f.C_w = decode_matrix(body.at("C_w"));
      f.directions = decode_matrix(body.at("directions"));
      f.eigenvalues = decode_vector(body.at("eigenvalues"));
      f.K = body.at("K").get<int>();
      file.model = std::move(f);
    } else {
      throw Error(ErrorCode::ParseError, "unknown model kind '" + kind + "'");
    }
    const Eigen::Index p = model_dim(file.model);
    if (static_cast<Eigen::Index>(file.meta.feature_names.size()) != p) {
      throw Error(ErrorCode::ParseError, "feature name count does not match model dimension");
    }
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << serialize_model(file);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::vector<int> predict_any(const FittedModel& model, const MatrixXd& X) {
  if (const auto* m = std::get_if<LdrrModel>(&model)) return predict(*m, X);
  return predict_f(std::get<LdrrFModel>(model), X);
}

Eigen::Index model_dim(const FittedModel& model) {
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

}  // namespace ldrr
