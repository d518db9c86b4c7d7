#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldrr/ldrr.hpp"

namespace ldrr {

// Header row, one label column (class names indexed in order of first
// appearance), every other column numeric.
struct CsvDataset {
  LabeledDataset data;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
};

CsvDataset load_csv_dataset(const std::string& path, const std::string& label_column = "label");

// Feature columns picked by name, in the given order. The label column is
// optional here; when present its raw values are returned.
struct FeatureTable {
  MatrixXd X;
  std::optional<std::vector<std::string>> labels;
};

FeatureTable load_csv_features(const std::string& path,
                               const std::vector<std::string>& feature_names,
                               const std::string& label_column = "label");

inline constexpr int kModelFormatVersion = 1;

using FittedModel = std::variant<LdrrModel, LdrrFModel>;

struct ModelMeta {
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::string label_column = "label";
  std::uint64_t seed = 0;
  std::string config;
};

struct ModelFile {
  int format_version = kModelFormatVersion;
  FittedModel model;
  ModelMeta meta;
};

// JSON document with every floating-point value stored as a hexadecimal
// float string, so a save/load round trip is exact.
std::string serialize_model(const ModelFile& file);
ModelFile parse_model(const std::string& text);

void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

std::string to_hex_float(double value);
double from_hex_float(const std::string& text);

std::vector<int> predict_any(const FittedModel& model, const MatrixXd& X);
Eigen::Index model_dim(const FittedModel& model);

}  // namespace ldrr
