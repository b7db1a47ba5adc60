/*
 * Copyright 2026 The robustpu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dataset ingestion and PU split construction.
//
// Raw files are comma-separated with a header row, or MNIST-style IDX
// (optionally gzip-compressed). A JSON schema names the label column, the
// categorical columns (one-hot encoded) and which classes form the positive
// group. Numeric columns are z-scored (or only centered) with statistics of
// the training pool (positives + unlabeled) of each split; validation and
// test rows reuse them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "robustpu/numcore.hpp"

namespace robustpu {

/// How numeric columns are transformed with training-pool statistics.
enum class FeatureScaling {
  kStandardize,  // (x - mean) / std
  kCenter,       // x - mean
  kNone,
};

FeatureScaling parse_feature_scaling(std::string_view name);
std::string_view to_string(FeatureScaling scaling);

struct DatasetSchema {
  std::string name;
  std::string format = "csv";  // "csv" or "idx"
  std::string label_column;
  std::vector<std::string> categorical_columns;
  /// Optional fixed vocabularies; values outside them are ingestion errors.
  std::map<std::string, std::vector<std::string>> category_values;
  std::vector<std::string> drop_columns;
  std::vector<std::string> positive_classes;
  /// Optional; when non-empty every class must belong to exactly one group.
  std::vector<std::string> negative_classes;
  FeatureScaling scaling = FeatureScaling::kStandardize;
  /// IDX only: file pairs relative to the dataset directory; rows concatenate in order.
  std::vector<std::string> idx_images;
  std::vector<std::string> idx_labels;
  double pixel_scale = 255.0;
};

DatasetSchema load_schema(const std::filesystem::path& path);
DatasetSchema parse_schema(const std::string& json_text);

/// Features with their original (possibly multi-class) labels.
struct MulticlassDataset {
  std::string name;
  DenseMatrix features;
  std::vector<std::string> classes;  // one per row
  std::vector<std::string> feature_names;
  std::vector<bool> numeric_columns;  // false for one-hot indicator columns
  FeatureScaling scaling = FeatureScaling::kStandardize;
};

struct RawDataset {
  std::string name;
  DenseMatrix features;
  BinaryLabels labels;  // 1 = positive class group
  std::vector<std::string> feature_names;
  std::vector<bool> numeric_columns;
  FeatureScaling scaling = FeatureScaling::kStandardize;

  Index size() const { return features.rows(); }
  Index count_positive() const;
};

/// Parse a raw file per schema; categorical columns are one-hot encoded in
/// vocabulary order (declared order, else sorted). For IDX, `path` is the
/// directory holding the files. Throws IngestionError naming row/column.
MulticlassDataset load_multiclass(const std::filesystem::path& path, const DatasetSchema& schema);

/// label = 1 iff class is in `positive`. When `negative` is non-empty, a
/// class in neither group (or both) is a ConfigError.
RawDataset binarize(const MulticlassDataset& raw, const std::vector<std::string>& positive,
                    const std::vector<std::string>& negative = {});

/// load_multiclass followed by binarize with the schema's class groups.
RawDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);

/// FNV-1a 64-bit digest of the raw data file(s) referenced by a schema.
std::string dataset_checksum(const std::filesystem::path& path, const DatasetSchema& schema);

/// Column-wise affine transform fitted on a training pool.
struct Standardizer {
  Vector mean;   // 0 for non-numeric columns
  Vector scale;  // 1 for zero-variance or non-numeric columns, and when centering only

  static Standardizer fit(const DenseMatrix& pool, const std::vector<bool>& numeric_columns,
                          FeatureScaling scaling = FeatureScaling::kStandardize);
  void apply(DenseMatrix& m) const;
};

struct SplitSpec {
  Index n_p = 400;
  Index n_u = 800;
  double pi = 0.2;
  Index n_val = 100;
  Index n_test = 1000;
  std::uint64_t seed = 0;

  bool operator==(const SplitSpec&) const = default;
};

/// round(n * pi), halves rounded up.
Index hidden_positive_count(Index n, double pi);

/// Raw-row indices of each part.
struct SplitIndices {
  std::vector<Index> positive;
  std::vector<Index> unlabeled;
  std::vector<Index> val;
  std::vector<Index> test;

  bool operator==(const SplitIndices&) const = default;
};

/// Everything a training method may see: no labels for the unlabeled set.
struct TrainingView {
  DenseMatrix x_p;
  DenseMatrix x_u;
  DenseMatrix val_features;
  BinaryLabels val_labels;

  Index input_dim() const { return x_p.cols(); }
};

struct PUSplit {
  SplitSpec spec;
  SplitIndices indices;
  DenseMatrix x_p;
  DenseMatrix x_u;
  BinaryLabels u_oracle_labels;  // diagnostics only
  DenseMatrix val_features;
  BinaryLabels val_labels;
  DenseMatrix test_features;
  BinaryLabels test_labels;

  TrainingView training_view() const;
  bool operator==(const PUSplit& other) const;
};

/// Sample index sets only (deterministic in spec.seed). Throws SizingError
/// when a class pool is too small.
SplitIndices sample_split_indices(const BinaryLabels& labels, const SplitSpec& spec);

/// Gather rows for given indices and standardize with training-pool statistics.
PUSplit materialize_split(const RawDataset& raw, const SplitSpec& spec, SplitIndices indices);

PUSplit make_pu_split(const RawDataset& raw, const SplitSpec& spec);

/// Location of the raw data a split was drawn from.
struct DatasetSource {
  std::filesystem::path data_path;
  std::filesystem::path schema_path;
};

/// JSON manifest: spec, the four index lists and the raw-data checksum.
/// Paths are stored relative to the manifest's directory.
void save_split(const PUSplit& split, const DatasetSource& source,
                const std::filesystem::path& manifest_path);

struct LoadedSplit {
  PUSplit split;
  DatasetSource source;
};

/// Re-materializes the split from the referenced raw data. Throws
/// IntegrityError on a missing raw file or checksum mismatch.
LoadedSplit load_split(const std::filesystem::path& manifest_path);

}  // namespace robustpu
