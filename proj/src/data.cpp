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

#include "robustpu/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robustpu/errors.hpp"
#include "robustpu/rng.hpp"

namespace robustpu {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

FeatureScaling parse_feature_scaling(std::string_view name) {
  if (name == "standardize") return FeatureScaling::kStandardize;
  if (name == "center") return FeatureScaling::kCenter;
  if (name == "none") return FeatureScaling::kNone;
  throw ConfigError("unknown feature scaling '" + std::string(name) + "'");
}

std::string_view to_string(FeatureScaling scaling) {
  switch (scaling) {
    case FeatureScaling::kStandardize: return "standardize";
    case FeatureScaling::kCenter: return "center";
    case FeatureScaling::kNone: return "none";
  }
  return "unknown";
}

DatasetSchema parse_schema(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
  }
  DatasetSchema s;
  try {
    s.name = j.value("name", std::string{});
    s.format = j.value("format", std::string{"csv"});
    s.label_column = j.value("label_column", std::string{});
    s.categorical_columns = j.value("categorical_columns", std::vector<std::string>{});
    s.drop_columns = j.value("drop_columns", std::vector<std::string>{});
    s.positive_classes = j.at("positive_classes").get<std::vector<std::string>>();
    s.negative_classes = j.value("negative_classes", std::vector<std::string>{});
    s.scaling = parse_feature_scaling(j.value("scaling", std::string{"standardize"}));
    s.idx_images = j.value("idx_images", std::vector<std::string>{});
    s.idx_labels = j.value("idx_labels", std::vector<std::string>{});
    s.pixel_scale = j.value("pixel_scale", 255.0);
    if (j.contains("category_values")) {
      s.category_values =
          j.at("category_values").get<std::map<std::string, std::vector<std::string>>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  if (s.format != "csv" && s.format != "idx") {
    throw ConfigError("schema: format must be 'csv' or 'idx', got '" + s.format + "'");
  }
  if (s.format == "csv" && s.label_column.empty()) {
    throw ConfigError("schema: label_column is required for csv datasets");
  }
  if (s.format == "idx" && (s.idx_images.empty() || s.idx_images.size() != s.idx_labels.size())) {
    throw ConfigError("schema: idx datasets need matching idx_images/idx_labels lists");
  }
  if (s.positive_classes.empty()) throw ConfigError("schema: positive_classes must not be empty");
  return s;
}

DatasetSchema load_schema(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Comma-separated fields; a quoted field may contain commas and doubled quotes.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  auto finish = [&] {
    out.push_back(was_quoted ? cur : trim(cur));
    cur.clear();
    was_quoted = false;
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        cur.push_back(c);
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      finish();
    } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
      cur.push_back(c);
    }
  }
  finish();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

MulticlassDataset load_csv(const fs::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open dataset file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path.string() + ": empty file (no header)");
  const std::vector<std::string> header = split_fields(line);

  const auto find_col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : std::distance(header.begin(), it);
  };
  const std::ptrdiff_t label_idx = find_col(schema.label_column);
  if (label_idx < 0) {
    throw IngestionError(path.string() + ": label column '" + schema.label_column + "' not in header");
  }
  std::set<std::string> categorical(schema.categorical_columns.begin(),
                                    schema.categorical_columns.end());
  std::set<std::string> dropped(schema.drop_columns.begin(), schema.drop_columns.end());
  for (const auto& c : categorical) {
    if (find_col(c) < 0) throw IngestionError(path.string() + ": categorical column '" + c + "' not in header");
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ": row " << line_no << ": expected " << header.size()
         << " fields, got " << fields.size();
      throw IngestionError(os.str());
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw IngestionError(path.string() + ": no data rows");

  struct ColumnPlan {
    std::size_t source;
    bool categorical;
    std::vector<std::string> vocab;
  };
  std::vector<ColumnPlan> plan;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == label_idx || dropped.count(header[c])) continue;
    ColumnPlan p{c, categorical.count(header[c]) > 0, {}};
    if (p.categorical) {
      auto declared = schema.category_values.find(header[c]);
      if (declared != schema.category_values.end()) {
        p.vocab = declared->second;
      } else {
        std::set<std::string> seen;
        for (const auto& r : rows) seen.insert(r[c]);
        p.vocab.assign(seen.begin(), seen.end());
      }
    }
    plan.push_back(std::move(p));
  }

  MulticlassDataset out;
  out.name = schema.name;
  for (const auto& p : plan) {
    if (p.categorical) {
      for (const auto& v : p.vocab) {
        out.feature_names.push_back(header[p.source] + "=" + v);
        out.numeric_columns.push_back(false);
      }
    } else {
      out.feature_names.push_back(header[p.source]);
      out.numeric_columns.push_back(true);
    }
  }
  const auto n = static_cast<Index>(rows.size());
  out.features = DenseMatrix::Zero(n, static_cast<Index>(out.feature_names.size()));
  out.classes.reserve(rows.size());

  for (Index r = 0; r < n; ++r) {
    const auto& fields = rows[static_cast<std::size_t>(r)];
    const std::size_t line_of_row = static_cast<std::size_t>(r) + 2;
    Index col = 0;
    for (const auto& p : plan) {
      const std::string& value = fields[p.source];
      if (p.categorical) {
        auto it = std::find(p.vocab.begin(), p.vocab.end(), value);
        if (it == p.vocab.end()) {
          std::ostringstream os;
          os << path.string() << ": row " << line_of_row << " column '" << header[p.source]
             << "': unknown category '" << value << "'";
          throw IngestionError(os.str());
        }
        out.features(r, col + std::distance(p.vocab.begin(), it)) = 1.0;
        col += static_cast<Index>(p.vocab.size());
      } else {
        double v = 0.0;
        if (!parse_double(value, v)) {
          std::ostringstream os;
          os << path.string() << ": row " << line_of_row << " column '" << header[p.source]
             << "': not a finite number: '" << value << "'";
          throw IngestionError(os.str());
        }
        out.features(r, col++) = v;
      }
    }
    out.classes.push_back(fields[static_cast<std::size_t>(label_idx)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// IDX (MNIST layout), gzip or plain; zlib reads both transparently.
// ---------------------------------------------------------------------------

class GzFile {
 public:
  explicit GzFile(const fs::path& path) : path_(path), handle_(gzopen(path.c_str(), "rb")) {
    if (!handle_) throw IngestionError("cannot open " + path.string());
  }
  ~GzFile() { gzclose(handle_); }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read(void* dst, std::size_t n) {
    auto* p = static_cast<unsigned char*>(dst);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(handle_, p, chunk);
      if (got <= 0) throw IngestionError(path_.string() + ": truncated IDX file");
      p += got;
      n -= static_cast<std::size_t>(got);
    }
  }

  std::uint32_t read_be32() {
    unsigned char b[4];
    read(b, 4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
  }

 private:
  fs::path path_;
  gzFile handle_;
};

MulticlassDataset load_idx(const fs::path& dir, const DatasetSchema& schema) {
  std::vector<std::vector<unsigned char>> image_blocks;
  std::vector<std::vector<unsigned char>> label_blocks;
  std::size_t total = 0;
  std::size_t width = 0;
  for (std::size_t k = 0; k < schema.idx_images.size(); ++k) {
    GzFile images(dir / schema.idx_images[k]);
    if (images.read_be32() != 0x00000803u) {
      throw IngestionError((dir / schema.idx_images[k]).string() + ": bad IDX image magic");
    }
    const std::size_t n = images.read_be32();
    const std::size_t rows = images.read_be32();
    const std::size_t cols = images.read_be32();
    if (width != 0 && rows * cols != width) {
      throw IngestionError((dir / schema.idx_images[k]).string() + ": image size differs from earlier files");
    }
    width = rows * cols;
    std::vector<unsigned char> pix(n * width);
    images.read(pix.data(), pix.size());

    GzFile labels(dir / schema.idx_labels[k]);
    if (labels.read_be32() != 0x00000801u) {
      throw IngestionError((dir / schema.idx_labels[k]).string() + ": bad IDX label magic");
    }
    if (labels.read_be32() != n) {
      throw IngestionError((dir / schema.idx_labels[k]).string() + ": label count != image count");
    }
    std::vector<unsigned char> lab(n);
    labels.read(lab.data(), lab.size());
    image_blocks.push_back(std::move(pix));
    label_blocks.push_back(std::move(lab));
    total += n;
  }

  MulticlassDataset out;
  out.name = schema.name;
  out.features.resize(static_cast<Index>(total), static_cast<Index>(width));
  out.classes.reserve(total);
  const double inv_scale = 1.0 / schema.pixel_scale;
  Index row = 0;
  for (std::size_t k = 0; k < image_blocks.size(); ++k) {
    const auto& pix = image_blocks[k];
    for (std::size_t i = 0; i < label_blocks[k].size(); ++i, ++row) {
      for (std::size_t c = 0; c < width; ++c) {
        out.features(row, static_cast<Index>(c)) = pix[i * width + c] * inv_scale;
      }
      out.classes.push_back(std::to_string(label_blocks[k][i]));
    }
  }
  for (std::size_t c = 0; c < width; ++c) {
    out.feature_names.push_back("px" + std::to_string(c));
    out.numeric_columns.push_back(true);
  }
  return out;
}

std::uint64_t fnv1a_update(std::uint64_t h, const char* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(std::uint64_t h, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("raw data file missing: " + path.string());
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a_update(h, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h;
}

}  // namespace

MulticlassDataset load_multiclass(const fs::path& path, const DatasetSchema& schema) {
  MulticlassDataset out = schema.format == "idx" ? load_idx(path, schema) : load_csv(path, schema);
  out.scaling = schema.scaling;
  if (!out.features.allFinite()) throw IngestionError(path.string() + ": non-finite feature value");
  return out;
}

Index RawDataset::count_positive() const {
  return static_cast<Index>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

RawDataset binarize(const MulticlassDataset& raw, const std::vector<std::string>& positive,
                    const std::vector<std::string>& negative) {
  const std::set<std::string> pos(positive.begin(), positive.end());
  const std::set<std::string> neg(negative.begin(), negative.end());
  for (const auto& c : pos) {
    if (neg.count(c)) throw ConfigError("binarize: class '" + c + "' is in both groups");
  }
  RawDataset out;
  out.name = raw.name;
  out.features = raw.features;
  out.feature_names = raw.feature_names;
  out.numeric_columns = raw.numeric_columns;
  out.scaling = raw.scaling;
  out.labels.reserve(raw.classes.size());
  for (std::size_t i = 0; i < raw.classes.size(); ++i) {
    const auto& c = raw.classes[i];
    const bool is_pos = pos.count(c) > 0;
    if (!is_pos && !neg.empty() && !neg.count(c)) {
      std::ostringstream os;
      os << "binarize: class '" << c << "' (row " << i << ") is in neither the positive nor the negative group";
      throw ConfigError(os.str());
    }
    out.labels.push_back(is_pos ? 1 : 0);
  }
  return out;
}

RawDataset load_dataset(const fs::path& path, const DatasetSchema& schema) {
  return binarize(load_multiclass(path, schema), schema.positive_classes, schema.negative_classes);
}

std::string dataset_checksum(const fs::path& path, const DatasetSchema& schema) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  if (schema.format == "idx") {
    for (std::size_t k = 0; k < schema.idx_images.size(); ++k) {
      h = fnv1a_file(h, path / schema.idx_images[k]);
      h = fnv1a_file(h, path / schema.idx_labels[k]);
    }
  } else {
    h = fnv1a_file(h, path);
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const DenseMatrix& pool, const std::vector<bool>& numeric_columns,
                               FeatureScaling scaling) {
  Standardizer s;
  const Index d = pool.cols();
  s.mean = Vector::Zero(d);
  s.scale = Vector::Ones(d);
  if (pool.rows() == 0 || scaling == FeatureScaling::kNone) return s;
  const double n = static_cast<double>(pool.rows());
  for (Index c = 0; c < d; ++c) {
    if (!numeric_columns[static_cast<std::size_t>(c)]) continue;
    const double mu = pool.col(c).sum() / n;
    const double var = (pool.col(c).array() - mu).square().sum() / n;
    s.mean(c) = mu;
    if (scaling == FeatureScaling::kStandardize && var > 0.0) s.scale(c) = std::sqrt(var);
  }
  return s;
}

void Standardizer::apply(DenseMatrix& m) const {
  for (Index c = 0; c < m.cols(); ++c) {
    if (mean(c) == 0.0 && scale(c) == 1.0) continue;
    m.col(c) = (m.col(c).array() - mean(c)) / scale(c);
  }
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

Index hidden_positive_count(Index n, double pi) {
  return static_cast<Index>(std::floor(static_cast<double>(n) * pi + 0.5));
}

TrainingView PUSplit::training_view() const {
  return TrainingView{x_p, x_u, val_features, val_labels};
}

bool PUSplit::operator==(const PUSplit& o) const {
  return spec == o.spec && indices == o.indices && x_p == o.x_p && x_u == o.x_u &&
         u_oracle_labels == o.u_oracle_labels && val_features == o.val_features &&
         val_labels == o.val_labels && test_features == o.test_features &&
         test_labels == o.test_labels;
}

SplitIndices sample_split_indices(const BinaryLabels& labels, const SplitSpec& spec) {
  if (!(spec.pi >= 0.0 && spec.pi <= 1.0)) throw ConfigError("split: pi must lie in [0, 1]");
  if (spec.n_p < 0 || spec.n_u < 0 || spec.n_val < 0 || spec.n_test < 0) {
    throw ConfigError("split: sizes must be non-negative");
  }
  std::vector<Index> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(static_cast<Index>(i));

  Rng rng(derive_seed(spec.seed, {0x53504c4954ULL}));
  rng.shuffle(std::span<Index>(pos));
  rng.shuffle(std::span<Index>(neg));

  const Index k_u = hidden_positive_count(spec.n_u, spec.pi);
  const Index k_val = hidden_positive_count(spec.n_val, spec.pi);
  const Index k_test = hidden_positive_count(spec.n_test, spec.pi);
  const Index need_pos = spec.n_p + k_u + k_val + k_test;
  const Index need_neg = (spec.n_u - k_u) + (spec.n_val - k_val) + (spec.n_test - k_test);
  const auto have_pos = static_cast<Index>(pos.size());
  const auto have_neg = static_cast<Index>(neg.size());
  if (need_pos > have_pos || need_neg > have_neg) {
    std::ostringstream os;
    os << "split: insufficient samples:";
    if (need_pos > have_pos) {
      os << " positive pool has " << have_pos << ", need " << need_pos << " (short by "
         << need_pos - have_pos << ")";
    }
    if (need_neg > have_neg) {
      os << " negative pool has " << have_neg << ", need " << need_neg << " (short by "
         << need_neg - have_neg << ")";
    }
    throw SizingError(os.str());
  }

  auto pos_it = pos.begin();
  auto neg_it = neg.begin();
  auto take_mixed = [&](Index n_total, Index n_pos) {
    std::vector<Index> part(pos_it, pos_it + n_pos);
    part.insert(part.end(), neg_it, neg_it + (n_total - n_pos));
    pos_it += n_pos;
    neg_it += n_total - n_pos;
    rng.shuffle(std::span<Index>(part));
    return part;
  };

  SplitIndices out;
  out.positive.assign(pos_it, pos_it + spec.n_p);
  pos_it += spec.n_p;
  out.unlabeled = take_mixed(spec.n_u, k_u);
  out.val = take_mixed(spec.n_val, k_val);
  out.test = take_mixed(spec.n_test, k_test);
  return out;
}

PUSplit materialize_split(const RawDataset& raw, const SplitSpec& spec, SplitIndices indices) {
  const Index n = raw.size();
  for (const auto* part : {&indices.positive, &indices.unlabeled, &indices.val, &indices.test}) {
    for (Index i : *part) {
      if (i < 0 || i >= n) throw IntegrityError("split index out of range for raw dataset");
    }
  }
  auto labels_of = [&](const std::vector<Index>& idx) {
    BinaryLabels out;
    out.reserve(idx.size());
    for (Index i : idx) out.push_back(raw.labels[static_cast<std::size_t>(i)]);
    return out;
  };

  PUSplit s;
  s.spec = spec;
  s.x_p = gather_rows(raw.features, indices.positive);
  s.x_u = gather_rows(raw.features, indices.unlabeled);
  s.u_oracle_labels = labels_of(indices.unlabeled);
  s.val_features = gather_rows(raw.features, indices.val);
  s.val_labels = labels_of(indices.val);
  s.test_features = gather_rows(raw.features, indices.test);
  s.test_labels = labels_of(indices.test);

  DenseMatrix pool(s.x_p.rows() + s.x_u.rows(), raw.features.cols());
  pool << s.x_p, s.x_u;
  const Standardizer st = Standardizer::fit(pool, raw.numeric_columns, raw.scaling);
  st.apply(s.x_p);
  st.apply(s.x_u);
  st.apply(s.val_features);
  st.apply(s.test_features);
  s.indices = std::move(indices);
  return s;
}

PUSplit make_pu_split(const RawDataset& raw, const SplitSpec& spec) {
  return materialize_split(raw, spec, sample_split_indices(raw.labels, spec));
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

namespace {

fs::path relative_to(const fs::path& target, const fs::path& base_dir) {
  std::error_code ec;
  auto rel = fs::relative(fs::absolute(target), fs::absolute(base_dir), ec);
  return ec || rel.empty() ? fs::absolute(target) : rel;
}

fs::path resolve(const fs::path& stored, const fs::path& base_dir) {
  return stored.is_absolute() ? stored : base_dir / stored;
}

}  // namespace

void save_split(const PUSplit& split, const DatasetSource& source, const fs::path& manifest_path) {
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  const DatasetSchema schema = load_schema(source.schema_path);
  json j;
  j["format"] = "robustpu-split";
  j["version"] = 1;
  j["dataset"] = {{"data", relative_to(source.data_path, base).generic_string()},
                  {"schema", relative_to(source.schema_path, base).generic_string()},
                  {"checksum", dataset_checksum(source.data_path, schema)}};
  j["spec"] = {{"n_p", split.spec.n_p},   {"n_u", split.spec.n_u},
               {"pi", split.spec.pi},     {"n_val", split.spec.n_val},
               {"n_test", split.spec.n_test}, {"seed", split.spec.seed}};
  j["indices"] = {{"positive", split.indices.positive},
                  {"unlabeled", split.indices.unlabeled},
                  {"val", split.indices.val},
                  {"test", split.indices.test}};
  std::ofstream out(manifest_path);
  if (!out) throw UsageError("cannot write manifest " + manifest_path.string());
  out << j.dump(1) << "\n";
}

LoadedSplit load_split(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IntegrityError("cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("manifest: invalid JSON: ") + e.what());
  }
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  LoadedSplit out;
  SplitSpec spec;
  SplitIndices idx;
  std::string checksum;
  try {
    if (j.at("format").get<std::string>() != "robustpu-split") throw IntegrityError("manifest: wrong format tag");
    out.source.data_path = resolve(j.at("dataset").at("data").get<std::string>(), base);
    out.source.schema_path = resolve(j.at("dataset").at("schema").get<std::string>(), base);
    checksum = j.at("dataset").at("checksum").get<std::string>();
    const auto& js = j.at("spec");
    spec.n_p = js.at("n_p").get<Index>();
    spec.n_u = js.at("n_u").get<Index>();
    spec.pi = js.at("pi").get<double>();
    spec.n_val = js.at("n_val").get<Index>();
    spec.n_test = js.at("n_test").get<Index>();
    spec.seed = js.at("seed").get<std::uint64_t>();
    const auto& ji = j.at("indices");
    idx.positive = ji.at("positive").get<std::vector<Index>>();
    idx.unlabeled = ji.at("unlabeled").get<std::vector<Index>>();
    idx.val = ji.at("val").get<std::vector<Index>>();
    idx.test = ji.at("test").get<std::vector<Index>>();
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("manifest: ") + e.what());
  }

  if (!fs::exists(out.source.schema_path)) {
    throw IntegrityError("manifest references missing schema " + out.source.schema_path.string());
  }
  const DatasetSchema schema = load_schema(out.source.schema_path);
  if (!fs::exists(out.source.data_path)) {
    throw IntegrityError("manifest references missing raw data " + out.source.data_path.string());
  }
  const std::string actual = dataset_checksum(out.source.data_path, schema);
  if (actual != checksum) {
    throw IntegrityError("checksum mismatch for " + out.source.data_path.string() + ": manifest has " +
                         checksum + ", file has " + actual);
  }
  const RawDataset raw = load_dataset(out.source.data_path, schema);
  out.split = materialize_split(raw, spec, std::move(idx));
  return out;
}

}  // namespace robustpu
