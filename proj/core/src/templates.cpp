// SPDX-License-Identifier: Apache-2.0
#include "rehab/store/templates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rehab/error.hpp"

namespace rehab::store {

using emg::FeatureVector;
using emg::GestureLabel;
using nlohmann::json;

bool TemplateDatabase::session_ready() const {
  if (!templates.contains(GestureLabel::Rest)) return false;
  return std::any_of(templates.begin(), templates.end(),
                     [](const auto& kv) { return emg::is_active_gesture(kv.first); });
}

CalibrationBuffers::CalibrationBuffers(emg::FeatureConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::size_t CalibrationBuffers::count(GestureLabel label) const {
  auto it = buffers_.find(label);
  return it == buffers_.end() ? 0 : it->second.size();
}

void CalibrationBuffers::record(GestureLabel label, std::span<const emg::EmgWindow> windows) {
  if (label == GestureLabel::Unknown) throw Error(ErrorCode::BadLabel, "cannot calibrate Unknown");
  if (windows.empty()) return;
  std::vector<FeatureVector> staged;
  staged.reserve(windows.size());
  for (const auto& w : windows) {
    emg::require_conforms(w, config_);
    staged.push_back(emg::featurize(w, config_));
  }
  auto& buf = buffers_[label];
  buf.insert(buf.end(), std::make_move_iterator(staged.begin()),
             std::make_move_iterator(staged.end()));
}

void CalibrationBuffers::record_vector(GestureLabel label, FeatureVector fv) {
  if (label == GestureLabel::Unknown) throw Error(ErrorCode::BadLabel, "cannot calibrate Unknown");
  if (fv.feature_config_id != config_.id() || fv.values.size() != config_.dimension()) {
    throw Error(ErrorCode::ConfigMismatch, "vector does not match calibration config");
  }
  buffers_[label].push_back(std::move(fv));
}

void CalibrationBuffers::clear(GestureLabel label) { buffers_.erase(label); }

void calibration_record(CalibrationBuffers& buffers, GestureLabel label,
                        std::span<const emg::EmgWindow> windows) {
  buffers.record(label, windows);
}

GestureTemplate build_template(GestureLabel label, std::span<const FeatureVector> vectors,
                               const emg::FeatureConfig& config) {
  if (label == GestureLabel::Unknown) throw Error(ErrorCode::BadLabel, "cannot template Unknown");
  if (vectors.empty()) {
    throw Error(ErrorCode::InsufficientCalibration, std::string(emg::to_string(label)));
  }
  const std::size_t dim = config.dimension();
  const double n = static_cast<double>(vectors.size());

  // Sums in a fixed dimension-wise order are not permutation invariant in floating point,
  // so accumulate over a sorted copy of each column.
  std::vector<double> mean(dim, 0.0);
  std::vector<double> sigma(dim, 0.0);
  std::vector<double> column(vectors.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (vectors[i].values.size() != dim) {
        throw Error(ErrorCode::ConfigMismatch, "vector dimension mismatch");
      }
      column[i] = vectors[i].values[j];
    }
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    mean[j] = sum / n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean[j]) * (v - mean[j]);
    sigma[j] = std::max(std::sqrt(ss / n), kSigmaFloor);
  }

  GestureTemplate t;
  t.label = label;
  t.centroid = FeatureVector{std::move(mean), config.id()};
  t.sigma = std::move(sigma);
  t.sample_count = static_cast<int>(vectors.size());
  return t;
}

TemplateDatabase calibration_finalize(const CalibrationBuffers& buffers, int min_windows) {
  TemplateDatabase db;
  db.feature_config = buffers.config();
  for (const auto& [label, vectors] : buffers.buffers()) {
    if (static_cast<int>(vectors.size()) < min_windows || vectors.empty()) {
      throw Error(ErrorCode::InsufficientCalibration,
                  std::string(emg::to_string(label)) + " has " + std::to_string(vectors.size()) +
                      " windows, need " + std::to_string(min_windows));
    }
    db.templates.emplace(label, build_template(label, vectors, buffers.config()));
  }
  return db;
}

json feature_config_to_json(const emg::FeatureConfig& config) {
  json features = json::array();
  for (auto f : config.features) features.push_back(emg::to_string(f));
  return json{{"sample_rate_hz", config.sample_rate_hz},
              {"window_ms", config.window_ms},
              {"step_ms", config.step_ms},
              {"features", features},
              {"zc_deadband", config.zc_deadband}};
}

emg::FeatureConfig feature_config_from_json(const json& j) {
  emg::FeatureConfig c;
  c.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  c.window_ms = j.at("window_ms").get<int>();
  c.step_ms = j.at("step_ms").get<int>();
  c.zc_deadband = j.at("zc_deadband").get<double>();
  c.features.clear();
  for (const auto& f : j.at("features")) {
    auto parsed = emg::parse_feature(f.get<std::string>());
    if (!parsed) throw Error(ErrorCode::CorruptDatabase, "unknown feature " + f.dump());
    c.features.push_back(*parsed);
  }
  return c;
}

json db_to_json(const TemplateDatabase& db) {
  json templates = json::object();
  for (const auto& [label, t] : db.templates) {
    templates[std::string(emg::to_string(label))] = json{
        {"centroid", t.centroid.values}, {"sigma", t.sigma}, {"sample_count", t.sample_count}};
  }
  return json{{"schema_version", db.schema_version},
              {"feature_config", feature_config_to_json(db.feature_config)},
              {"templates", templates}};
}

TemplateDatabase db_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::CorruptDatabase, "top level is not an object");
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::UnsupportedSchema, "schema_version " + std::to_string(version));
    }
    TemplateDatabase db;
    db.schema_version = version;
    db.feature_config = feature_config_from_json(j.at("feature_config"));
    db.feature_config.validate();
    const auto id = db.feature_config.id();
    const auto dim = db.feature_config.dimension();
    for (const auto& [name, tj] : j.at("templates").items()) {
      auto label = emg::parse_gesture(name);
      if (!label || *label == GestureLabel::Unknown) {
        throw Error(ErrorCode::CorruptDatabase, "bad template label " + name);
      }
      GestureTemplate t;
      t.label = *label;
      t.centroid = FeatureVector{tj.at("centroid").get<std::vector<double>>(), id};
      t.sigma = tj.at("sigma").get<std::vector<double>>();
      t.sample_count = tj.at("sample_count").get<int>();
      if (t.centroid.values.size() != dim || t.sigma.size() != dim) {
        throw Error(ErrorCode::CorruptDatabase, "template " + name + " has wrong dimension");
      }
      if (t.sample_count < 1) throw Error(ErrorCode::CorruptDatabase, "sample_count < 1");
      db.templates.emplace(*label, std::move(t));
    }
    return db;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptDatabase, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadWindow) throw Error(ErrorCode::CorruptDatabase, e.what());
    throw;
  }
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_text_file(const std::filesystem::path& path, const std::string& text) {
  write_text_file(path, text);
}

void save_db(const TemplateDatabase& db, const std::filesystem::path& path) {
  write_text_file(path, db_to_json(db).dump(2) + "\n");
}

TemplateDatabase load_db(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptDatabase, path.string() + ": " + e.what());
  }
  return db_from_json(j);
}

}  // namespace rehab::store
