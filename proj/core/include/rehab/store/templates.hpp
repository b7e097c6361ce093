// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rehab/emg/features.hpp"
#include "rehab/store/database.hpp"

namespace rehab::store {

/// Feature vectors collected per label during calibration, all extracted with one config.
class CalibrationBuffers {
 public:
  explicit CalibrationBuffers(emg::FeatureConfig config = {});

  const emg::FeatureConfig& config() const noexcept { return config_; }
  const std::map<emg::GestureLabel, std::vector<emg::FeatureVector>>& buffers() const noexcept {
    return buffers_;
  }
  std::size_t count(emg::GestureLabel label) const;

  /// Featurizes and appends each window under `label`. Throws BadLabel for Unknown and
  /// MalformedStream if a window was not cut with this config. On error nothing is added.
  void record(emg::GestureLabel label, std::span<const emg::EmgWindow> windows);

  /// Appends an already extracted vector (used when replaying stored vectors).
  void record_vector(emg::GestureLabel label, emg::FeatureVector fv);

  void clear(emg::GestureLabel label);

 private:
  emg::FeatureConfig config_;
  std::map<emg::GestureLabel, std::vector<emg::FeatureVector>> buffers_;
};

/// Free-function spelling of CalibrationBuffers::record.
void calibration_record(CalibrationBuffers& buffers, emg::GestureLabel label,
                        std::span<const emg::EmgWindow> windows);

/// Builds one template per non-empty buffer: centroid = mean, sigma = population standard
/// deviation floored at 1e-6. Throws InsufficientCalibration naming the first label with
/// fewer than `min_windows` vectors.
TemplateDatabase calibration_finalize(const CalibrationBuffers& buffers,
                                      int min_windows = kDefaultMinCalibrationWindows);

/// Single-template form of calibration_finalize.
GestureTemplate build_template(emg::GestureLabel label, std::span<const emg::FeatureVector> vectors,
                               const emg::FeatureConfig& config);

nlohmann::json feature_config_to_json(const emg::FeatureConfig& config);
emg::FeatureConfig feature_config_from_json(const nlohmann::json& j);

nlohmann::json db_to_json(const TemplateDatabase& db);
/// Throws UnsupportedSchema or CorruptDatabase.
TemplateDatabase db_from_json(const nlohmann::json& j);

/// Whole-file helpers; writes go through a temporary file and a rename.
std::string read_text_file(const std::filesystem::path& path);
void save_text_file(const std::filesystem::path& path, const std::string& text);

void save_db(const TemplateDatabase& db, const std::filesystem::path& path);
TemplateDatabase load_db(const std::filesystem::path& path);

}  // namespace rehab::store
