// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <vector>

#include "rehab/emg/features.hpp"
#include "rehab/emg/gesture.hpp"

namespace rehab::store {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kSigmaFloor = 1e-6;
inline constexpr int kDefaultMinCalibrationWindows = 20;

struct GestureTemplate {
  emg::GestureLabel label = emg::GestureLabel::Rest;
  emg::FeatureVector centroid;
  std::vector<double> sigma;
  int sample_count = 0;

  bool operator==(const GestureTemplate&) const = default;
};

/// The gesture database. Templates are keyed (and therefore iterated) in label
/// enumeration order.
struct TemplateDatabase {
  int schema_version = kSchemaVersion;
  emg::FeatureConfig feature_config;
  std::map<emg::GestureLabel, GestureTemplate> templates;

  /// Rest plus at least one active gesture.
  bool session_ready() const;

  bool operator==(const TemplateDatabase&) const = default;
};

}  // namespace rehab::store
