// SPDX-License-Identifier: Apache-2.0
#include "rehab/emg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rehab/error.hpp"

namespace rehab::emg {

double standardized_distance(const FeatureVector& fv, const store::GestureTemplate& tmpl) {
  const auto& c = tmpl.centroid.values;
  if (fv.values.size() != c.size() || tmpl.sigma.size() != c.size()) {
    throw Error(ErrorCode::ConfigMismatch, "feature dimension mismatch");
  }
  if (c.empty()) throw Error(ErrorCode::ConfigMismatch, "zero-dimensional template");
  double sum = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double z = (fv.values[j] - c[j]) / std::max(tmpl.sigma[j], store::kSigmaFloor);
    sum += z * z;
  }
  return std::sqrt(sum / static_cast<double>(c.size()));
}

Classification classify(const FeatureVector& fv, const store::TemplateDatabase& db,
                        double reject_threshold, std::int64_t timestamp_us) {
  if (db.templates.empty()) throw Error(ErrorCode::EmptyDatabase, "no templates");
  if (!(reject_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "reject threshold must be positive");
  }
  if (fv.feature_config_id != db.feature_config.id()) {
    throw Error(ErrorCode::ConfigMismatch,
                "vector config " + fv.feature_config_id + " vs db " + db.feature_config.id());
  }

  GestureLabel best = GestureLabel::Unknown;
  double best_d = std::numeric_limits<double>::infinity();
  // std::map iterates in label order, so strict '<' keeps the earliest label on ties.
  for (const auto& [label, tmpl] : db.templates) {
    const double d = standardized_distance(fv, tmpl);
    if (d < best_d) {
      best_d = d;
      best = label;
    }
  }
  Classification out;
  out.distance = best_d;
  out.timestamp_us = timestamp_us;
  out.label = best_d <= reject_threshold ? best : GestureLabel::Unknown;
  return out;
}

}  // namespace rehab::emg
