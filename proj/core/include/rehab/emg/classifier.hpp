// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "rehab/emg/features.hpp"
#include "rehab/emg/gesture.hpp"
#include "rehab/store/database.hpp"

namespace rehab::emg {

inline constexpr double kDefaultRejectThreshold = 3.0;

struct Classification {
  GestureLabel label = GestureLabel::Unknown;
  double distance = 0.0;
  std::int64_t timestamp_us = 0;

  bool operator==(const Classification&) const = default;
};

/// Root-mean-square of per-dimension z-scores between a vector and a template. Sigma is
/// floored at 1e-6.
double standardized_distance(const FeatureVector& fv, const store::GestureTemplate& tmpl);

/// Nearest-centroid classification with rejection. Exact ties go to the label that comes
/// first in GestureLabel order. Throws EmptyDatabase, ConfigMismatch, or InvalidArgument for a
/// non-positive threshold.
Classification classify(const FeatureVector& fv, const store::TemplateDatabase& db,
                        double reject_threshold = kDefaultRejectThreshold,
                        std::int64_t timestamp_us = 0);

}  // namespace rehab::emg
