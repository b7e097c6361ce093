// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "rehab/emg/gesture.hpp"
#include "rehab/session/plan.hpp"

namespace rehab::sim {

/// Timeline of gestures the synthetic wearer performs. Gaps between entries are Rest.
struct GestureScript {
  struct Entry {
    emg::GestureLabel label = emg::GestureLabel::Rest;
    std::int64_t start_ms = 0;
    std::int64_t duration_ms = 0;
    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;
  std::int64_t total_ms = 0;

  /// Throws BadScript unless entries are sorted, non-overlapping, positive-length, never
  /// Unknown, and inside total_ms.
  void validate() const;

  emg::GestureLabel label_at_us(std::int64_t t_us) const;

  bool operator==(const GestureScript&) const = default;
};

/// JSON list of {label, start_ms, duration_ms}. total_ms is the end of the last entry
/// unless the object form {"entries": [...], "total_ms": n} is used.
GestureScript script_from_json(const nlohmann::json& j);
nlohmann::json script_to_json(const GestureScript& script);
GestureScript load_script(const std::filesystem::path& path);

/// Shapes of a generated session timeline.
struct ScriptOptions {
  std::int64_t lead_rest_ms = 1000;
  bool include_sync = true;
  std::int64_t sync_ms = 1300;
  std::int64_t post_sync_rest_ms = 700;
  /// Extra time each hold is kept beyond hold_s, absorbing recognition latency.
  std::int64_t hold_margin_ms = 1000;
  /// When set, each set's first rep is preceded by this wrong gesture.
  bool inject_wrong_first_rep = false;
  std::int64_t wrong_ms = 800;
  std::int64_t wrong_gap_ms = 300;
  std::int64_t tail_ms = 2000;
};

/// The wrong gesture used for injections: WaveIn, or WaveOut when WaveIn is the target.
emg::GestureLabel wrong_gesture_for(emg::GestureLabel target) noexcept;

/// Timeline of a patient following `plan` correctly: sync wave, then every hold performed
/// for hold_s + margin, paced by the plan's rest periods.
GestureScript make_session_script(const session::ExercisePlan& plan, const ScriptOptions& opts = {});

}  // namespace rehab::sim
