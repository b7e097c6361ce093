// SPDX-License-Identifier: Apache-2.0
#include "rehab/sim/script.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rehab/error.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::sim {

using emg::GestureLabel;
using nlohmann::json;

void GestureScript::validate() const {
  std::int64_t prev_end = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.label == GestureLabel::Unknown) throw Error(ErrorCode::BadScript, "Unknown in script");
    if (e.start_ms < 0 || e.duration_ms <= 0) {
      throw Error(ErrorCode::BadScript, "entry " + std::to_string(i) + " has bad timing");
    }
    if (e.start_ms < prev_end) {
      throw Error(ErrorCode::BadScript, "entry " + std::to_string(i) + " overlaps or is unsorted");
    }
    prev_end = e.start_ms + e.duration_ms;
  }
  if (total_ms < prev_end) throw Error(ErrorCode::BadScript, "total_ms shorter than entries");
}

GestureLabel GestureScript::label_at_us(std::int64_t t_us) const {
  auto it = std::upper_bound(entries.begin(), entries.end(), t_us,
                             [](std::int64_t t, const Entry& e) { return t < e.start_ms * 1000; });
  if (it == entries.begin()) return GestureLabel::Rest;
  --it;
  return t_us < (it->start_ms + it->duration_ms) * 1000 ? it->label : GestureLabel::Rest;
}

GestureScript script_from_json(const json& j) {
  GestureScript s;
  try {
    const json* list = &j;
    std::optional<std::int64_t> total;
    if (j.is_object()) {
      list = &j.at("entries");
      if (j.contains("total_ms")) total = j.at("total_ms").get<std::int64_t>();
    }
    if (!list->is_array()) throw Error(ErrorCode::BadScript, "script must be a list");
    for (const auto& ej : *list) {
      const auto label = emg::parse_gesture(ej.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::BadScript, "unknown label " + ej.at("label").dump());
      s.entries.push_back({*label, ej.at("start_ms").get<std::int64_t>(),
                           ej.at("duration_ms").get<std::int64_t>()});
    }
    s.total_ms = s.entries.empty() ? 0 : s.entries.back().start_ms + s.entries.back().duration_ms;
    if (total) s.total_ms = *total;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadScript, e.what());
  }
  s.validate();
  return s;
}

json script_to_json(const GestureScript& script) {
  json list = json::array();
  for (const auto& e : script.entries) {
    list.push_back(json{{"label", emg::to_string(e.label)},
                        {"start_ms", e.start_ms},
                        {"duration_ms", e.duration_ms}});
  }
  return json{{"entries", list}, {"total_ms", script.total_ms}};
}

GestureScript load_script(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(store::read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadScript, path.string() + ": " + e.what());
  }
  return script_from_json(j);
}

GestureLabel wrong_gesture_for(GestureLabel target) noexcept {
  return target == GestureLabel::WaveIn ? GestureLabel::WaveOut : GestureLabel::WaveIn;
}

GestureScript make_session_script(const session::ExercisePlan& plan, const ScriptOptions& opts) {
  plan.validate();
  GestureScript s;
  auto add = [&](GestureLabel label, std::int64_t start, std::int64_t duration) {
    if (!s.entries.empty()) {
      auto& last = s.entries.back();
      if (last.label == label && last.start_ms + last.duration_ms == start) {
        last.duration_ms += duration;
        return;
      }
    }
    s.entries.push_back({label, start, duration});
  };
  auto ms = [](double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1000.0)); };

  std::int64_t t = opts.lead_rest_ms;
  if (opts.include_sync) {
    add(GestureLabel::WaveOut, t, opts.sync_ms);
    t += opts.sync_ms + opts.post_sync_rest_ms;
  }
  const auto n_ex = plan.exercises.size();
  for (std::size_t ex = 0; ex < n_ex; ++ex) {
    const auto& spec = plan.exercises[ex];
    const auto hold = ms(spec.hold_s);
    for (int set = 0; set < spec.sets; ++set) {
      for (int rep = 0; rep < spec.reps_per_set; ++rep) {
        if (opts.inject_wrong_first_rep && rep == 0) {
          add(wrong_gesture_for(spec.target), t, opts.wrong_ms);
          t += opts.wrong_ms + opts.wrong_gap_ms;
        }
        add(spec.target, t, hold + opts.hold_margin_ms);
        const bool last_rep = rep + 1 == spec.reps_per_set;
        const bool last_set = set + 1 == spec.sets;
        const bool last_ex = ex + 1 == n_ex;
        std::int64_t rest = ms(last_rep ? spec.rest_between_sets_s : spec.rest_between_reps_s);
        if (last_rep && last_set && last_ex) rest = opts.hold_margin_ms + opts.tail_ms;
        t += hold + std::max(rest, opts.hold_margin_ms);
      }
    }
  }
  s.total_ms = t;
  s.validate();
  return s;
}

}  // namespace rehab::sim
