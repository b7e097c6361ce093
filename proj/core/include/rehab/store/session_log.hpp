// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rehab/session/events.hpp"

namespace rehab::store {

/// Persisted timeline of one session, for later review.
struct SessionLog {
  std::string session_id;
  std::string started_at;  // ISO-8601 UTC
  nlohmann::json plan = nlohmann::json::array();
  std::vector<session::FeedbackEvent> events;
  bool completed = false;

  bool operator==(const SessionLog&) const = default;
};

/// Appends `event` stamped at `t_us`. Throws NonMonotonicLog when `t_us` precedes the last
/// event. `completed` tracks whether the final event is SessionCompleted.
void append_log(SessionLog& log, session::EventPayload event, std::int64_t t_us);
SessionLog append_log(SessionLog log, const session::FeedbackEvent& event);

nlohmann::json log_to_json(const SessionLog& log);
/// Throws CorruptDatabase / UnsupportedSchema / NonMonotonicLog.
SessionLog log_from_json(const nlohmann::json& j);

void save_log(const SessionLog& log, const std::filesystem::path& path);
SessionLog load_log(const std::filesystem::path& path);

/// `<dir>/sessions/<id>.json`
std::filesystem::path session_log_path(const std::filesystem::path& dir, const std::string& id);

}  // namespace rehab::store
