// SPDX-License-Identifier: Apache-2.0
#include "rehab/store/session_log.hpp"

#include "rehab/error.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::store {

using nlohmann::json;

void append_log(SessionLog& log, session::EventPayload event, std::int64_t t_us) {
  if (!log.events.empty() && t_us < log.events.back().t_us) {
    throw Error(ErrorCode::NonMonotonicLog, "event at " + std::to_string(t_us) +
                                                " precedes " +
                                                std::to_string(log.events.back().t_us));
  }
  log.events.push_back(session::FeedbackEvent{t_us, std::move(event)});
  log.completed = log.events.back().is<session::ev::SessionCompleted>();
}

SessionLog append_log(SessionLog log, const session::FeedbackEvent& event) {
  append_log(log, event.payload, event.t_us);
  return log;
}

json log_to_json(const SessionLog& log) {
  json events = json::array();
  for (const auto& e : log.events) {
    events.push_back(json{{"t_us", e.t_us},
                          {"kind", session::kind_name(e.payload)},
                          {"detail", session::event_detail(e.payload)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"session_id", log.session_id},
              {"started_at", log.started_at},
              {"plan", log.plan},
              {"completed", log.completed},
              {"events", events}};
}

SessionLog log_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::UnsupportedSchema, "schema_version " + std::to_string(version));
    }
    SessionLog log;
    log.session_id = j.at("session_id").get<std::string>();
    log.started_at = j.at("started_at").get<std::string>();
    log.plan = j.at("plan");
    for (const auto& ej : j.at("events")) {
      append_log(log,
                 session::parse_event(ej.at("kind").get<std::string>(), ej.at("detail")),
                 ej.at("t_us").get<std::int64_t>());
    }
    const bool completed = j.at("completed").get<bool>();
    if (completed != log.completed) {
      throw Error(ErrorCode::CorruptDatabase, "completed flag disagrees with final event");
    }
    return log;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptDatabase, e.what());
  }
}

void save_log(const SessionLog& log, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_text_file(path, log_to_json(log).dump(2) + "\n");
}

SessionLog load_log(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptDatabase, path.string() + ": " + e.what());
  }
  return log_from_json(j);
}

std::filesystem::path session_log_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / "sessions" / (id + ".json");
}

}  // namespace rehab::store
