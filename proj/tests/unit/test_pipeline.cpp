// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>

#include "rehab/error.hpp"
#include "rehab/service/harness.hpp"
#include "rehab/service/pipeline.hpp"

using namespace rehab;
using emg::GestureLabel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const store::TemplateDatabase& shared_db() {
  static const auto db =
      service::calibrate_from_simulator(sim::EmgSynthModel::default_model(100), emg::kTemplateLabels, 3000);
  return db;
}

struct Recorder {
  service::Broadcaster bus;
  service::EmitFn fn() {
    return [this](std::int64_t t, const std::string& k, const json& d) { bus.publish(t, k, d); };
  }
  std::vector<std::string> kinds() const {
    std::vector<std::string> out;
    for (const auto& e : bus.since(0)) out.push_back(e.kind);
    return out;
  }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

proto::Bytes play(sim::DeviceSimulator& d, std::int64_t until_us) { return d.advance_to(until_us); }

}  // namespace

TEST(Pipeline, IdleStateAndPreconditions) {
  Recorder rec;
  service::Pipeline p({}, rec.fn());
  EXPECT_EQ(p.state_json().at("phase"), "idle");
  EXPECT_EQ(code_of([&] { p.start_session(session::ExercisePlan::default_plan(), "x"); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { p.abort_session(); }), ErrorCode::Conflict);

  auto partial = shared_db();
  partial.templates.erase(GestureLabel::FingersSpread);
  p.set_database(partial);
  EXPECT_EQ(code_of([&] { p.start_session(session::ExercisePlan::default_plan(), "x"); }), ErrorCode::Conflict);
  auto no_sync = shared_db();
  no_sync.templates.erase(GestureLabel::WaveOut);
  p.set_database(no_sync);
  EXPECT_EQ(code_of([&] { p.start_session(session::ExercisePlan::default_plan(), "x"); }), ErrorCode::Conflict);

  p.set_database(shared_db());
  p.start_session(session::ExercisePlan::default_plan(), "x");
  EXPECT_EQ(p.state_json().at("phase"), "awaiting_sync");
  EXPECT_EQ(p.state_json().at("session_id"), "x");
  EXPECT_EQ(code_of([&] { p.start_session(session::ExercisePlan::default_plan(), "y"); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { p.start_calibration(GestureLabel::Fist); }), ErrorCode::Conflict);
  p.abort_session();
  EXPECT_EQ(p.state_json().at("phase"), "idle");
  const auto k = rec.kinds();
  EXPECT_EQ(std::count(k.begin(), k.end(), "session_started"), 1);
  EXPECT_EQ(std::count(k.begin(), k.end(), "session_aborted"), 1);
}

TEST(Pipeline, RejectsUnusableDatabase) {
  service::Pipeline p({}, [](auto, auto&, auto&) {});
  EXPECT_EQ(code_of([&] { p.set_database({}); }), ErrorCode::StartupFailure);
  auto bad = shared_db();
  bad.feature_config.step_ms = 0;
  EXPECT_EQ(code_of([&] { p.set_database(bad); }), ErrorCode::StartupFailure);
}

TEST(Pipeline, ConnectSendsSetModeAndSurvivesGarbage) {
  Recorder rec;
  service::Pipeline p({}, rec.fn());
  const auto bytes = p.on_connected();
  proto::FrameReader r;
  const auto msgs = r.feed(bytes);
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(proto::decode_command(msgs[0].payload),
            proto::Command(proto::SetMode{proto::emg_mode::kRaw, proto::imu_mode::kData, 0}));
  EXPECT_TRUE(p.connected());
  p.on_bytes(proto::frame_write(proto::Attribute::Emg, proto::Bytes(15, 0)));
  p.on_bytes(proto::Bytes{0x01, 0x00, 0x00, 0x00});
  EXPECT_EQ(p.malformed_packets(), 2u);
  EXPECT_TRUE(p.on_bytes(proto::frame_write(proto::Attribute::Emg, proto::Bytes(16, 0))).empty());
  EXPECT_EQ(p.now_us(), 10'000);
  p.on_disconnected();
  EXPECT_FALSE(p.connected());
  const auto k = rec.kinds();
  EXPECT_EQ(k.front(), "device_connected");
  EXPECT_EQ(k.back(), "device_disconnected");
}

TEST(Pipeline, CalibrationThroughTheStream) {
  const auto dir = fs::temp_directory_path() / ("rehab_pcal_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  service::PipelineOptions o;
  o.db_path = dir / "templates.json";
  Recorder rec;
  service::Pipeline p(o, rec.fn());
  for (auto label : {GestureLabel::Rest, GestureLabel::Fist}) {
    p.start_calibration(label);
    sim::GestureScript s;
    s.entries.push_back({label, 0, 2000});
    s.total_ms = 2000;
    sim::DeviceSimulator d(s, sim::EmgSynthModel::default_model(3));
    d.receive(p.on_connected(), 0);
    p.on_bytes(play(d, d.end_us()));
    const auto r = p.stop_calibration(label);
    EXPECT_TRUE(r.at("template_built").get<bool>());
    EXPECT_GE(r.at("windows").get<int>(), 20);
  }
  ASSERT_TRUE(p.database());
  EXPECT_TRUE(p.database()->session_ready());
  EXPECT_EQ(store::load_db(o.db_path), *p.database());
  EXPECT_EQ(code_of([&] { p.stop_calibration(GestureLabel::Fist); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { p.start_calibration(GestureLabel::Unknown); }), ErrorCode::BadLabel);

  // Too short a recording keeps the database as it was.
  p.start_calibration(GestureLabel::WaveIn);
  p.on_bytes(proto::frame_write(proto::Attribute::Emg, proto::Bytes(16, 0)));
  EXPECT_FALSE(p.stop_calibration(GestureLabel::WaveIn).at("template_built").get<bool>());
  EXPECT_FALSE(p.database()->templates.contains(GestureLabel::WaveIn));
  fs::remove_all(dir);
}

TEST(Pipeline, DisconnectPausesSessionInPlace) {
  const auto plan = session::ExercisePlan::default_plan();
  const auto script = sim::make_session_script(plan);
  Recorder rec;
  service::Pipeline p({}, rec.fn());
  p.set_database(shared_db());
  p.start_session(plan, "pause");

  // First link: play the first 20 s.
  sim::DeviceSimulator first(script, sim::EmgSynthModel::default_model(8));
  first.receive(p.on_connected(), 0);
  for (std::int64_t t = 0; t < 20'000'000; t += 10'000) {
    auto out = p.on_bytes(first.advance_to(t));
    if (!out.empty()) first.receive(out, t);
  }
  p.on_disconnected();
  const auto before = p.state_json();
  ASSERT_GT(before.at("total_reps_done").get<int>(), 0);

  // Nothing moves while the device is away.
  EXPECT_EQ(p.state_json(), before);
  auto k = rec.kinds();
  EXPECT_EQ(k.back(), "device_disconnected");

  // Second link replays the script from its own start; host time keeps running.
  sim::DeviceSimulator second(script, sim::EmgSynthModel::default_model(9));
  second.receive(p.on_connected(), 0);
  p.on_bytes(second.advance_to(50'000));
  EXPECT_GT(p.now_us(), before.at("t_us").get<std::int64_t>());
  EXPECT_EQ(p.state_json().at("session_id"), "pause");
  EXPECT_GE(p.state_json().at("total_reps_done").get<int>(), before.at("total_reps_done").get<int>());
}

TEST(Pipeline, StreamMatchesPersistedLog) {
  const auto dir = fs::temp_directory_path() / ("rehab_plog_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  service::LockstepOptions o;
  o.data_dir = dir;
  o.session_id = "match";
  const auto plan = session::ExercisePlan::default_plan();
  sim::ScriptOptions so;
  so.inject_wrong_first_rep = true;
  const auto r = service::run_lockstep(sim::make_session_script(plan, so), sim::EmgSynthModel::default_model(4),
                                       shared_db(), plan, o);
  const auto stream = service::feedback_events(r.events);
  const auto persisted = store::load_log(store::session_log_path(dir, "match"));
  EXPECT_TRUE(persisted.completed);
  EXPECT_EQ(persisted.events, stream);
  EXPECT_EQ(persisted, r.log);
  fs::remove_all(dir);
}
