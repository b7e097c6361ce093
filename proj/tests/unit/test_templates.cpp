// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "gen.hpp"
#include "oracles.hpp"
#include "rehab/emg/classifier.hpp"
#include "rehab/error.hpp"
#include "rehab/service/harness.hpp"
#include "rehab/store/templates.hpp"

using namespace rehab;
using emg::GestureLabel;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rehab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

emg::FeatureVector vec(const emg::FeatureConfig& cfg, double v) {
  return {std::vector<double>(cfg.dimension(), v), cfg.id()};
}

}  // namespace

TEST(Calibration, RecordsSimulatedWindows) {
  const auto model = sim::EmgSynthModel::default_model(4);
  auto windows = service::simulate_gesture_windows(model, GestureLabel::Fist, 2000, {});
  ASSERT_GE(windows.size(), 30u);
  windows.erase(windows.begin() + 30, windows.end());
  store::CalibrationBuffers buf;
  store::calibration_record(buf, GestureLabel::Fist, windows);
  EXPECT_EQ(buf.count(GestureLabel::Fist), 30u);
  store::calibration_record(buf, GestureLabel::Fist, {});
  EXPECT_EQ(buf.count(GestureLabel::Fist), 30u);
  EXPECT_EQ(code_of([&] { buf.record(GestureLabel::Unknown, windows); }), ErrorCode::BadLabel);
}

TEST(Calibration, NonConformingWindowIsMalformed) {
  std::vector<emg::EmgFrame> frames(20);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].timestamp_us = static_cast<std::int64_t>(i) * 5000;
  const std::vector<emg::EmgWindow> w = {emg::EmgWindow(frames, 100, 50)};
  store::CalibrationBuffers buf;
  EXPECT_EQ(code_of([&] { buf.record(GestureLabel::Rest, w); }), ErrorCode::MalformedStream);
  EXPECT_EQ(buf.count(GestureLabel::Rest), 0u);
}

TEST(Calibration, IdenticalVectorsGiveFlooredSigma) {
  emg::FeatureConfig cfg;
  store::CalibrationBuffers buf(cfg);
  for (int i = 0; i < 20; ++i) buf.record_vector(GestureLabel::Rest, vec(cfg, 3.5));
  const auto db = store::calibration_finalize(buf, 20);
  const auto& t = db.templates.at(GestureLabel::Rest);
  EXPECT_EQ(t.centroid.values, std::vector<double>(32, 3.5));
  EXPECT_EQ(t.sigma, std::vector<double>(32, store::kSigmaFloor));
  EXPECT_EQ(t.sample_count, 20);
}

TEST(Calibration, TwoPointMeanAndPopulationSigma) {
  emg::FeatureConfig cfg;
  store::CalibrationBuffers buf(cfg);
  buf.record_vector(GestureLabel::Fist, vec(cfg, 0.0));
  buf.record_vector(GestureLabel::Fist, vec(cfg, 2.0));
  const auto db = store::calibration_finalize(buf, 1);
  EXPECT_EQ(db.templates.at(GestureLabel::Fist).centroid.values, std::vector<double>(32, 1.0));
  EXPECT_EQ(db.templates.at(GestureLabel::Fist).sigma, std::vector<double>(32, 1.0));
}

TEST(Calibration, InsufficientWindows) {
  emg::FeatureConfig cfg;
  store::CalibrationBuffers buf(cfg);
  for (int i = 0; i < 19; ++i) buf.record_vector(GestureLabel::WaveIn, vec(cfg, i));
  EXPECT_EQ(code_of([&] { store::calibration_finalize(buf, 20); }), ErrorCode::InsufficientCalibration);
}

TEST(Calibration, MatchesOracleStatistics) {
  gen::Gen g(12);
  emg::FeatureConfig cfg;
  for (int c = 0; c < 50; ++c) {
    std::vector<emg::FeatureVector> vs(static_cast<std::size_t>(g.integer(1, 60)));
    for (auto& v : vs) {
      v = vec(cfg, 0);
      for (auto& x : v.values) x = g.real(-100, 100);
    }
    const auto t = store::build_template(GestureLabel::Fist, vs, cfg);
    for (std::size_t j = 0; j < cfg.dimension(); ++j) {
      std::vector<double> col;
      for (const auto& v : vs) col.push_back(v.values[j]);
      const auto [m, s] = oracle::mean_sigma(col);
      EXPECT_NEAR(t.centroid.values[j], m, 1e-10);
      EXPECT_NEAR(t.sigma[j], std::max(s, 1e-6), 1e-10);
    }
  }
}

TEST(Calibration, PermutationInvariant) {
  gen::Gen g(13);
  emg::FeatureConfig cfg;
  for (int c = 0; c < 100; ++c) {
    store::CalibrationBuffers a(cfg), b(cfg);
    std::vector<emg::FeatureVector> vs(static_cast<std::size_t>(g.integer(20, 50)));
    for (auto& v : vs) {
      v = vec(cfg, 0);
      for (auto& x : v.values) x = g.real(-1e3, 1e3) * (g.coin(0.1) ? 1e6 : 1.0);
    }
    for (const auto& v : vs) a.record_vector(GestureLabel::Fist, v);
    std::shuffle(vs.begin(), vs.end(), g.engine());
    for (const auto& v : vs) b.record_vector(GestureLabel::Fist, v);
    ASSERT_EQ(store::calibration_finalize(a), store::calibration_finalize(b));
  }
}

TEST(Calibration, SelfConsistencyOnSimulator) {
  const auto model = sim::EmgSynthModel::default_model(21);
  store::CalibrationBuffers buf;
  for (auto l : emg::kTemplateLabels) buf.record(l, service::simulate_gesture_windows(model, l, 4000, {}));
  const auto db = store::calibration_finalize(buf);
  for (const auto& [label, vs] : buf.buffers()) {
    std::size_t ok = 0;
    for (const auto& v : vs) ok += emg::classify(v, db).label == label;
    EXPECT_GE(static_cast<double>(ok) / vs.size(), 0.95) << emg::to_string(label);
  }
}

TEST(Database, JsonKeys) {
  gen::Gen g(1);
  const auto db = gen::any_database(g, {}, 2);
  const auto j = store::db_to_json(db);
  EXPECT_EQ(j.at("schema_version"), 1);
  for (const char* k : {"sample_rate_hz", "window_ms", "step_ms", "features", "zc_deadband"}) {
    EXPECT_TRUE(j.at("feature_config").contains(k)) << k;
  }
  for (const auto& [name, t] : j.at("templates").items()) {
    EXPECT_TRUE(emg::parse_gesture(name));
    EXPECT_TRUE(t.contains("centroid") && t.contains("sigma") && t.contains("sample_count"));
  }
}

TEST(Database, FileRoundTripRandom) {
  const auto dir = temp_dir("db");
  gen::Gen g(77);
  for (int c = 0; c < 100; ++c) {
    const auto db = gen::any_database(g, gen::any_feature_config(g), 1);
    const auto path = dir / ("db" + std::to_string(c) + ".json");
    store::save_db(db, path);
    ASSERT_EQ(store::load_db(path), db) << "case " << c;
  }
  fs::remove_all(dir);
}

TEST(Database, CorruptAndUnsupported) {
  const auto dir = temp_dir("dbbad");
  gen::Gen g(5);
  const auto path = dir / "templates.json";
  store::save_db(gen::any_database(g, {}, 2), path);
  const auto text = store::read_text_file(path);
  store::save_text_file(path, text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { store::load_db(path); }), ErrorCode::CorruptDatabase);

  auto j = nlohmann::json::parse(text);
  j["schema_version"] = 999;
  store::save_text_file(path, j.dump());
  EXPECT_EQ(code_of([&] { store::load_db(path); }), ErrorCode::UnsupportedSchema);

  j = nlohmann::json::parse(text);
  j["templates"]["unknown"] = j["templates"].begin().value();
  store::save_text_file(path, j.dump());
  EXPECT_EQ(code_of([&] { store::load_db(path); }), ErrorCode::CorruptDatabase);

  j = nlohmann::json::parse(text);
  j["templates"].begin().value()["sigma"].erase(0);
  store::save_text_file(path, j.dump());
  EXPECT_EQ(code_of([&] { store::load_db(path); }), ErrorCode::CorruptDatabase);

  EXPECT_EQ(code_of([&] { store::load_db(dir / "missing.json"); }), ErrorCode::Io);
  fs::remove_all(dir);
}

TEST(Database, SessionReadiness) {
  gen::Gen g(2);
  store::TemplateDatabase db;
  EXPECT_FALSE(db.session_ready());
  auto full = gen::any_database(g, {}, 5);
  db.templates[GestureLabel::Rest] = full.templates.at(GestureLabel::Rest);
  EXPECT_FALSE(db.session_ready());
  db.templates[GestureLabel::Fist] = full.templates.at(GestureLabel::Fist);
  EXPECT_TRUE(db.session_ready());
}
