// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include "gen.hpp"
#include "oracles.hpp"
#include "rehab/emg/classifier.hpp"
#include "rehab/error.hpp"
#include "rehab/service/harness.hpp"
#include "rehab/service/service.hpp"
#include "rehab/store/templates.hpp"

using namespace rehab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Criterion failed; the message says which check.
struct Fail {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Fail{what};
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("rehab_accept_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const store::TemplateDatabase& calibrated_db() {
  static const auto db = service::calibrate_from_simulator(sim::EmgSynthModel::default_model(100),
                                                           emg::kTemplateLabels, 3000);
  return db;
}

template <class T>
int count(const std::vector<session::FeedbackEvent>& fb) {
  int n = 0;
  for (const auto& e : fb) n += e.is<T>() ? 1 : 0;
  return n;
}

std::string counts_line(const std::vector<session::FeedbackEvent>& fb) {
  std::ostringstream s;
  s << "reps=" << count<session::ev::RepCounted>(fb) << " sets=" << count<session::ev::SetCompleted>(fb)
    << " exercises=" << count<session::ev::ExerciseCompleted>(fb)
    << " sessions=" << count<session::ev::SessionCompleted>(fb)
    << " incorrect=" << count<session::ev::IncorrectMovement>(fb);
  return s.str();
}

bool perfect_counts(const std::vector<session::FeedbackEvent>& fb) {
  return count<session::ev::RepCounted>(fb) == 30 && count<session::ev::SetCompleted>(fb) == 6 &&
         count<session::ev::ExerciseCompleted>(fb) == 2 && count<session::ev::SessionCompleted>(fb) == 1 &&
         count<session::ev::IncorrectMovement>(fb) == 0;
}

// ---------------------------------------------------------------------------

std::string codec_round_trip() {
  const auto t0 = Clock::now();
  gen::Gen g(1);
  for (int i = 0; i < 100'000; ++i) {
    switch (i % 4) {
      case 0: {
        const auto c = gen::any_command(g);
        check(proto::decode_command(proto::encode_command(c)) == c, "command round trip");
        break;
      }
      case 1: {
        const auto p = gen::any_emg_packet(g);
        check(proto::decode_emg_raw(proto::encode_emg_packet(p)) == p, "emg round trip");
        break;
      }
      case 2: {
        const auto p = gen::any_imu_packet(g);
        check(proto::decode_imu_raw(proto::encode_imu_packet(p)) == p, "imu round trip");
        break;
      }
      default: {
        proto::ClassifierEventPacket p{g.byte(), g.bytes(static_cast<std::size_t>(g.integer(0, 16)))};
        check(proto::decode_classifier_event(proto::encode_classifier_event(p)) == p, "classifier event");
        break;
      }
    }
  }

  // Fuzz: every decoder either returns or throws a typed Error.
  std::uint64_t accepted = 0;
  auto total = [&](auto&& fn) {
    try {
      fn();
      ++accepted;
    } catch (const Error&) {
    }
  };
  proto::FrameReader reader;
  for (int i = 0; i < 1'000'000; ++i) {
    const auto b = g.bytes(static_cast<std::size_t>(g.integer(0, 64)));
    switch (i % 5) {
      case 0: total([&] { (void)proto::decode_command(b); }); break;
      case 1: total([&] { (void)proto::decode_emg_packet(b); }); break;
      case 2: total([&] { (void)proto::decode_imu_packet(b); }); break;
      case 3: total([&] { (void)proto::decode_classifier_event(b); }); break;
      default:
        try {
          (void)reader.feed(b);
        } catch (const Error&) {
          reader.reset();
        }
    }
  }
  const double secs = seconds_since(t0);
  check(secs < 30.0, "runtime " + std::to_string(secs) + " s");
  return "1e5 round trips, 1e6 fuzz inputs (" + std::to_string(accepted) + " decoded) in " +
         std::to_string(secs) + " s";
}

std::string frame_split_invariance() {
  gen::Gen g(2);
  std::size_t chunkings = 0;
  for (int c = 0; c < 100; ++c) {
    const auto msgs = gen::any_messages(g);
    proto::Bytes stream;
    for (const auto& m : msgs) {
      const auto f = proto::frame_write(m.attribute_id, m.payload);
      stream.insert(stream.end(), f.begin(), f.end());
    }
    auto reassemble = [&](const std::vector<std::size_t>& cuts) {
      proto::FrameReader r;
      std::vector<proto::FramedMessage> out;
      std::size_t from = 0;
      for (std::size_t i = 0; i <= cuts.size(); ++i) {
        const std::size_t to = i < cuts.size() ? cuts[i] : stream.size();
        auto got = r.feed(proto::ByteView(stream).subspan(from, to - from));
        out.insert(out.end(), got.begin(), got.end());
        from = to;
      }
      ++chunkings;
      return out == msgs;
    };
    // Each single boundary, every boundary at once, and random multi-cut chunkings.
    for (std::size_t cut = 0; cut <= stream.size(); ++cut) check(reassemble({cut}), "single cut");
    std::vector<std::size_t> all;
    for (std::size_t i = 1; i < stream.size(); ++i) all.push_back(i);
    check(reassemble(all), "byte at a time");
    for (int k = 0; k < 200; ++k) {
      std::vector<std::size_t> cuts;
      const double p = g.real(0.01, 0.5);
      for (std::size_t i = 1; i < stream.size(); ++i)
        if (g.coin(p)) cuts.push_back(i);
      check(reassemble(cuts), "random chunking");
    }
  }
  return std::to_string(chunkings) + " chunkings of 100 sequences";
}

std::string feature_properties() {
  gen::Gen g(3);
  double worst = 0;
  auto rel = [](double got, double want) {
    return want == 0 ? std::fabs(got) : std::fabs(got - want) / std::fabs(want);
  };
  for (int c = 0; c < 1000; ++c) {
    const auto x = g.signal(static_cast<std::size_t>(g.integer(2, 200)), g.real(1e-3, 1e3));
    const double a = g.coin() ? g.real(-1e3, 1e3) : g.real(-1, 1);
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = a * x[i];
    const double errs[] = {rel(emg::mav(ax), std::fabs(a) * emg::mav(x)),
                           rel(emg::rms(ax), std::fabs(a) * emg::rms(x)),
                           rel(emg::waveform_length(ax), std::fabs(a) * emg::waveform_length(x))};
    for (double e : errs) worst = std::max(worst, e);
    // Reference values from the long-double oracle.
    check(rel(emg::mav(x), oracle::mav(x)) <= 1e-12, "mav oracle");
    check(rel(emg::rms(x), oracle::rms(x)) <= 1e-12, "rms oracle");
    check(rel(emg::waveform_length(x), oracle::wl(x)) <= 1e-12, "wl oracle");
  }
  check(worst <= 1e-9, "equivariance error " + std::to_string(worst));

  for (int c = 0; c < 1000; ++c) {
    std::vector<double> x(static_cast<std::size_t>(g.integer(2, 120)));
    for (auto& v : x) v = g.coin(0.3) ? static_cast<double>(g.integer(-10, 10)) : g.real(-30, 30);
    double db = 0;
    int prev = emg::zero_crossings(x, db);
    check(prev == oracle::zc(x, db), "zc oracle");
    for (int k = 0; k < 12; ++k) {
      db += g.coin(0.2) ? 0.0 : g.real(0, 6);
      const int now = emg::zero_crossings(x, db);
      check(now <= prev, "zc increased with deadband");
      check(now == oracle::zc(x, db), "zc oracle");
      prev = now;
    }
  }
  std::ostringstream s;
  s << "worst relative equivariance error " << worst << ", ZC monotone on 1000 cases";
  return s.str();
}

std::string classifier_oracle() {
  gen::Gen g(4);
  int ties = 0, rejected = 0;
  for (int c = 0; c < 1000; ++c) {
    const auto cfg = gen::any_feature_config(g);
    auto db = gen::any_database(g, cfg, 2);
    if (g.coin(0.25)) {
      // Duplicate the first template under the last label: forces an exact tie.
      auto copy = db.templates.begin()->second;
      auto last = std::prev(db.templates.end());
      copy.label = last->first;
      last->second = copy;
      ++ties;
    }
    emg::FeatureVector fv;
    fv.feature_config_id = cfg.id();
    if (g.coin(0.3)) {
      fv.values = std::next(db.templates.begin(), g.integer(0, static_cast<std::int64_t>(db.templates.size()) - 1))
                      ->second.centroid.values;
    } else {
      fv.values.resize(cfg.dimension());
      for (auto& v : fv.values) v = g.real(-60, 60);
    }
    const double threshold = g.coin() ? g.real(0.1, 5.0) : 1e9;
    const auto got = emg::classify(fv, db, threshold);
    const auto want = oracle::classify(fv.values, db, threshold);
    check(got.label == want.label, "label mismatch in case " + std::to_string(c));
    rejected += got.label == emg::GestureLabel::Unknown;
  }
  return "1000 cases, " + std::to_string(ties) + " forced ties, " + std::to_string(rejected) + " rejections";
}

std::string end_to_end_perfect() {
  const auto plan = session::ExercisePlan::default_plan();
  check(plan.exercises.size() == 2, "default plan shape");
  for (const auto& e : plan.exercises) check(e.sets == 3 && e.reps_per_set == 5 && e.hold_s == 5.0, "default plan shape");

  // In-process lockstep.
  const auto r = service::run_lockstep(sim::make_session_script(plan), sim::EmgSynthModel::default_model(7),
                                       calibrated_db(), plan, {});
  const auto lock_fb = service::feedback_events(r.events);
  check(perfect_counts(lock_fb), "lockstep " + counts_line(lock_fb));

  // Full service over the simulator link on a virtual clock.
  const auto dir = scratch("e2e");
  store::save_db(calibrated_db(), dir / "templates.json");
  service::ServiceConfig cfg;
  cfg.db_path = dir / "templates.json";
  cfg.listen = "127.0.0.1:0";
  cfg.clock = "virtual";
  cfg.seed = 7;
  cfg.data_dir = dir;
  cfg.autostart = true;
  const auto t0 = Clock::now();
  service::Service svc(cfg);
  svc.start();
  bool done = false;
  while (!done && seconds_since(t0) < 10.0) {
    for (const auto& e : svc.events().since(0)) done |= e.kind == "session_completed";
    if (!done) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  const double secs = seconds_since(t0);
  const auto fb = service::feedback_events(svc.events().since(0));
  svc.stop();
  check(done, "service session did not complete within 10 s");
  check(perfect_counts(fb), "service " + counts_line(fb));
  check(fb == lock_fb, "service trace differs from lockstep trace");
  return counts_line(fb) + ", service run " + std::to_string(secs) + " s";
}

std::string error_path() {
  const auto plan = session::ExercisePlan::default_plan();
  sim::ScriptOptions so;
  so.inject_wrong_first_rep = true;
  const auto r = service::run_lockstep(sim::make_session_script(plan, so), sim::EmgSynthModel::default_model(11),
                                       calibrated_db(), plan, {});
  const auto fb = service::feedback_events(r.events);

  // Attribute each IncorrectMovement to the prompt that was active.
  std::map<std::pair<int, int>, int> incorrect_at_first_rep;
  const session::ev::Prompt* active = nullptr;
  int total_incorrect = 0;
  for (std::size_t i = 0; i < fb.size(); ++i) {
    if (const auto* p = std::get_if<session::ev::Prompt>(&fb[i].payload)) active = p;
    if (!fb[i].is<session::ev::IncorrectMovement>()) continue;
    ++total_incorrect;
    check(active != nullptr, "incorrect movement before any prompt");
    if (active->rep == 0) ++incorrect_at_first_rep[{active->exercise, active->set}];
    // The next feedback event re-prompts the same position.
    check(i + 1 < fb.size(), "incorrect movement at end of trace");
    const auto* next = std::get_if<session::ev::Prompt>(&fb[i + 1].payload);
    check(next && *next == *active, "incorrect movement not followed by a re-prompt");
  }
  int injections = 0;
  for (std::size_t e = 0; e < plan.exercises.size(); ++e)
    for (int s = 0; s < plan.exercises[e].sets; ++s) {
      ++injections;
      check(incorrect_at_first_rep[{static_cast<int>(e), s}] >= 1,
            "no incorrect movement for injection at exercise " + std::to_string(e) + " set " + std::to_string(s));
    }
  check(count<session::ev::SessionCompleted>(fb) == 1, "session did not complete");
  check(count<session::ev::RepCounted>(fb) == 30, "rep count " + std::to_string(count<session::ev::RepCounted>(fb)));
  return std::to_string(injections) + " injections, " + std::to_string(total_incorrect) +
         " incorrect movements, each re-prompted; session completed";
}

std::string sync_gating() {
  const auto plan = session::ExercisePlan::default_plan();
  for (std::int64_t sync_ms : {std::int64_t{0}, std::int64_t{600}}) {
    sim::ScriptOptions so;
    so.include_sync = sync_ms > 0;
    if (sync_ms > 0) so.sync_ms = sync_ms;
    const auto r = service::run_lockstep(sim::make_session_script(plan, so), sim::EmgSynthModel::default_model(5),
                                         calibrated_db(), plan, {});
    const auto fb = service::feedback_events(r.events);
    const std::string tag = " (sync " + std::to_string(sync_ms) + " ms)";
    check(r.final_state.at("phase") == "awaiting_sync", "left AwaitingSync" + tag);
    check(count<session::ev::SyncDetected>(fb) == 0, "sync detected" + tag);
    check(count<session::ev::VibrateRequested>(fb) == 0, "vibration requested" + tag);
    check(r.device.vibrations.empty(), "vibration at the device" + tag);
  }
  const auto r = service::run_lockstep(sim::make_session_script(plan), sim::EmgSynthModel::default_model(5),
                                       calibrated_db(), plan, {});
  const auto fb = service::feedback_events(r.events);
  check(count<session::ev::SyncDetected>(fb) == 1, "sync count");
  check(count<session::ev::VibrateRequested>(fb) == 1, "vibrate count");
  check(r.device.vibrations.size() == 1, "device saw " + std::to_string(r.device.vibrations.size()) + " vibrations");
  check(r.device.synced, "device not synced");
  return "no-sync and 600 ms WaveOut scripts stay in awaiting_sync; with sync 1 vibration requested and observed";
}

std::string recognition() {
  const auto& db = calibrated_db();
  std::ostringstream s;
  double worst = 1.0;
  for (auto label : emg::kTemplateLabels) {
    std::size_t ok = 0, total = 0;
    for (std::uint64_t seed = 1000; seed < 1005; ++seed) {
      const auto windows =
          service::simulate_gesture_windows(sim::EmgSynthModel::default_model(seed), label, 4000, db.feature_config);
      for (const auto& w : windows) {
        ok += emg::classify(emg::featurize(w, db.feature_config), db).label == label;
        ++total;
      }
    }
    const double acc = static_cast<double>(ok) / static_cast<double>(total);
    worst = std::min(worst, acc);
    s << emg::to_string(label) << "=" << acc << " ";
    check(acc >= 0.95, std::string(emg::to_string(label)) + " accuracy " + std::to_string(acc));
  }
  return s.str() + "(n per gesture from 5 fresh seeds)";
}

std::string persistence() {
  const auto dir = scratch("persist");
  gen::Gen g(9);
  for (int c = 0; c < 100; ++c) {
    const auto db = gen::any_database(g, gen::any_feature_config(g), 1);
    const auto path = dir / ("db" + std::to_string(c) + ".json");
    store::save_db(db, path);
    check(store::load_db(path) == db, "db round trip " + std::to_string(c));
  }
  for (int c = 0; c < 100; ++c) {
    const auto log = gen::any_log(g);
    const auto path = store::session_log_path(dir, "log" + std::to_string(c));
    store::save_log(log, path);
    check(store::load_log(path) == log, "log round trip " + std::to_string(c));
  }
  const auto plan = session::ExercisePlan::default_plan();
  int sessions = 0;
  for (bool inject : {false, true}) {
    sim::ScriptOptions so;
    so.inject_wrong_first_rep = inject;
    service::LockstepOptions lo;
    lo.data_dir = dir;
    lo.session_id = inject ? "injected" : "perfect";
    const auto r = service::run_lockstep(sim::make_session_script(plan, so), sim::EmgSynthModel::default_model(13),
                                         calibrated_db(), plan, lo);
    const auto persisted = store::load_log(store::session_log_path(dir, lo.session_id));
    check(persisted.completed, "log not completed");
    check(persisted.events == service::feedback_events(r.events), "stream differs from log " + lo.session_id);
    ++sessions;
  }
  return "100 db + 100 log file round trips; stream == log for " + std::to_string(sessions) + " completed sessions";
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<std::string()>> criteria[] = {
      {"codec-round-trip", codec_round_trip},
      {"frame-split-invariance", frame_split_invariance},
      {"feature-properties", feature_properties},
      {"classifier-oracle", classifier_oracle},
      {"end-to-end-default-plan", end_to_end_perfect},
      {"error-path-conformance", error_path},
      {"sync-gating", sync_gating},
      {"recognition-self-consistency", recognition},
      {"persistence", persistence},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    std::string verdict, detail;
    try {
      detail = run();
      verdict = "PASS";
    } catch (const Fail& f) {
      verdict = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    failures += verdict == "FAIL";
    std::printf("%s %s: %s [%.2f s]\n", verdict.c_str(), name, detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("rehab_accept_" + std::to_string(::getpid())));
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
