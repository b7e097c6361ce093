// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "rehab/emg/classifier.hpp"
#include "rehab/protocol/codec.hpp"
#include "rehab/protocol/framing.hpp"
#include "rehab/service/harness.hpp"
#include "rehab/service/pipeline.hpp"

using namespace rehab;

namespace {

const store::TemplateDatabase& db() {
  static const auto d = service::calibrate_from_simulator(sim::EmgSynthModel::default_model(100),
                                                          emg::kTemplateLabels, 2000);
  return d;
}

std::vector<emg::EmgWindow> windows() {
  return service::simulate_gesture_windows(sim::EmgSynthModel::default_model(3), emg::GestureLabel::Fist, 2000,
                                           db().feature_config);
}

}  // namespace

static void BM_Featurize(benchmark::State& state) {
  const auto ws = windows();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(emg::featurize(ws[i++ % ws.size()], db().feature_config));
  }
}
BENCHMARK(BM_Featurize);

static void BM_FeaturizeAndClassify(benchmark::State& state) {
  const auto ws = windows();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto fv = emg::featurize(ws[i++ % ws.size()], db().feature_config);
    benchmark::DoNotOptimize(emg::classify(fv, db()));
  }
}
BENCHMARK(BM_FeaturizeAndClassify);

static void BM_EncodeDecodeCommand(benchmark::State& state) {
  const proto::Command cmd = proto::SetMode{proto::emg_mode::kRaw, proto::imu_mode::kData, 0};
  for (auto _ : state) benchmark::DoNotOptimize(proto::decode_command(proto::encode_command(cmd)));
}
BENCHMARK(BM_EncodeDecodeCommand);

static void BM_DecodeEmgPacket(benchmark::State& state) {
  const auto bytes = proto::encode_emg_packet({});
  for (auto _ : state) benchmark::DoNotOptimize(proto::decode_emg_packet(bytes));
}
BENCHMARK(BM_DecodeEmgPacket);

static void BM_FrameReader(benchmark::State& state) {
  sim::GestureScript s;
  s.entries.push_back({emg::GestureLabel::Fist, 0, 1000});
  s.total_ms = 1000;
  sim::DeviceSimulator dev(s, sim::EmgSynthModel::default_model(1),
                           {proto::emg_mode::kRaw, proto::imu_mode::kData, 0});
  const auto stream = dev.advance_to(dev.end_us());
  for (auto _ : state) {
    proto::FrameReader r;
    benchmark::DoNotOptimize(r.feed(stream));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * stream.size()));
}
BENCHMARK(BM_FrameReader);

// Host cost per notification packet while a session is running: framing, decode, windowing,
// classification and the engine.
static void BM_PipelinePerPacket(benchmark::State& state) {
  const auto plan = session::ExercisePlan::default_plan();
  const auto script = sim::make_session_script(plan);
  sim::DeviceSimulator dev(script, sim::EmgSynthModel::default_model(7));
  dev.receive(proto::frame_write(proto::Attribute::Command,
                                 proto::encode_command(proto::SetMode{proto::emg_mode::kRaw, proto::imu_mode::kNone, 0})),
              0);
  std::vector<proto::Bytes> packets;
  for (std::int64_t t = 0; t < dev.end_us(); t += sim::kEmgPacketIntervalUs) packets.push_back(dev.advance_to(t));

  std::size_t i = 0;
  std::unique_ptr<service::Pipeline> p;
  for (auto _ : state) {
    if (i % packets.size() == 0) {
      state.PauseTiming();
      p = std::make_unique<service::Pipeline>(service::PipelineOptions{}, [](auto, auto&, auto&) {});
      p->set_database(db());
      p->start_session(plan, "bench");
      (void)p->on_connected();
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(p->on_bytes(packets[i++ % packets.size()]));
  }
}
BENCHMARK(BM_PipelinePerPacket);
BENCHMARK_MAIN();
