// SPDX-License-Identifier: Apache-2.0
// rehab: serve | calibrate | simulate
#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

#include "rehab/error.hpp"
#include "rehab/service/pipeline.hpp"
#include "rehab/service/service.hpp"
#include "rehab/sim/clock.hpp"
#include "rehab/sim/script.hpp"
#include "rehab/sim/simulator.hpp"
#include "rehab/sim/transport.hpp"
#include "rehab/store/templates.hpp"

using namespace rehab;

namespace {

struct CalibrateArgs {
  std::string labels;
  std::string db;
  std::string transport = "sim";
  double seconds = 5.0;
  std::uint64_t seed = 1;
  int min_windows = store::kDefaultMinCalibrationWindows;
};

struct SimulateArgs {
  std::string script;
  std::uint64_t seed = 1;
  std::string listen = "127.0.0.1:9000";
  std::string clock = "real";
  bool once = false;
};

std::vector<emg::GestureLabel> parse_labels(const std::string& text) {
  std::vector<emg::GestureLabel> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto label = emg::parse_gesture(item);
    if (!label || *label == emg::GestureLabel::Unknown) {
      throw Error(ErrorCode::BadLabel, "unknown gesture: " + item);
    }
    out.push_back(*label);
  }
  if (out.empty()) throw Error(ErrorCode::BadLabel, "no gesture given");
  return out;
}

// Feeds `seconds` of the simulated gesture through the pipeline on a virtual clock.
void record_simulated(service::Pipeline& p, emg::GestureLabel label, double seconds, std::uint64_t seed) {
  sim::GestureScript script;
  const auto ms = static_cast<std::int64_t>(seconds * 1000.0);
  script.entries.push_back({label, 0, ms});
  script.total_ms = ms;
  sim::DeviceSimulator device(script, sim::EmgSynthModel::default_model(seed));
  device.receive(p.on_connected(), 0);
  p.on_bytes(device.advance_to(device.end_us()));
  p.on_disconnected();
}

void record_live(service::Pipeline& p, sim::Transport& link, double seconds) {
  link.write(p.on_connected());
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (std::chrono::steady_clock::now() < until) {
    auto bytes = link.read(std::chrono::milliseconds(50));
    if (!bytes.empty()) {
      auto out = p.on_bytes(bytes);
      if (!out.empty()) link.write(out);
    }
  }
  p.on_disconnected();
}

int run_calibrate(const CalibrateArgs& args) {
  const auto labels = parse_labels(args.labels);
  service::PipelineOptions opts;
  opts.db_path = args.db;
  opts.min_calibration_windows = args.min_windows;
  service::Pipeline pipeline(opts, [](std::int64_t, const std::string&, const nlohmann::json&) {});
  if (std::filesystem::exists(args.db)) pipeline.set_database(store::load_db(args.db));

  std::unique_ptr<sim::Transport> link;
  if (args.transport.rfind("tcp:", 0) == 0) {
    link = sim::tcp_connect(sim::parse_endpoint(args.transport.substr(4)));
  } else if (args.transport != "sim") {
    throw Error(ErrorCode::InvalidArgument, "unknown transport: " + args.transport);
  }

  int failures = 0;
  std::uint64_t seed = args.seed;
  for (auto label : labels) {
    pipeline.start_calibration(label);
    if (link) {
      std::cerr << "hold " << emg::to_string(label) << " for " << args.seconds << " s\n";
      record_live(pipeline, *link, args.seconds);
    } else {
      record_simulated(pipeline, label, args.seconds, seed++);
    }
    const auto result = pipeline.stop_calibration(label);
    std::cout << result.dump() << "\n";
    if (!result.at("template_built").get<bool>()) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int run_simulate(const SimulateArgs& args) {
  const auto script = sim::load_script(args.script);
  const auto model = sim::EmgSynthModel::default_model(args.seed);
  sim::TcpListener listener(sim::parse_endpoint(args.listen));
  std::cerr << "simulate: listening on port " << listener.port() << "\n";
  for (;;) {
    std::unique_ptr<sim::Transport> conn;
    while (!conn) conn = listener.accept(std::chrono::milliseconds(500));
    auto clock = sim::make_clock(args.clock);
    sim::RunOptions opts;
    opts.linger_until_closed = true;
    try {
      const auto status = sim::run_script(script, model, *conn, *clock, opts);
      std::cerr << "simulate: script done, " << status.emg_packets << " emg packets, "
                << status.vibrations.size() << " vibrations\n";
    } catch (const sim::SimulationAborted& e) {
      std::cerr << "simulate: host disconnected after " << e.status().emg_packets << " emg packets\n";
    }
    conn->close();
    if (args.once) return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMG-guided hand rehabilitation service"};
  app.require_subcommand(1);

  service::ServiceConfig serve;
  std::string db, plan, script, data_dir = ".";
  auto* s = app.add_subcommand("serve", "Run the session service");
  s->add_option("--transport", serve.transport, "sim | tcp:<host>:<port>")->capture_default_str();
  s->add_option("--db", db, "Template database")->required();
  s->add_option("--plan", plan, "Default exercise plan (JSON)");
  s->add_option("--listen", serve.listen, "HTTP listen address")->capture_default_str();
  s->add_option("--seed", serve.seed, "Simulator seed")->capture_default_str();
  s->add_option("--clock", serve.clock, "real | x<factor> | virtual")->capture_default_str();
  s->add_option("--script", script, "Simulator gesture script (JSON)");
  s->add_option("--data-dir", data_dir, "Session log directory root")->capture_default_str();
  s->add_option("--reject-threshold", serve.reject_threshold)->capture_default_str();
  s->add_flag("--allow-missing-db", serve.allow_missing_db, "Start without a database");
  s->add_flag("--autostart", serve.autostart, "Start a session with the default plan");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Record gesture templates into a database");
  c->add_option("--label", cal.labels, "Gesture or comma-separated gestures")->required();
  c->add_option("--db", cal.db, "Database to create or update")->required();
  c->add_option("--transport", cal.transport, "sim | tcp:<host>:<port>")->capture_default_str();
  c->add_option("--seconds", cal.seconds, "Hold duration per gesture")->capture_default_str();
  c->add_option("--seed", cal.seed, "Simulator seed")->capture_default_str();
  c->add_option("--min-windows", cal.min_windows)->capture_default_str();

  SimulateArgs simargs;
  auto* m = app.add_subcommand("simulate", "Serve a simulated armband over TCP");
  m->add_option("--script", simargs.script, "Gesture script (JSON)")->required();
  m->add_option("--seed", simargs.seed)->capture_default_str();
  m->add_option("--listen", simargs.listen)->capture_default_str();
  m->add_option("--clock", simargs.clock)->capture_default_str();
  m->add_flag("--once", simargs.once, "Exit after the first connection");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) {
      serve.db_path = db;
      serve.plan_path = plan;
      serve.script_path = script;
      serve.data_dir = data_dir;
      return service::run_service(serve);
    }
    if (*c) return run_calibrate(cal);
    return run_simulate(simargs);
  } catch (const Error& e) {
    std::cerr << "rehab: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
}
