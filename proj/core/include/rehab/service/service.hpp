// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rehab/service/broadcaster.hpp"
#include "rehab/service/pipeline.hpp"
#include "rehab/session/plan.hpp"
#include "rehab/sim/transport.hpp"

namespace rehab::service {

struct ServiceConfig {
  /// "sim" or "tcp:<host>:<port>".
  std::string transport = "sim";
  std::filesystem::path db_path;
  /// Default plan for POST /api/session/start without a body; empty uses the built-in plan.
  std::filesystem::path plan_path;
  std::string listen = "127.0.0.1:8080";
  std::uint64_t seed = 1;
  /// Simulator pacing: "real", "x<factor>" or "virtual".
  std::string clock = "real";
  /// Simulator timeline; empty generates a correct run of the default plan.
  std::filesystem::path script_path;
  std::filesystem::path data_dir = ".";
  double reject_threshold = emg::kDefaultRejectThreshold;
  /// Start without a database (calibration endpoints only until one is built).
  bool allow_missing_db = false;
  /// Start a session with the default plan as soon as the service is up.
  bool autostart = false;
};

/// Produces a connected transport, or throws TransportClosed.
using TransportFactory = std::function<std::unique_ptr<sim::Transport>()>;

/// HTTP routes:
///   GET  /api/state                      snapshot JSON ({"phase":"idle"} without a session)
///   GET  /api/plan                       current default plan
///   POST /api/session/start              optional plan body; 409 when busy or no database
///   POST /api/session/abort              409 when no session
///   GET  /api/events                     text/event-stream; resumes after Last-Event-ID
///                                        (or ?last_seq=n)
///   POST /api/calibration/{label}/start|stop
///
/// Threads: a transport reader, the engine loop (sole owner of the Pipeline), and the
/// HTTP server's workers, which reach the pipeline only through posted tasks.
class Service {
 public:
  /// Loads the database and default plan. Throws StartupFailure.
  explicit Service(ServiceConfig config, TransportFactory factory = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Spawns the threads and binds the HTTP listener. Throws StartupFailure.
  void start();
  void stop();
  bool running() const noexcept { return running_; }

  std::uint16_t http_port() const noexcept { return http_port_; }
  const Broadcaster& events() const noexcept { return broadcaster_; }

  nlohmann::json get_state();
  nlohmann::json get_plan();
  /// Throws Conflict / BadRequest / EmptyPlan / InvalidExercise.
  nlohmann::json start_session(const std::optional<nlohmann::json>& plan_body);
  nlohmann::json abort_session();
  nlohmann::json calibration(emg::GestureLabel label, bool start);

  /// Closes the live device link (fault injection); the reader reconnects with backoff.
  void drop_transport();

  /// Lifetime counters of the device link.
  int connections() const noexcept { return connections_; }

 private:
  using Task = std::function<void(Pipeline&)>;

  void post(Task task);
  template <class R>
  R call(std::function<R(Pipeline&)> fn);
  void engine_loop();
  void reader_loop();
  void send_to_device(const proto::Bytes& bytes);
  std::unique_ptr<sim::Transport> make_sim_transport();
  void setup_routes();

  ServiceConfig config_;
  TransportFactory factory_;
  session::ExercisePlan default_plan_;
  Broadcaster broadcaster_;
  std::unique_ptr<Pipeline> pipeline_;

  std::mutex task_mu_;
  std::condition_variable task_cv_;
  std::deque<Task> tasks_;

  std::mutex link_mu_;
  std::shared_ptr<sim::Transport> link_;

  std::mutex sim_mu_;
  std::vector<std::thread> sim_threads_;

  struct Http;
  std::unique_ptr<Http> http_;
  std::thread engine_thread_;
  std::thread reader_thread_;
  std::thread http_thread_;
  std::atomic<bool> running_{false};
  std::atomic<bool> engine_stop_{false};
  std::atomic<int> connections_{0};
  std::uint16_t http_port_ = 0;
  std::uint64_t session_counter_ = 0;
};

/// Blocks until SIGINT/SIGTERM. Returns a process exit code.
int run_service(const ServiceConfig& config);

}  // namespace rehab::service
