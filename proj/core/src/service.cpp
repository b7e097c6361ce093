// SPDX-License-Identifier: Apache-2.0
#include "rehab/service/service.hpp"

#include <httplib.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <future>
#include <iostream>

#include "rehab/error.hpp"
#include "rehab/sim/clock.hpp"
#include "rehab/sim/script.hpp"
#include "rehab/sim/simulator.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::service {

namespace {

using nlohmann::json;
using namespace std::chrono_literals;

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Conflict:
      return 409;
    case ErrorCode::BadRequest:
    case ErrorCode::EmptyPlan:
    case ErrorCode::InvalidExercise:
    case ErrorCode::BadLabel:
    case ErrorCode::InvalidArgument:
      return 400;
    default:
      return 500;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const Error& e) {
  reply(res, http_status(e.code()), json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
}

std::uint64_t parse_seq(const std::string& text) {
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "bad event id: " + text);
  }
}

}  // namespace

struct Service::Http {
  httplib::Server server;
};

Service::Service(ServiceConfig config, TransportFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)), http_(std::make_unique<Http>()) {
  default_plan_ = session::ExercisePlan::default_plan();
  if (!config_.plan_path.empty()) {
    try {
      default_plan_ = session::load_plan(config_.plan_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::StartupFailure, "plan " + config_.plan_path.string() + ": " + e.what());
    }
  }

  std::optional<store::TemplateDatabase> db;
  if (!config_.db_path.empty() && std::filesystem::exists(config_.db_path)) {
    try {
      db = store::load_db(config_.db_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::StartupFailure, "database " + config_.db_path.string() + ": " + e.what());
    }
  } else if (!config_.allow_missing_db) {
    throw Error(ErrorCode::StartupFailure, "database not found: " + config_.db_path.string());
  }

  PipelineOptions popts;
  popts.reject_threshold = config_.reject_threshold;
  popts.data_dir = config_.data_dir;
  popts.db_path = config_.db_path;
  pipeline_ = std::make_unique<Pipeline>(
      popts, [this](std::int64_t t, const std::string& kind, const json& detail) {
        broadcaster_.publish(t, kind, detail);
      });
  if (db) {
    // Partial databases are fine here; session start checks readiness.
    try {
      pipeline_->set_database(std::move(*db));
    } catch (const Error& e) {
      throw Error(ErrorCode::StartupFailure, e.what());
    }
  }

  if (!factory_) {
    if (config_.transport == "sim") {
      factory_ = [this] { return make_sim_transport(); };
    } else if (config_.transport.rfind("tcp:", 0) == 0) {
      sim::Endpoint ep;
      try {
        ep = sim::parse_endpoint(config_.transport.substr(4));
      } catch (const Error& e) {
        throw Error(ErrorCode::StartupFailure, e.what());
      }
      factory_ = [ep] { return sim::tcp_connect(ep); };
    } else {
      throw Error(ErrorCode::StartupFailure, "unknown transport: " + config_.transport);
    }
  }
  if (config_.transport == "sim") {
    // Fail early on a bad clock or script rather than inside the device thread.
    try {
      (void)sim::make_clock(config_.clock);
      if (!config_.script_path.empty()) (void)sim::load_script(config_.script_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::StartupFailure, e.what());
    }
  }
}

Service::~Service() { stop(); }

std::unique_ptr<sim::Transport> Service::make_sim_transport() {
  auto [host, device] = sim::make_pipe();
  sim::GestureScript script = config_.script_path.empty() ? sim::make_session_script(default_plan_)
                                                          : sim::load_script(config_.script_path);
  std::shared_ptr<sim::Transport> dev = std::move(device);
  auto model = sim::EmgSynthModel::default_model(config_.seed);
  auto clock_spec = config_.clock;
  std::lock_guard lock(sim_mu_);
  sim_threads_.emplace_back([dev, script = std::move(script), model, clock_spec] {
    auto clock = sim::make_clock(clock_spec);
    sim::RunOptions opts;
    opts.linger_until_closed = true;
    try {
      sim::run_script(script, model, *dev, *clock, opts);
    } catch (const Error&) {
      // Link dropped; the reader reconnects with a fresh run.
    }
    dev->close();
  });
  return std::move(host);
}

void Service::post(Task task) {
  {
    std::lock_guard lock(task_mu_);
    tasks_.push_back(std::move(task));
  }
  task_cv_.notify_one();
}

template <class R>
R Service::call(std::function<R(Pipeline&)> fn) {
  auto promise = std::make_shared<std::promise<R>>();
  auto future = promise->get_future();
  if (!engine_thread_.joinable() || engine_stop_) return fn(*pipeline_);
  post([fn = std::move(fn), promise](Pipeline& p) {
    try {
      promise->set_value(fn(p));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  return future.get();
}

void Service::engine_loop() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(task_mu_);
      task_cv_.wait(lock, [&] { return !tasks_.empty() || engine_stop_; });
      if (tasks_.empty()) return;
      task = std::move(tasks_.front());
      tasks_.pop_front();
    }
    try {
      task(*pipeline_);
    } catch (const std::exception& e) {
      std::cerr << "rehab: engine task failed: " << e.what() << "\n";
    }
  }
}

void Service::send_to_device(const proto::Bytes& bytes) {
  if (bytes.empty()) return;
  std::shared_ptr<sim::Transport> link;
  {
    std::lock_guard lock(link_mu_);
    link = link_;
  }
  if (!link) return;
  try {
    link->write(bytes);
  } catch (const Error&) {
    // The reader notices the closed link and reconnects.
  }
}

void Service::reader_loop() {
  auto backoff = 100ms;
  auto wait = [this](std::chrono::milliseconds d) {
    const auto until = std::chrono::steady_clock::now() + d;
    while (running_ && std::chrono::steady_clock::now() < until) std::this_thread::sleep_for(10ms);
  };
  while (running_) {
    std::shared_ptr<sim::Transport> link;
    try {
      link = factory_();
    } catch (const std::exception&) {
      wait(backoff);
      backoff = std::min(backoff * 2, std::chrono::milliseconds(2000));
      continue;
    }
    backoff = 100ms;
    {
      std::lock_guard lock(link_mu_);
      link_ = link;
    }
    ++connections_;
    post([this](Pipeline& p) { send_to_device(p.on_connected()); });
    try {
      while (running_) {
        auto bytes = link->read(50ms);
        if (bytes.empty()) continue;
        post([this, bytes = std::move(bytes)](Pipeline& p) { send_to_device(p.on_bytes(bytes)); });
      }
    } catch (const Error&) {
    }
    {
      std::lock_guard lock(link_mu_);
      link_.reset();
    }
    link->close();
    post([](Pipeline& p) { p.on_disconnected(); });
    if (running_) wait(backoff);
  }
}

void Service::drop_transport() {
  std::shared_ptr<sim::Transport> link;
  {
    std::lock_guard lock(link_mu_);
    link = link_;
  }
  if (link) link->close();
}

json Service::get_state() {
  return call<json>([](Pipeline& p) { return p.state_json(); });
}

json Service::get_plan() {
  return call<json>([this](Pipeline& p) {
    if (p.engine()) return session::plan_to_json(p.engine()->plan());
    return session::plan_to_json(default_plan_);
  });
}

json Service::start_session(const std::optional<json>& plan_body) {
  session::ExercisePlan plan = default_plan_;
  if (plan_body && !plan_body->is_null()) plan = session::plan_from_json(*plan_body);
  plan.validate();
  return call<json>([this, plan = std::move(plan)](Pipeline& p) {
    const std::string id = "s" + std::to_string(std::time(nullptr)) + "-" + std::to_string(++session_counter_);
    p.start_session(plan, id, iso_now());
    return json{{"session_id", id}, {"state", p.state_json()}};
  });
}

json Service::abort_session() {
  return call<json>([](Pipeline& p) {
    p.abort_session();
    return p.state_json();
  });
}

json Service::calibration(emg::GestureLabel label, bool start) {
  return call<json>([label, start](Pipeline& p) {
    if (start) {
      p.start_calibration(label);
      return json{{"label", std::string(emg::to_string(label))}, {"recording", true}};
    }
    return p.stop_calibration(label);
  });
}

void Service::setup_routes() {
  auto& svr = http_->server;
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        reply_error(res, e);
      } catch (const json::exception& e) {
        reply(res, 400, json{{"error", "bad_request"}, {"message", e.what()}});
      }
    };
  };

  svr.Get("/api/state", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, get_state());
          }));
  svr.Get("/api/plan", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, get_plan());
          }));
  svr.Post("/api/session/start", guarded([this](const httplib::Request& req, httplib::Response& res) {
             std::optional<json> body;
             if (!req.body.empty()) {
               try {
                 body = json::parse(req.body);
               } catch (const json::parse_error& e) {
                 throw Error(ErrorCode::BadRequest, e.what());
               }
             }
             reply(res, 200, start_session(body));
           }));
  svr.Post("/api/session/abort", guarded([this](const httplib::Request&, httplib::Response& res) {
             reply(res, 200, abort_session());
           }));
  svr.Post(R"(/api/calibration/([A-Za-z_]+)/(start|stop))",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto label = emg::parse_gesture(req.matches[1].str());
             if (!label) throw Error(ErrorCode::BadLabel, "unknown gesture: " + req.matches[1].str());
             reply(res, 200, calibration(*label, req.matches[2].str() == "start"));
           }));
  svr.Get("/api/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t last = 0;
            if (req.has_header("Last-Event-ID")) {
              last = parse_seq(req.get_header_value("Last-Event-ID"));
            } else if (req.has_param("last_seq")) {
              last = parse_seq(req.get_param_value("last_seq"));
            }
            // stream=0: one-shot JSON array of the backlog, for polling clients.
            if (req.has_param("stream") && req.get_param_value("stream") == "0") {
              json out = json::array();
              for (const auto& e : broadcaster_.since(last)) out.push_back(wire_to_json(e));
              reply(res, 200, out);
              return;
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [this, last](std::size_t, httplib::DataSink& sink) mutable {
                  if (!running_ || broadcaster_.closed()) {
                    sink.done();
                    return true;
                  }
                  auto events = broadcaster_.wait_since(last, 500ms);
                  if (events.empty()) {
                    static const std::string keepalive = ": keepalive\n\n";
                    return sink.write(keepalive.data(), keepalive.size());
                  }
                  for (const auto& e : events) {
                    const auto record = to_sse(e);
                    if (!sink.write(record.data(), record.size())) return false;
                    last = e.seq;
                  }
                  return true;
                });
          }));
}

void Service::start() {
  if (running_) return;
  sim::Endpoint ep;
  try {
    ep = sim::parse_endpoint(config_.listen);
  } catch (const Error& e) {
    throw Error(ErrorCode::StartupFailure, e.what());
  }
  setup_routes();
  auto& svr = http_->server;
  int port = ep.port;
  if (ep.port == 0) {
    port = svr.bind_to_any_port(ep.host);
  } else if (!svr.bind_to_port(ep.host, ep.port)) {
    port = -1;
  }
  if (port <= 0) throw Error(ErrorCode::StartupFailure, "cannot listen on " + config_.listen);
  http_port_ = static_cast<std::uint16_t>(port);

  running_ = true;
  engine_stop_ = false;
  engine_thread_ = std::thread([this] { engine_loop(); });
  // Before the device link comes up, so no samples precede the session.
  if (config_.autostart) {
    try {
      start_session(std::nullopt);
    } catch (const Error& e) {
      std::cerr << "rehab: autostart failed: " << e.what() << "\n";
    }
  }
  reader_thread_ = std::thread([this] { reader_loop(); });
  http_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
}

void Service::stop() {
  if (!running_.exchange(false)) return;
  broadcaster_.close();
  http_->server.stop();
  drop_transport();
  task_cv_.notify_all();
  if (reader_thread_.joinable()) reader_thread_.join();
  if (http_thread_.joinable()) http_thread_.join();
  engine_stop_ = true;
  task_cv_.notify_all();
  if (engine_thread_.joinable()) engine_thread_.join();
  std::vector<std::thread> sims;
  {
    std::lock_guard lock(sim_mu_);
    sims.swap(sim_threads_);
  }
  for (auto& t : sims) t.join();
}

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int run_service(const ServiceConfig& config) {
  try {
    Service service(config);
    service.start();
    std::cerr << "rehab: listening on port " << service.http_port() << "\n";
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(100ms);
    service.stop();
    return 0;
  } catch (const Error& e) {
    std::cerr << "rehab: " << e.what() << "\n";
    return e.code() == ErrorCode::StartupFailure ? 2 : 1;
  }
}

}  // namespace rehab::service
