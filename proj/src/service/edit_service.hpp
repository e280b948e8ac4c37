#pragma once

#include "core/keyframe_edit.hpp"
#include "service/session.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace trajedit::service {

struct Response {
  int status = 200;
  nlohmann::json body;
};

struct ServiceConfig {
  std::string scenario_dir;
  SessionOptions session;
  double dt = 0.01;
};

enum class JobStatus { kPending, kMet, kUnmet, kFailed };
const char* job_status_name(JobStatus s);

struct Job {
  std::string id;
  std::string session_id;
  VehicleId vehicle = 0;
  JobStatus status = JobStatus::kPending;
  nlohmann::json result;
};

// Transport-neutral request handlers; mount() binds them to HTTP routes.
// Bodies and responses are JSON; every error response is {"error": msg}.
class EditService {
 public:
  explicit EditService(ServiceConfig cfg);
  ~EditService();
  EditService(const EditService&) = delete;
  EditService& operator=(const EditService&) = delete;

  Response create_session(const nlohmann::json& body);
  Response get_state(const std::string& session_id, std::optional<long> frame);
  Response get_scene(const std::string& session_id);
  Response advance(const std::string& session_id, const nlohmann::json& body);
  Response plan_path(const std::string& session_id, const nlohmann::json& body);
  Response submit_keyframes(const std::string& session_id, const nlohmann::json& body);
  Response get_job(const std::string& job_id);
  Response get_trajectories(const std::string& session_id, VehicleId vehicle);

  std::shared_ptr<Subscription> subscribe(const std::string& session_id);

  // Blocks until the job leaves the pending state or the timeout passes.
  bool wait_job(const std::string& job_id, std::chrono::milliseconds timeout);

  // Stops sessions, closes streams and joins job workers.
  void shutdown();

  // Async-signal-safe: makes open streams end at their next poll.
  void request_stop() { stop_requested_.store(true); }
  bool stop_requested() const { return stop_requested_.load(); }

 private:
  std::shared_ptr<Session> session(const std::string& id);
  std::optional<std::string> scenario_path(const std::string& name) const;
  void finish_job(const std::string& job_id, JobStatus status, nlohmann::json result);

  ServiceConfig cfg_;
  std::mutex mu_;
  std::condition_variable job_cv_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, Scenario> scenarios_;
  std::map<std::string, Job> jobs_;
  std::vector<std::thread> workers_;
  long next_session_ = 1;
  long next_job_ = 1;
  bool shut_down_ = false;
  std::atomic<bool> stop_requested_{false};
};

// Routes: POST /sessions, GET /sessions/{id}/state[?frame=n],
// GET /sessions/{id}/scene, POST /sessions/{id}/advance,
// POST /sessions/{id}/paths, POST /sessions/{id}/keyframes,
// GET /sessions/{id}/trajectories?vehicle=n, GET /jobs/{id},
// GET /sessions/{id}/stream (chunked NDJSON).
void mount(httplib::Server& server, EditService& service);

}  // namespace trajedit::service
