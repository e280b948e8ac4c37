#pragma once

#include "core/world.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace trajedit::service {

// One stream client: a queue of NDJSON lines fed by the session thread.
class Subscription {
 public:
  void push(std::string line);
  // Waits up to `timeout` for the next line; nullopt on timeout or close.
  std::optional<std::string> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  bool closed_ = false;
};

struct VehicleSnapshot {
  VehicleId id = 0;
  PathId path_id = -1;
  double x = 0.0, y = 0.0, theta = 0.0;
  double s = 0.0, d = 0.0, vs = 0.0;
};

// Immutable per-frame view of the world.
struct FrameSnapshot {
  long frame = 0;
  double t = 0.0;
  std::vector<VehicleSnapshot> vehicles;
};

FrameSnapshot snapshot_of(const World& world);
nlohmann::json to_json(const FrameSnapshot& snap);

// A vehicle's trajectory before and after an applied edit.
struct TrajectoryPair {
  std::string job_id;
  nlohmann::json original;  // [[t, x, y], ...]
  nlohmann::json edited;
};

// Everything the session thread owns. Only touched from that thread.
struct SessionState {
  World world;
  std::deque<FrameSnapshot> history;
  std::size_t history_capacity = 6000;
  std::size_t batch_frames = 5;
  std::vector<FrameSnapshot> pending_batch;
  nlohmann::json edit_log = nlohmann::json::array();
  std::set<VehicleId> busy;  // vehicles with an optimization job in flight
  std::map<VehicleId, std::vector<TrajectoryPair>> trajectories;
  bool running = false;
  double run_speed = 1.0;  // simulated seconds per wall-clock second
  std::vector<std::shared_ptr<Subscription>> subscribers;

  void record_frame();
  void flush_batch();
  void publish(const nlohmann::json& message);
  void advance(long frames);
};

struct SessionOptions {
  std::size_t history_capacity = 6000;
  std::size_t batch_frames = 5;
};

// Owns a world on a dedicated thread. Other threads interact through
// call() / post(), which run closures on that thread between frames.
class Session {
 public:
  Session(std::string id, std::string scenario, World world, SessionOptions opts = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const std::string& scenario() const { return scenario_; }

  void post(std::function<void(SessionState&)> fn);

  // Runs fn on the session thread and waits for its result; exceptions
  // propagate to the caller.
  template <class F>
  auto call(F&& fn) -> std::invoke_result_t<F&, SessionState&> {
    using R = std::invoke_result_t<F&, SessionState&>;
    auto task = std::make_shared<std::packaged_task<R(SessionState&)>>(std::forward<F>(fn));
    std::future<R> fut = task->get_future();
    post([task](SessionState& st) { (*task)(st); });
    return fut.get();
  }

  std::shared_ptr<Subscription> subscribe();
  void stop();

 private:
  void loop();

  std::string id_;
  std::string scenario_;
  SessionState state_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void(SessionState&)>> queue_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace trajedit::service
