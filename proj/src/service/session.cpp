#include "service/session.hpp"

#include <cmath>

namespace trajedit::service {

using nlohmann::json;

void Subscription::push(std::string line) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    lines_.push_back(std::move(line));
  }
  cv_.notify_one();
}

std::optional<std::string> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !lines_.empty(); });
  if (lines_.empty()) return std::nullopt;
  std::string out = std::move(lines_.front());
  lines_.pop_front();
  return out;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

FrameSnapshot snapshot_of(const World& world) {
  FrameSnapshot snap;
  snap.frame = world.frame;
  snap.t = world.time();
  snap.vehicles.reserve(world.vehicles.size());
  for (const auto& v : world.vehicles) {
    snap.vehicles.push_back({v.id, v.path_id, v.position.x(), v.position.y(), v.heading, v.pose.s, v.pose.d, v.vs()});
  }
  return snap;
}

json to_json(const FrameSnapshot& snap) {
  json vs = json::array();
  for (const auto& v : snap.vehicles) {
    vs.push_back({{"id", v.id},
                  {"path", v.path_id},
                  {"x", v.x},
                  {"y", v.y},
                  {"theta", v.theta},
                  {"s", v.s},
                  {"d", v.d},
                  {"vs", v.vs}});
  }
  return {{"frame", snap.frame}, {"t", snap.t}, {"vehicles", vs}};
}

void SessionState::record_frame() {
  FrameSnapshot snap = snapshot_of(world);
  history.push_back(snap);
  while (history.size() > history_capacity) history.pop_front();
  pending_batch.push_back(std::move(snap));
  if (pending_batch.size() >= batch_frames) flush_batch();
}

void SessionState::flush_batch() {
  if (pending_batch.empty()) return;
  json frames = json::array();
  for (const auto& s : pending_batch) frames.push_back(to_json(s));
  pending_batch.clear();
  publish({{"type", "frames"}, {"frames", frames}});
}

void SessionState::publish(const json& message) {
  const std::string line = message.dump() + "\n";
  std::erase_if(subscribers, [](const auto& s) { return s->closed(); });
  for (const auto& s : subscribers) s->push(line);
}

void SessionState::advance(long frames) {
  for (long i = 0; i < frames; ++i) {
    step(world);
    record_frame();
  }
  flush_batch();
}

Session::Session(std::string id, std::string scenario, World world, SessionOptions opts)
    : id_(std::move(id)), scenario_(std::move(scenario)) {
  state_.world = std::move(world);
  state_.history_capacity = std::max<std::size_t>(1, opts.history_capacity);
  state_.batch_frames = std::max<std::size_t>(1, opts.batch_frames);
  state_.history.push_back(snapshot_of(state_.world));
  thread_ = std::thread([this] { loop(); });
}

Session::~Session() { stop(); }

void Session::post(std::function<void(SessionState&)> fn) {
  {
    std::lock_guard lock(mu_);
    if (!stopping_) {
      queue_.push_back(std::move(fn));
      fn = nullptr;
    }
  }
  // A stopped session drops the closure here, breaking any waiting call().
  if (fn) {
    fn = nullptr;
    return;
  }
  cv_.notify_one();
}

std::shared_ptr<Subscription> Session::subscribe() {
  auto sub = std::make_shared<Subscription>();
  post([sub](SessionState& st) { st.subscribers.push_back(sub); });
  return sub;
}

void Session::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) {
      if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
      return;
    }
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void Session::loop() {
  using clock = std::chrono::steady_clock;
  auto next_frame = clock::now();
  for (;;) {
    std::deque<std::function<void(SessionState&)>> batch;
    {
      std::unique_lock lock(mu_);
      if (state_.running) {
        cv_.wait_until(lock, next_frame, [&] { return stopping_ || !queue_.empty(); });
      } else {
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      }
      if (stopping_) break;
      batch.swap(queue_);
    }
    for (auto& fn : batch) {
      try {
        fn(state_);
      } catch (...) {
        // Posted closures report their own failures; keep the session alive.
      }
    }

    if (state_.running) {
      const auto now = clock::now();
      if (now >= next_frame) {
        step(state_.world);
        state_.record_frame();
        const double period = state_.world.dt / std::max(1e-6, state_.run_speed);
        next_frame = now + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period));
      }
    } else {
      state_.flush_batch();
      next_frame = clock::now();
    }
  }
  state_.flush_batch();
  for (auto& s : state_.subscribers) s->close();
  std::lock_guard lock(mu_);
  queue_.clear();
}

}  // namespace trajedit::service
