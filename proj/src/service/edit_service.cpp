#include "service/edit_service.hpp"

#include "core/errors.hpp"

#include <httplib.h>

#include <filesystem>

namespace trajedit::service {

namespace fs = std::filesystem;
using nlohmann::json;

const char* job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::kPending: return "pending";
    case JobStatus::kMet: return "met";
    case JobStatus::kUnmet: return "unmet";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

namespace {

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

int status_of(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const json::exception*>(&e)) return 400;
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const RefusedError*>(&e)) return 409;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const PlanningError*>(&e) ||
      dynamic_cast<const SearchError*>(&e) || dynamic_cast<const RangeError*>(&e)) {
    return 422;
  }
  return 500;
}

template <class F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const std::future_error&) {
    return error(410, "session stopped");
  } catch (const std::exception& e) {
    return error(status_of(e), e.what());
  }
}

Vec2 point_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

json polyline_json(const Polyline& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_json(p));
  return out;
}

std::vector<Keyframe> parse_keyframes(const json& body, VehicleId vehicle) {
  if (!body.contains("keyframes") || !body.at("keyframes").is_array() || body.at("keyframes").empty()) {
    throw ParseError("keyframes must be a non-empty list");
  }
  std::vector<Keyframe> out;
  for (const auto& k : body.at("keyframes")) {
    Keyframe kf;
    kf.vehicle = vehicle;
    kf.time = k.at("time").get<double>();
    if (k.contains("point")) kf.point = point_of(k.at("point"));
    if (k.contains("s")) kf.s = k.at("s").get<double>();
    if (k.contains("speed")) kf.speed = k.at("speed").get<double>();
    if (!kf.point && !kf.s) throw ParseError("each keyframe needs point or s");
    out.push_back(kf);
  }
  return out;
}

EditOptions parse_options(const json& body) {
  EditOptions opts;
  if (!body.contains("options")) return opts;
  const json& o = body.at("options");
  opts.lattice.time_step = o.value("dtt", opts.lattice.time_step);
  opts.lattice.v_max = o.value("v_max", opts.lattice.v_max);
  opts.optimizer.v_max = opts.lattice.v_max;
  opts.optimizer.max_iterations = o.value("iterations", opts.optimizer.max_iterations);
  opts.optimizer.patience = o.value("patience", opts.optimizer.patience);
  opts.optimizer.adam.learning_rate = o.value("learning_rate", opts.optimizer.adam.learning_rate);
  opts.tolerance = o.value("tolerance", opts.tolerance);
  const std::string reg = o.value("regularizer", std::string("per_second"));
  if (reg == "per_frame") {
    opts.optimizer.weights.scale = RegularizerScale::kPerFrame;
  } else if (reg != "per_second") {
    throw ParseError("options.regularizer must be per_second or per_frame");
  }
  const std::string init = o.value("init", std::string("coarse"));
  if (init == "average") {
    opts.init = InitMode::kAverageSpeed;
  } else if (init != "coarse") {
    throw ParseError("options.init must be coarse or average");
  }
  return opts;
}

// [[t, x, y], ...] of one vehicle over `frames` steps of a world copy.
json vehicle_track(World world, VehicleId id, long frames) {
  json out = json::array();
  for (long f = 0; f <= frames; ++f) {
    const VehicleState* v = world.find(id);
    if (!v) break;
    out.push_back({world.time(), v->position.x(), v->position.y()});
    if (f < frames) step(world);
  }
  return out;
}

json edit_json(const EditResult& r) {
  json kfs = json::array();
  for (const auto& k : r.reports) {
    kfs.push_back({{"time", k.keyframe.time},
                   {"target", point_json(k.target)},
                   {"reached", point_json(k.reached)},
                   {"error", k.error},
                   {"met", k.met},
                   {"closest_distance", k.closest_distance},
                   {"closest_time", k.closest_time}});
  }
  return {{"vehicle", r.vehicle},
          {"met", r.met},
          {"replanned", r.new_path.has_value()},
          {"path", r.path_id},
          {"iterations", r.optimization.iterations},
          {"best_iteration", r.optimization.best_iteration},
          {"best_loss", r.optimization.best_loss},
          {"expansions", r.expansions},
          {"search_seconds", r.search_seconds},
          {"optimize_seconds", r.optimize_seconds},
          {"keyframes", kfs},
          {"losses", r.optimization.losses}};
}

}  // namespace

EditService::EditService(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

EditService::~EditService() { shutdown(); }

std::shared_ptr<Session> EditService::session(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

std::optional<std::string> EditService::scenario_path(const std::string& name) const {
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
    return std::nullopt;
  }
  for (const fs::path p : {fs::path(cfg_.scenario_dir) / name, fs::path(cfg_.scenario_dir) / (name + ".json")}) {
    if (fs::is_regular_file(p)) return p.string();
  }
  return std::nullopt;
}

Response EditService::create_session(const json& body) {
  return guarded([&]() -> Response {
    const std::string name = body.at("scenario").get<std::string>();
    const auto path = scenario_path(name);
    if (!path) return error(404, "unknown scenario " + name);
    Scenario sc = load_scenario(*path);
    WorldOptions wo;
    wo.dt = body.value("dt", cfg_.dt);
    if (body.contains("seed")) wo.seed = body.at("seed").get<std::uint64_t>();
    if (!(wo.dt > 0.0)) throw ValidationError("dt must be positive");
    World world = make_world(sc, wo);

    std::lock_guard lock(mu_);
    if (shut_down_) return error(503, "service is shutting down");
    const std::string id = "s" + std::to_string(next_session_++);
    sessions_[id] = std::make_shared<Session>(id, name, std::move(world), cfg_.session);
    scenarios_[id] = std::move(sc);
    return {201, {{"session", id}, {"scenario", name}, {"dt", wo.dt}}};
  });
}

Response EditService::get_state(const std::string& session_id, std::optional<long> frame) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    return s->call([&](SessionState& st) -> Response {
      if (!frame) {
        json out = to_json(snapshot_of(st.world));
        out["running"] = st.running;
        out["busy"] = st.busy;
        return {200, out};
      }
      for (const auto& snap : st.history) {
        if (snap.frame == *frame) return {200, to_json(snap)};
      }
      return error(404, "frame " + std::to_string(*frame) + " is not in the history");
    });
  });
}

Response EditService::get_scene(const std::string& session_id) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    Scenario sc;
    {
      std::lock_guard lock(mu_);
      sc = scenarios_.at(session_id);
    }
    json lanes = json::array();
    for (const auto& [id, lane] : sc.network.lanes) {
      lanes.push_back({{"id", id}, {"width", lane.width}, {"centerline", polyline_json(lane.centerline)}});
    }
    json stops = json::array();
    for (const auto& l : sc.stop_lines) {
      stops.push_back({{"id", l.id}, {"point", point_json(l.point)}, {"red_from", l.red_from}, {"red_until", l.red_until}});
    }
    json paths = s->call([](SessionState& st) {
      json out = json::array();
      for (PathId id : st.world.paths.ids()) {
        const PathEntry& e = st.world.paths.entry(id);
        out.push_back({{"id", id},
                       {"user", e.lanes.empty()},
                       {"lane_width", e.lane_width},
                       {"length", e.path.length()},
                       {"points", polyline_json(e.path.sample(1.0))}});
      }
      return out;
    });
    const Bounds& b = sc.network.bounds;
    return {200,
            {{"scenario", s->scenario()},
             {"bounds", {point_json(b.min), point_json(b.max)}},
             {"lanes", lanes},
             {"stop_lines", stops},
             {"paths", paths}}};
  });
}

Response EditService::advance(const std::string& session_id, const json& body) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    if (body.value("pause", false)) {
      return s->call([](SessionState& st) -> Response {
        st.running = false;
        return {200, {{"running", false}, {"frame", st.world.frame}}};
      });
    }
    const bool run = body.value("run", false);
    if (!run && !body.contains("frames")) throw ParseError("advance needs frames, run or pause");
    const long frames = body.value("frames", 0L);
    const double speed = body.value("speed", 1.0);
    if (frames < 0) throw ValidationError("frames must not be negative");
    if (run && !(speed > 0.0)) throw ValidationError("speed must be positive");
    return s->call([&](SessionState& st) -> Response {
      if (!st.busy.empty()) return error(409, "an edit job is pending");
      if (run) {
        st.running = true;
        st.run_speed = speed;
        return {200, {{"running", true}, {"frame", st.world.frame}}};
      }
      st.advance(frames);
      json out = to_json(snapshot_of(st.world));
      out["running"] = st.running;
      return {200, out};
    });
  });
}

Response EditService::plan_path(const std::string& session_id, const json& body) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    PlanRequest req;
    for (const auto& p : body.at("waypoints")) req.waypoints.push_back(point_of(p));
    if (req.waypoints.size() < 2) throw ParseError("at least 2 way-points are required");
    std::optional<VehicleId> vehicle;
    if (body.contains("vehicle")) vehicle = body.at("vehicle").get<VehicleId>();
    return s->call([&](SessionState& st) -> Response {
      if (vehicle) {
        st.world.vehicle(*vehicle);
        if (st.busy.count(*vehicle)) return error(409, "vehicle has an edit job pending");
      }
      const RefPath path = plan_user_path(st.world.grid, req);
      const PathId id = st.world.paths.register_user_path(path);
      if (vehicle) st.world.reroute(*vehicle, id);
      json msg = {{"type", "path"}, {"path", id}, {"points", polyline_json(path.sample(1.0))}};
      if (vehicle) msg["vehicle"] = *vehicle;
      st.publish(msg);
      return {201, {{"path", id}, {"length", path.length()}, {"points", msg["points"]}}};
    });
  });
}

Response EditService::submit_keyframes(const std::string& session_id, const json& body) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    const VehicleId vehicle = body.at("vehicle").get<VehicleId>();
    std::vector<Keyframe> keyframes = parse_keyframes(body, vehicle);
    const EditOptions opts = parse_options(body);

    std::optional<World> snapshot;
    Response refused = s->call([&](SessionState& st) -> Response {
      st.world.vehicle(vehicle);
      if (st.running) return error(409, "pause the session before editing");
      if (st.busy.count(vehicle)) return error(409, "vehicle " + std::to_string(vehicle) + " has an edit job pending");
      st.busy.insert(vehicle);
      snapshot = st.world;
      return {202, {}};
    });
    if (refused.status != 202) return refused;

    std::string job_id;
    {
      std::lock_guard lock(mu_);
      if (shut_down_) return error(503, "service is shutting down");
      job_id = "j" + std::to_string(next_job_++);
      jobs_[job_id] = Job{job_id, session_id, vehicle, JobStatus::kPending, json::object()};
      workers_.emplace_back([this, s, job_id, vehicle, keyframes = std::move(keyframes), opts,
                             world = std::move(*snapshot)]() mutable {
        try {
          EditResult r = edit_vehicle(world, std::move(keyframes), opts);
          const long frames = static_cast<long>(r.optimization.trajectory.frames());
          TrajectoryPair pair{job_id, vehicle_track(world, vehicle, frames), vehicle_track(r.world, vehicle, frames)};
          json result = edit_json(r);
          result["job"] = job_id;
          result["trajectory"] = pair.edited;
          const JobStatus status = r.met ? JobStatus::kMet : JobStatus::kUnmet;
          result["status"] = job_status_name(status);
          s->call([&](SessionState& st) {
            if (st.world.find(vehicle)) apply_edit(st.world, r);
            st.busy.erase(vehicle);
            st.trajectories[vehicle].push_back(std::move(pair));
            st.edit_log.push_back(result);
            json msg = result;
            msg["type"] = "job";
            st.publish(msg);
          });
          finish_job(job_id, status, std::move(result));
        } catch (const std::exception& e) {
          json result = {{"job", job_id}, {"vehicle", vehicle}, {"status", "failed"}, {"error", e.what()}};
          try {
            s->call([&](SessionState& st) {
              st.busy.erase(vehicle);
              json msg = result;
              msg["type"] = "job";
              st.publish(msg);
            });
          } catch (...) {
          }
          finish_job(job_id, JobStatus::kFailed, std::move(result));
        }
      });
    }
    return {202, {{"job", job_id}, {"status", "pending"}, {"vehicle", vehicle}}};
  });
}

void EditService::finish_job(const std::string& job_id, JobStatus status, json result) {
  {
    std::lock_guard lock(mu_);
    Job& j = jobs_.at(job_id);
    j.status = status;
    j.result = std::move(result);
  }
  job_cv_.notify_all();
}

Response EditService::get_job(const std::string& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return error(404, "unknown job " + job_id);
  const Job& j = it->second;
  if (j.status == JobStatus::kPending) {
    return {200, {{"job", j.id}, {"session", j.session_id}, {"vehicle", j.vehicle}, {"status", "pending"}}};
  }
  json out = j.result;
  out["session"] = j.session_id;
  return {200, out};
}

Response EditService::get_trajectories(const std::string& session_id, VehicleId vehicle) {
  return guarded([&]() -> Response {
    auto s = session(session_id);
    return s->call([&](SessionState& st) -> Response {
      auto it = st.trajectories.find(vehicle);
      if (it == st.trajectories.end()) return error(404, "no edits recorded for vehicle " + std::to_string(vehicle));
      json out = json::array();
      for (const auto& p : it->second) {
        out.push_back({{"job", p.job_id}, {"original", p.original}, {"edited", p.edited}});
      }
      return {200, {{"vehicle", vehicle}, {"edits", out}}};
    });
  });
}

std::shared_ptr<Subscription> EditService::subscribe(const std::string& session_id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return nullptr;
    s = it->second;
  }
  return s->subscribe();
}

bool EditService::wait_job(const std::string& job_id, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return job_cv_.wait_for(lock, timeout, [&] {
    auto it = jobs_.find(job_id);
    return it == jobs_.end() || it->second.status != JobStatus::kPending;
  });
}

void EditService::shutdown() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    shut_down_ = true;
    stop_requested_.store(true);
    workers.swap(workers_);
  }
  // Workers finish their edit first, so sessions must still be alive here.
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (auto& [id, s] : sessions) s->stop();
}

void mount(httplib::Server& server, EditService& service) {
  auto body_of = [](const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
  };
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto with_body = [body_of, reply](auto handler) {
    return [body_of, reply, handler](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = body_of(req);
      } catch (const json::exception& e) {
        reply(res, error(400, std::string("body is not valid JSON: ") + e.what()));
        return;
      }
      reply(res, handler(req, body));
    };
  };

  server.Post("/sessions", with_body([&service](const httplib::Request&, const json& body) {
                return service.create_session(body);
              }));
  server.Get(R"(/sessions/([^/]+)/state)", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    std::optional<long> frame;
    if (req.has_param("frame")) {
      try {
        frame = std::stol(req.get_param_value("frame"));
      } catch (const std::exception&) {
        reply(res, error(400, "frame must be an integer"));
        return;
      }
    }
    reply(res, service.get_state(req.matches[1], frame));
  });
  server.Get(R"(/sessions/([^/]+)/scene)", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_scene(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/advance)", with_body([&service](const httplib::Request& req, const json& body) {
                return service.advance(req.matches[1], body);
              }));
  server.Post(R"(/sessions/([^/]+)/paths)", with_body([&service](const httplib::Request& req, const json& body) {
                return service.plan_path(req.matches[1], body);
              }));
  server.Post(R"(/sessions/([^/]+)/keyframes)", with_body([&service](const httplib::Request& req, const json& body) {
                return service.submit_keyframes(req.matches[1], body);
              }));
  server.Get(R"(/sessions/([^/]+)/trajectories)",
             [&service, reply](const httplib::Request& req, httplib::Response& res) {
               VehicleId vehicle = 0;
               try {
                 vehicle = std::stoi(req.get_param_value("vehicle"));
               } catch (const std::exception&) {
                 reply(res, error(400, "vehicle query parameter must be an integer"));
                 return;
               }
               reply(res, service.get_trajectories(req.matches[1], vehicle));
             });
  server.Get(R"(/jobs/([^/]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_job(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/stream)", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    auto sub = service.subscribe(req.matches[1]);
    if (!sub) {
      reply(res, error(404, "unknown session " + std::string(req.matches[1])));
      return;
    }
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [sub, &service](std::size_t, httplib::DataSink& sink) {
          if (!sink.is_writable() || service.stop_requested()) return false;
          if (auto line = sub->pop(std::chrono::milliseconds(200))) return sink.write(line->data(), line->size());
          if (sub->closed()) {
            sink.done();
            return true;
          }
          return true;
        },
        [sub](bool) { sub->close(); });
  });
}

}  // namespace trajedit::service
