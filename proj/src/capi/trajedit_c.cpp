#include "trajedit/trajedit.h"

#include "core/errors.hpp"
#include "core/orchestrator.hpp"
#include "core/trajectory_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

struct te_scene {
  trajedit::Scenario scenario;
};

struct te_world {
  trajedit::World world;
};

namespace {

thread_local std::string g_last_error;

te_status fail(te_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `f`, mapping exceptions onto status codes.
template <class F>
te_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return TE_OK;
  } catch (const trajedit::ParseError& e) {
    return fail(TE_ERR_PARSE, e.what());
  } catch (const trajedit::ValidationError& e) {
    return fail(TE_ERR_VALIDATION, e.what());
  } catch (const trajedit::PlanningError& e) {
    return fail(TE_ERR_PLANNING, e.what());
  } catch (const trajedit::SearchError& e) {
    return fail(TE_ERR_SEARCH, e.what());
  } catch (const trajedit::RangeError& e) {
    return fail(TE_ERR_RANGE, e.what());
  } catch (const trajedit::NotFoundError& e) {
    return fail(TE_ERR_NOT_FOUND, e.what());
  } catch (const trajedit::RefusedError& e) {
    return fail(TE_ERR_REFUSED, e.what());
  } catch (const trajedit::IoError& e) {
    return fail(TE_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TE_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TE_ERR_INTERNAL, "unknown failure");
  }
}

#define TE_REQUIRE(cond, what)                                   \
  do {                                                           \
    if (!(cond)) return fail(TE_ERR_INVALID_ARGUMENT, (what));   \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

trajedit::Polyline polyline(const double* xy, size_t n) {
  trajedit::Polyline out;
  for (size_t i = 0; i < n; ++i) out.emplace_back(xy[2 * i], xy[2 * i + 1]);
  return out;
}

}  // namespace

extern "C" {

const char* te_last_error(void) { return g_last_error.c_str(); }

const char* te_status_name(te_status status) {
  switch (status) {
    case TE_OK: return "ok";
    case TE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TE_ERR_PARSE: return "parse error";
    case TE_ERR_VALIDATION: return "validation error";
    case TE_ERR_PLANNING: return "planning error";
    case TE_ERR_SEARCH: return "search error";
    case TE_ERR_RANGE: return "range error";
    case TE_ERR_NOT_FOUND: return "not found";
    case TE_ERR_REFUSED: return "refused";
    case TE_ERR_IO: return "i/o error";
    case TE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* te_version(void) { return "0.1.0"; }

void te_string_free(char* s) { std::free(s); }

te_status te_scene_load(const char* path, te_scene** out) {
  TE_REQUIRE(path && out, "path and out must be non-null");
  *out = nullptr;
  return guard([&] { *out = new te_scene{trajedit::load_scenario(path)}; });
}

te_status te_scene_parse(const char* json_text, te_scene** out) {
  TE_REQUIRE(json_text && out, "json_text and out must be non-null");
  *out = nullptr;
  return guard([&] { *out = new te_scene{trajedit::parse_scenario(json_text)}; });
}

void te_scene_free(te_scene* scene) { delete scene; }

te_status te_scene_lane_count(const te_scene* scene, size_t* out) {
  TE_REQUIRE(scene && out, "scene and out must be non-null");
  *out = scene->scenario.network.lanes.size();
  return TE_OK;
}

te_status te_scene_topo_path_count(const te_scene* scene, size_t* out) {
  TE_REQUIRE(scene && out, "scene and out must be non-null");
  return guard([&] { *out = trajedit::topo_paths(scene->scenario.network).size(); });
}

te_status te_world_create(const te_scene* scene, double dt, int seed_params, uint64_t seed, te_world** out) {
  TE_REQUIRE(scene && out, "scene and out must be non-null");
  TE_REQUIRE(dt > 0.0, "dt must be positive");
  *out = nullptr;
  return guard([&] {
    trajedit::WorldOptions opts;
    opts.dt = dt;
    if (seed_params) opts.seed = seed;
    *out = new te_world{trajedit::make_world(scene->scenario, opts)};
  });
}

te_status te_world_clone(const te_world* world, te_world** out) {
  TE_REQUIRE(world && out, "world and out must be non-null");
  *out = nullptr;
  return guard([&] { *out = new te_world{world->world}; });
}

void te_world_free(te_world* world) { delete world; }

te_status te_world_step(te_world* world, long frames) {
  TE_REQUIRE(world, "world must be non-null");
  TE_REQUIRE(frames >= 0, "frames must be non-negative");
  return guard([&] {
    for (long i = 0; i < frames; ++i) trajedit::step(world->world);
  });
}

te_status te_world_time(const te_world* world, double* seconds, long* frame) {
  TE_REQUIRE(world, "world must be non-null");
  if (seconds) *seconds = world->world.time();
  if (frame) *frame = world->world.frame;
  return TE_OK;
}

te_status te_world_vehicle_count(const te_world* world, size_t* out) {
  TE_REQUIRE(world && out, "world and out must be non-null");
  *out = world->world.vehicles.size();
  return TE_OK;
}

te_status te_world_vehicles(const te_world* world, te_vehicle_state* out, size_t capacity, size_t* count) {
  TE_REQUIRE(world && count, "world and count must be non-null");
  TE_REQUIRE(out || capacity == 0, "out must be non-null when capacity > 0");
  const auto& vs = world->world.vehicles;
  *count = vs.size();
  for (size_t i = 0; i < vs.size() && i < capacity; ++i) {
    const auto& v = vs[i];
    out[i] = {v.id, v.path_id, v.position.x(), v.position.y(), v.pose.s, v.pose.d, v.vs(), v.vd(), v.heading};
  }
  return TE_OK;
}

te_status te_world_spawn(te_world* world, int id, int path_id, double s, double d, double speed,
                         double desired_speed) {
  TE_REQUIRE(world, "world must be non-null");
  return guard([&] { world->world.spawn(id, path_id, {s, d}, speed, desired_speed); });
}

te_status te_world_plan_path(te_world* world, const double* xy, size_t n_points, int vehicle, int* path_id) {
  TE_REQUIRE(world && xy, "world and xy must be non-null");
  TE_REQUIRE(n_points >= 2, "at least 2 way-points are required");
  return guard([&] {
    trajedit::PlanRequest req;
    req.waypoints = polyline(xy, n_points);
    const trajedit::RefPath path = trajedit::plan_user_path(world->world.grid, req);
    const int id = world->world.paths.register_user_path(path);
    if (vehicle >= 0) world->world.reroute(vehicle, id);
    if (path_id) *path_id = id;
  });
}

te_status te_world_edit(te_world* world, const te_keyframe* keyframes, size_t n_keyframes,
                        const te_edit_options* options, te_edit_report* report) {
  TE_REQUIRE(world && keyframes, "world and keyframes must be non-null");
  TE_REQUIRE(n_keyframes > 0, "at least one keyframe is required");
  return guard([&] {
    std::vector<trajedit::Keyframe> kfs;
    for (size_t i = 0; i < n_keyframes; ++i) {
      const te_keyframe& k = keyframes[i];
      trajedit::Keyframe kf;
      kf.vehicle = k.vehicle;
      kf.time = k.time;
      if (k.has_point) {
        kf.point = trajedit::Vec2(k.x, k.y);
      } else {
        kf.s = k.s;
      }
      if (k.has_speed) kf.speed = k.speed;
      kfs.push_back(kf);
    }
    trajedit::EditOptions opts;
    if (options) {
      if (options->lattice_dt > 0.0) opts.lattice.time_step = options->lattice_dt;
      if (options->iterations > 0) opts.optimizer.max_iterations = options->iterations;
      if (options->v_max > 0.0) opts.lattice.v_max = options->v_max;
      if (options->per_frame_regularizer) opts.optimizer.weights.scale = trajedit::RegularizerScale::kPerFrame;
      if (options->average_speed_init) opts.init = trajedit::InitMode::kAverageSpeed;
    }
    const trajedit::EditResult edit = trajedit::edit_vehicle(world->world, kfs, opts);
    trajedit::apply_edit(world->world, edit);
    if (report) {
      te_edit_report r{};
      r.met = edit.met;
      r.replanned = edit.new_path.has_value();
      r.iterations = edit.optimization.iterations;
      r.best_iteration = edit.optimization.best_iteration;
      r.best_loss = edit.optimization.best_loss;
      for (const auto& rep : edit.reports) r.max_error = std::max(r.max_error, rep.error);
      r.closest_distance = edit.reports.back().closest_distance;
      r.search_seconds = edit.search_seconds;
      r.optimize_seconds = edit.optimize_seconds;
      r.expansions = edit.expansions;
      *report = r;
    }
  });
}

te_status te_run(const char* config_path, int apply_edits, const te_run_overrides* overrides, int* all_met) {
  return guard([&] {
    trajedit::RunConfig cfg;
    if (config_path) cfg = trajedit::load_run_config(config_path);
    if (overrides) {
      if (overrides->scenario) cfg.scenario = overrides->scenario;
      if (overrides->output) cfg.output = overrides->output;
      if (overrides->has_seed) cfg.seed = overrides->seed;
      if (overrides->dt > 0.0) cfg.dt = overrides->dt;
      if (overrides->lattice_dt > 0.0) cfg.lattice_dt = overrides->lattice_dt;
      if (overrides->iterations > 0) cfg.iterations = overrides->iterations;
    }
    if (cfg.scenario.empty()) throw trajedit::ValidationError("no scenario given");
    if (cfg.dt > cfg.lattice_dt + 1e-12) throw trajedit::ValidationError("dt must not exceed dtt");
    const trajedit::RunSummary summary = trajedit::run(cfg, apply_edits != 0);
    if (all_met) *all_met = summary.all_met;
  });
}

te_status te_bench(const te_bench_options* options, char** json_out, char** table_out) {
  if (json_out) *json_out = nullptr;
  if (table_out) *table_out = nullptr;
  return guard([&] {
    trajedit::BenchConfig cfg;
    if (options) {
      if (options->lattice_steps && options->n_lattice_steps) {
        cfg.lattice_steps.assign(options->lattice_steps, options->lattice_steps + options->n_lattice_steps);
      }
      if (options->sim_steps && options->n_sim_steps) {
        cfg.sim_steps.assign(options->sim_steps, options->sim_steps + options->n_sim_steps);
      }
      if (options->iterations > 0) cfg.iterations = options->iterations;
      if (options->repeats > 0) cfg.repeats = options->repeats;
      cfg.allow_fine_lattice = options->allow_fine_lattice != 0;
    }
    const trajedit::BenchReport report = trajedit::bench(cfg);
    if (json_out) *json_out = dup_string(report.to_json().dump(2));
    if (table_out) *table_out = dup_string(report.table());
  });
}

te_status te_plan(const char* scenario_path, const double* xy, size_t n_points, const char* out_csv,
                  double* length) {
  TE_REQUIRE(scenario_path && xy, "scenario_path and xy must be non-null");
  TE_REQUIRE(n_points >= 2, "at least 2 way-points are required");
  return guard([&] {
    const trajedit::Scenario sc = trajedit::load_scenario(scenario_path);
    const trajedit::RefPath path = trajedit::plan_on_scenario(sc, polyline(xy, n_points));
    if (length) *length = path.length();
    if (out_csv) {
      std::ofstream out(out_csv);
      if (!out) throw trajedit::IoError(std::string("cannot write ") + out_csv);
      out << "x,y,s\n";
      const auto pts = path.sample(0.5);
      double s = 0.0;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) s += (pts[i] - pts[i - 1]).norm();
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", pts[i].x(), pts[i].y(), s);
        out << buf;
      }
    }
  });
}

}  // extern "C"
