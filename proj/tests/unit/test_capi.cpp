#include <trajedit/trajedit.h>

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kScenarios = TRAJEDIT_SCENARIO_DIR;
const std::string kConfigs = TRAJEDIT_CONFIG_DIR;

const char* kSingleLane = R"({
  "meta": {"name": "single", "grid_resolution": 0.5},
  "lanes": [{"id": "A", "width": 3.5, "centerline": [[0, 0], [100, 0], [200, 0]], "successors": []}],
  "vehicles": [{"id": 0, "path": ["A"], "s": 0, "speed": 0, "desired_speed": 10}]
})";

struct SceneHandle {
  te_scene* p = nullptr;
  ~SceneHandle() { te_scene_free(p); }
};

struct WorldHandle {
  te_world* p = nullptr;
  ~WorldHandle() { te_world_free(p); }
};

}  // namespace

TEST(CApi, StatusStrings) {
  EXPECT_STREQ(te_status_name(TE_OK), "ok");
  EXPECT_NE(std::string(te_status_name(TE_ERR_NOT_FOUND)), "");
  EXPECT_NE(te_version(), nullptr);
  EXPECT_NE(te_last_error(), nullptr);
}

TEST(CApi, NullArgumentsRejected) {
  EXPECT_EQ(te_scene_load(nullptr, nullptr), TE_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(te_last_error()), "");
  EXPECT_EQ(te_world_step(nullptr, 1), TE_ERR_INVALID_ARGUMENT);
  te_scene_free(nullptr);
  te_world_free(nullptr);
  te_string_free(nullptr);
}

TEST(CApi, SceneErrorsMapToCodes) {
  SceneHandle scene;
  EXPECT_EQ(te_scene_load((kScenarios + "/missing.json").c_str(), &scene.p), TE_ERR_NOT_FOUND);
  EXPECT_EQ(scene.p, nullptr);
  EXPECT_NE(std::string(te_last_error()).find("missing.json"), std::string::npos) << te_last_error();
  EXPECT_EQ(te_scene_parse("{", &scene.p), TE_ERR_PARSE);
  EXPECT_EQ(te_scene_parse(R"({"lanes": [{"id": "A", "centerline": [[0, 0]]}]})", &scene.p), TE_ERR_VALIDATION);
}

TEST(CApi, SceneCounts) {
  SceneHandle scene;
  ASSERT_EQ(te_scene_load((kScenarios + "/straight_road.json").c_str(), &scene.p), TE_OK) << te_last_error();
  size_t lanes = 0, paths = 0;
  ASSERT_EQ(te_scene_lane_count(scene.p, &lanes), TE_OK);
  ASSERT_EQ(te_scene_topo_path_count(scene.p, &paths), TE_OK);
  EXPECT_EQ(lanes, 3u);
  EXPECT_EQ(paths, 3u);
}

TEST(CApi, WorldLifecycle) {
  SceneHandle scene;
  ASSERT_EQ(te_scene_parse(kSingleLane, &scene.p), TE_OK) << te_last_error();
  WorldHandle world;
  ASSERT_EQ(te_world_create(scene.p, 0.01, 0, 0, &world.p), TE_OK) << te_last_error();
  size_t n = 0;
  ASSERT_EQ(te_world_vehicle_count(world.p, &n), TE_OK);
  EXPECT_EQ(n, 1u);
  ASSERT_EQ(te_world_spawn(world.p, 1, 0, 50.0, 0.0, 8.0, 8.0), TE_OK) << te_last_error();
  EXPECT_EQ(te_world_spawn(world.p, 1, 0, 60.0, 0.0, 8.0, 8.0), TE_ERR_VALIDATION);
  EXPECT_EQ(te_world_spawn(world.p, 2, 99, 60.0, 0.0, 8.0, 8.0), TE_ERR_NOT_FOUND);

  WorldHandle copy;
  ASSERT_EQ(te_world_clone(world.p, &copy.p), TE_OK);
  ASSERT_EQ(te_world_step(world.p, 100), TE_OK);
  double t = 0.0;
  long frame = 0;
  ASSERT_EQ(te_world_time(world.p, &t, &frame), TE_OK);
  EXPECT_EQ(frame, 100);
  EXPECT_NEAR(t, 1.0, 1e-12);
  ASSERT_EQ(te_world_time(copy.p, &t, &frame), TE_OK);
  EXPECT_EQ(frame, 0);

  std::vector<te_vehicle_state> states(1);
  size_t count = 0;
  ASSERT_EQ(te_world_vehicles(world.p, states.data(), states.size(), &count), TE_OK);
  EXPECT_EQ(count, 2u);
  EXPECT_EQ(states[0].id, 0);
  EXPECT_GT(states[0].vs, 0.0);
  states.resize(count);
  ASSERT_EQ(te_world_vehicles(world.p, states.data(), states.size(), &count), TE_OK);
  EXPECT_EQ(states[1].id, 1);
  EXPECT_NEAR(states[1].s, 58.0, 1e-6);
  EXPECT_NEAR(states[1].x, 58.0, 1e-6);

  EXPECT_EQ(te_world_step(world.p, -1), TE_ERR_INVALID_ARGUMENT);
}

TEST(CApi, BenchmarkEdit) {
  SceneHandle scene;
  ASSERT_EQ(te_scene_parse(kSingleLane, &scene.p), TE_OK);
  WorldHandle world;
  ASSERT_EQ(te_world_create(scene.p, 0.01, 0, 0, &world.p), TE_OK);
  te_keyframe kf{};
  kf.vehicle = 0;
  kf.time = 10.0;
  kf.s = 100.0;
  kf.has_speed = 1;
  kf.speed = 0.0;
  te_edit_report report{};
  ASSERT_EQ(te_world_edit(world.p, &kf, 1, nullptr, &report), TE_OK) << te_last_error();
  EXPECT_TRUE(report.met);
  EXPECT_FALSE(report.replanned);
  EXPECT_LT(report.max_error, 0.5);
  EXPECT_GT(report.expansions, 0u);
  EXPECT_LE(report.iterations, 100);

  // The edit is installed: stepping to the keyframe time reproduces it.
  ASSERT_EQ(te_world_step(world.p, 1000), TE_OK);
  te_vehicle_state v{};
  size_t count = 0;
  ASSERT_EQ(te_world_vehicles(world.p, &v, 1, &count), TE_OK);
  EXPECT_NEAR(v.s, 100.0, 0.5);

  kf.time = 5.0;  // now in the past
  EXPECT_EQ(te_world_edit(world.p, &kf, 1, nullptr, &report), TE_ERR_RANGE);
}

TEST(CApi, PlanPathAndReroute) {
  SceneHandle scene;
  ASSERT_EQ(te_scene_load((kScenarios + "/straight_road.json").c_str(), &scene.p), TE_OK);
  WorldHandle world;
  ASSERT_EQ(te_world_create(scene.p, 0.01, 1, 5, &world.p), TE_OK);
  const double xy[] = {5.0, -3.5, 60.0, 0.0, 150.0, 0.0};
  int path_id = -1;
  ASSERT_EQ(te_world_plan_path(world.p, xy, 3, 0, &path_id), TE_OK) << te_last_error();
  EXPECT_GE(path_id, 3);
  std::vector<te_vehicle_state> states(3);
  size_t count = 0;
  ASSERT_EQ(te_world_vehicles(world.p, states.data(), states.size(), &count), TE_OK);
  EXPECT_EQ(states[0].path_id, path_id);

  const double off_road[] = {5.0, 0.0, 60.0, 50.0};
  EXPECT_EQ(te_world_plan_path(world.p, off_road, 2, -1, &path_id), TE_ERR_PLANNING);
  EXPECT_EQ(te_world_plan_path(world.p, xy, 1, -1, &path_id), TE_ERR_INVALID_ARGUMENT);
}

TEST(CApi, RunAndPlanEntryPoints) {
  const fs::path dir = fs::temp_directory_path() / "trajedit_capi_run";
  fs::remove_all(dir);
  te_run_overrides ov{};
  const std::string out = dir.string();
  ov.output = out.c_str();
  int all_met = 0;
  ASSERT_EQ(te_run((kConfigs + "/benchmark.json").c_str(), 1, &ov, &all_met), TE_OK) << te_last_error();
  EXPECT_EQ(all_met, 1);
  EXPECT_TRUE(fs::exists(dir / "edited.csv"));
  EXPECT_EQ(te_run((kConfigs + "/nope.json").c_str(), 1, nullptr, nullptr), TE_ERR_NOT_FOUND);

  const double xy[] = {10.0, 0.0, 100.0, 3.5};
  double length = 0.0;
  const std::string csv = (dir / "plan.csv").string();
  ASSERT_EQ(te_plan((kScenarios + "/straight_road.json").c_str(), xy, 2, csv.c_str(), &length), TE_OK)
      << te_last_error();
  EXPECT_NEAR(length, 90.0, 1.0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x,y,s");
  fs::remove_all(dir);
}

TEST(CApi, BenchRefusalAndReport) {
  const double fine[] = {0.1};
  te_bench_options opts{};
  opts.lattice_steps = fine;
  opts.n_lattice_steps = 1;
  char* json = nullptr;
  EXPECT_EQ(te_bench(&opts, &json, nullptr), TE_ERR_REFUSED);
  EXPECT_EQ(json, nullptr);

  const double coarse[] = {0.5};
  const double sim[] = {0.1};
  opts.lattice_steps = coarse;
  opts.sim_steps = sim;
  opts.n_sim_steps = 1;
  opts.iterations = 3;
  opts.repeats = 1;
  char* table = nullptr;
  ASSERT_EQ(te_bench(&opts, &json, &table), TE_OK) << te_last_error();
  ASSERT_NE(json, nullptr);
  ASSERT_NE(table, nullptr);
  EXPECT_NE(std::string(json).find("\"adjoint\""), std::string::npos);
  te_string_free(json);
  te_string_free(table);
}
