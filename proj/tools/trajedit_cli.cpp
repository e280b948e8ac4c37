// Batch front end. Talks to the engine through the C API only.

#include <trajedit/trajedit.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int report_failure(const char* stage, te_status st) {
  std::fprintf(stderr, "trajedit %s: %s: %s\n", stage, te_status_name(st), te_last_error());
  return 1;
}

// "x1,y1;x2,y2;..." -> flat xy list.
bool parse_waypoints(const std::string& text, std::vector<double>& xy) {
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    double x = 0.0, y = 0.0;
    if (std::sscanf(pair.c_str(), "%lf,%lf", &x, &y) != 2) return false;
    xy.push_back(x);
    xy.push_back(y);
  }
  return xy.size() >= 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic simulation with spatio-temporal keyframe editing"};
  app.require_subcommand(1);

  std::string scenario, config, out;
  std::uint64_t seed = 0;
  double dt = 0.0, dtt = 0.0;
  int iters = 0;

  auto* simulate = app.add_subcommand("simulate", "Run the unedited simulation and write original.csv");
  auto* edit = app.add_subcommand("edit", "Run a config's keyframe edits and write all artifacts");
  for (auto* sub : {simulate, edit}) {
    sub->add_option("--scenario", scenario, "Scenario file (overrides the config)");
    sub->add_option("--config", config, "Run config file");
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Seed for per-vehicle parameter sampling");
    sub->add_option("--dt", dt, "Simulation time step, s");
    sub->add_option("--dtt", dtt, "Lattice time step, s");
    sub->add_option("--iters", iters, "Maximum optimizer iterations");
  }
  edit->get_option("--config")->required();

  std::vector<double> bench_dtt, bench_dt;
  bool allow_fine = false;
  int repeats = 0;
  auto* bench = app.add_subcommand("bench", "Time the lattice search and the adjoint optimizer");
  bench->add_option("--dtt", bench_dtt, "Lattice time steps (default 0.5 0.25)");
  bench->add_option("--dt", bench_dt, "Simulation time steps (default 0.5 0.1 0.05 0.01 0.005)");
  bench->add_option("--iters", iters, "Optimizer iterations per timing (default 100)");
  bench->add_option("--repeats", repeats, "Repeats per point; the best time is kept (default 3)");
  bench->add_option("--out", out, "Write the JSON report here");
  bench->add_flag("--allow-fine-lattice", allow_fine, "Permit lattice steps <= 0.1 s");

  std::string waypoints;
  auto* plan = app.add_subcommand("plan", "Plan a way-point path on a scenario");
  plan->add_option("--scenario", scenario, "Scenario file")->required();
  plan->add_option("--waypoints", waypoints, "Way-points as \"x,y;x,y;...\"")->required();
  plan->add_option("--out", out, "Write the path as x,y,s rows");

  CLI11_PARSE(app, argc, argv);

  if (*simulate || *edit) {
    te_run_overrides ov{};
    ov.scenario = scenario.empty() ? nullptr : scenario.c_str();
    ov.output = out.empty() ? nullptr : out.c_str();
    ov.has_seed = simulate->count("--seed") + edit->count("--seed") > 0;
    ov.seed = seed;
    ov.dt = dt;
    ov.lattice_dt = dtt;
    ov.iterations = iters;
    int all_met = 1;
    const bool editing = static_cast<bool>(*edit);
    const te_status st = te_run(config.empty() ? nullptr : config.c_str(), editing ? 1 : 0, &ov, &all_met);
    if (st != TE_OK) return report_failure(editing ? "edit" : "simulate", st);
    if (editing && !all_met) std::fprintf(stderr, "trajedit edit: some keyframes were not met, see metrics.json\n");
    return 0;
  }

  if (*bench) {
    te_bench_options opts{};
    opts.lattice_steps = bench_dtt.empty() ? nullptr : bench_dtt.data();
    opts.n_lattice_steps = bench_dtt.size();
    opts.sim_steps = bench_dt.empty() ? nullptr : bench_dt.data();
    opts.n_sim_steps = bench_dt.size();
    opts.iterations = iters;
    opts.repeats = repeats;
    opts.allow_fine_lattice = allow_fine ? 1 : 0;
    char* json = nullptr;
    char* table = nullptr;
    const te_status st = te_bench(&opts, &json, &table);
    if (st != TE_OK) return report_failure("bench", st);
    std::fputs(table, stdout);
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) {
        std::fprintf(stderr, "trajedit bench: cannot write %s\n", out.c_str());
        te_string_free(json);
        te_string_free(table);
        return 1;
      }
      f << json << "\n";
    }
    te_string_free(json);
    te_string_free(table);
    return 0;
  }

  if (*plan) {
    std::vector<double> xy;
    if (!parse_waypoints(waypoints, xy)) {
      std::fprintf(stderr, "trajedit plan: way-points must be \"x,y;x,y;...\" with at least two points\n");
      return 1;
    }
    double length = 0.0;
    const te_status st =
        te_plan(scenario.c_str(), xy.data(), xy.size() / 2, out.empty() ? nullptr : out.c_str(), &length);
    if (st != TE_OK) return report_failure("plan", st);
    std::printf("planned path length %.3f m\n", length);
    return 0;
  }
  return 0;
}
