#pragma once

#include "core/world.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace trajedit {

struct TrajectoryRow {
  long frame = 0;
  double t = 0.0;
  VehicleId id = 0;
  double x = 0.0, y = 0.0;
  double s = 0.0, d = 0.0;
  double vs = 0.0, vd = 0.0;
  double theta = 0.0;
  double fs = 0.0, fd = 0.0;  // total Frenet force acting during this frame
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;

  // Rows for one vehicle, in frame order.
  std::vector<TrajectoryRow> of(VehicleId id) const;
  // Appends one row per active vehicle; `forces` is aligned with world.vehicles.
  void record(const World& world, const std::vector<ForceBreakdown>& forces);
};

// Runs `frames` steps, recording each pre-step state with the force applied
// to it, plus the final state. `controls` in the world drive the schedule.
TrajectoryLog simulate(World& world, long frames);

// Header "t,id,x,y,s,d,vs,vd,theta,fs,fd"; t with 3 decimals.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows);

// One "t_index,s,v" line per node, no header.
struct CoarseNodeRow {
  long t_index = 0;
  double s = 0.0;
  double v = 0.0;
};
void write_coarse_dump(std::ostream& out, const std::vector<CoarseNodeRow>& nodes);

// One "iter,loss" line per iteration, no header.
void write_loss_history(std::ostream& out, const std::vector<double>& losses);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace trajedit
