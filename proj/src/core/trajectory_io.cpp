#include "core/trajectory_io.hpp"

#include "core/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace trajedit {

std::vector<TrajectoryRow> TrajectoryLog::of(VehicleId id) const {
  std::vector<TrajectoryRow> out;
  for (const auto& r : rows) {
    if (r.id == id) out.push_back(r);
  }
  return out;
}

void TrajectoryLog::record(const World& world, const std::vector<ForceBreakdown>& forces) {
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    const VehicleState& v = world.vehicles[i];
    TrajectoryRow r;
    r.frame = world.frame;
    r.t = world.time();
    r.id = v.id;
    r.x = v.position.x();
    r.y = v.position.y();
    r.s = v.pose.s;
    r.d = v.pose.d;
    r.vs = v.vs();
    r.vd = v.vd();
    r.theta = v.heading;
    if (i < forces.size()) {
      r.fs = forces[i].total.x();
      r.fd = forces[i].total.y();
    }
    rows.push_back(r);
  }
}

TrajectoryLog simulate(World& world, long frames) {
  TrajectoryLog log;
  for (long k = 0; k < frames; ++k) {
    const auto forces = compute_forces(world);
    log.record(world, forces);
    integrate(world, forces, world.dt);
  }
  log.record(world, compute_forces(world));
  return log;
}

namespace {

// %.17g keeps doubles round-trippable, which makes reruns byte-comparable.
void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "t,id,x,y,s,d,vs,vd,theta,fs,fd\n";
  char tbuf[32];
  for (const auto& r : rows) {
    std::snprintf(tbuf, sizeof tbuf, "%.3f", r.t);
    out << tbuf << ',' << r.id;
    for (double v : {r.x, r.y, r.s, r.d, r.vs, r.vd, r.theta, r.fs, r.fd}) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_trajectory_csv(out, rows);
}

void write_coarse_dump(std::ostream& out, const std::vector<CoarseNodeRow>& nodes) {
  for (const auto& n : nodes) {
    out << n.t_index << ',';
    put(out, n.s);
    out << ',';
    put(out, n.v);
    out << '\n';
  }
}

void write_loss_history(std::ostream& out, const std::vector<double>& losses) {
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << i << ',';
    put(out, losses[i]);
    out << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

}  // namespace trajedit
