#pragma once

#include "core/lattice.hpp"
#include "core/trajectory_io.hpp"
#include "core/world.hpp"

#include <optional>
#include <vector>

namespace trajedit {

// Per-frame desired longitudinal speeds, frames [0, T) after the start.
struct ControlSchedule {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

// Linear interpolation of per-node speeds (spaced `node_dt` apart) onto the
// simulation grid. Output length T satisfies T * dt = (nodes - 1) * node_dt;
// throws ValidationError if node_dt is not a multiple of dt.
ControlSchedule pad_speeds(const std::vector<double>& node_speeds, double node_dt, double dt);
ControlSchedule init_from_coarse(const CoarseTrajectory& coarse, const LatticeSpec& spec, double dt);

// A keyframe resolved to the optimized vehicle's path: reach arc length `s`
// (and optionally speed `vs`) at `frame` frames after the start.
struct TrackingTarget {
  long frame = 0;
  double s = 0.0;
  std::optional<double> vs;
};

// Simulated trajectory of the optimized vehicle, frames [0, T].
struct FineTrajectory {
  VehicleId vehicle = 0;
  double dt = 0.01;
  double mass = 1.0;
  std::vector<double> s;
  std::vector<double> vs;
  std::vector<Vec2> position;
  // Per step t in [0, T): d f^s / d v^s_o at frame t.
  std::vector<double> control_slope;
  std::vector<std::uint8_t> speed_clamped;
  // Step t hit the path end (s pinned to the length).
  std::vector<std::uint8_t> end_clamped;
  // The vehicle had already finished before step t; state constant.
  std::vector<std::uint8_t> frozen;
  // Every vehicle's rows, filled when requested.
  TrajectoryLog log;

  long frames() const { return static_cast<long>(s.size()) - 1; }
};

struct RolloutOptions {
  bool record_log = false;
};

// Simulates a copy of `world` for schedule.size() frames with the vehicle's
// desired speed driven by the schedule; other vehicles follow their own
// dynamics.
FineTrajectory rollout(World world, VehicleId id, const ControlSchedule& schedule, const RolloutOptions& opts = {});

// How the speed regularizer accumulates over frames. kPerSecond weighs each
// frame by dt, so the term is a time integral and keeps its meaning when dt
// changes; kPerFrame sums the raw per-frame values.
enum class RegularizerScale { kPerSecond, kPerFrame };

struct LossWeights {
  double tracking = 1.0;     // w_t
  double regularizer = 0.1;  // w_v
  RegularizerScale scale = RegularizerScale::kPerSecond;
};

// 1/2 sum_kf w_t ((s - s_kf)^2 + [speed given] (v - v_kf)^2)
//   + 1/2 w_v c sum_t |v_o,t|, where c is dt or 1 per `scale`.
// Throws RangeError if a target frame lies outside [0, T].
double loss(const FineTrajectory& traj, const ControlSchedule& schedule, const std::vector<TrackingTarget>& targets,
            const LossWeights& weights = {});

struct AdjointResult {
  std::vector<double> gradient;  // d loss / d v_o,t, length T
  std::vector<Vec2> lambda;      // [lambda_s, lambda_v] per frame, length T + 1
};

// Backward recursion lambda_t = lambda_{t+1} J_t + d loss / d x_t with
// J_t the step Jacobian of the self-motivated dynamics only. Exact when no
// other force acts on the vehicle.
AdjointResult adjoint_gradient(const FineTrajectory& traj, const ControlSchedule& schedule,
                               const std::vector<TrackingTarget>& targets, const LossWeights& weights = {});

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t n, AdamConfig cfg);
  void update(std::vector<double>& x, const std::vector<double>& grad);

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct OptimizeConfig {
  int max_iterations = 100;
  int patience = 10;  // stop after this many iterations without improvement
  AdamConfig adam;
  LossWeights weights;
  double v_max = 20.0;
};

struct OptimizeResult {
  ControlSchedule schedule;  // best schedule
  FineTrajectory trajectory; // its simulated trajectory
  double best_loss = 0.0;
  int best_iteration = 0;
  int iterations = 0;
  std::vector<double> losses;       // loss of each iterate
  std::vector<double> best_losses;  // best loss so far, per iteration
};

OptimizeResult optimize(const World& world, VehicleId id, ControlSchedule initial,
                        const std::vector<TrackingTarget>& targets, const OptimizeConfig& cfg = {});

}  // namespace trajedit
