#include "core/adjoint.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace trajedit {

ControlSchedule pad_speeds(const std::vector<double>& node_speeds, double node_dt, double dt) {
  if (node_speeds.size() < 2) throw ValidationError("padding needs at least 2 nodes");
  if (!(dt > 0.0) || !(node_dt > 0.0)) throw ValidationError("time steps must be positive");
  const double ratio = node_dt / dt;
  const long per_node = std::lround(ratio);
  if (per_node < 1 || std::abs(ratio - static_cast<double>(per_node)) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("lattice time step must be a multiple of the simulation time step");
  }
  ControlSchedule out;
  out.values.reserve((node_speeds.size() - 1) * static_cast<std::size_t>(per_node));
  for (std::size_t i = 0; i + 1 < node_speeds.size(); ++i) {
    for (long k = 0; k < per_node; ++k) {
      const double a = static_cast<double>(k) / static_cast<double>(per_node);
      out.values.push_back((1.0 - a) * node_speeds[i] + a * node_speeds[i + 1]);
    }
  }
  return out;
}

ControlSchedule init_from_coarse(const CoarseTrajectory& coarse, const LatticeSpec& spec, double dt) {
  std::vector<double> speeds;
  for (const auto& n : coarse.nodes) speeds.push_back(n.i_v * spec.speed_step());
  return pad_speeds(speeds, spec.time_step, dt);
}

FineTrajectory rollout(World world, VehicleId id, const ControlSchedule& schedule, const RolloutOptions& opts) {
  const VehicleState& start = world.vehicle(id);
  const double length = world.paths.path(start.path_id).length();
  const std::size_t T = schedule.size();

  FineTrajectory out;
  out.vehicle = id;
  out.dt = world.dt;
  out.mass = start.params.mass;
  out.s.reserve(T + 1);
  out.vs.reserve(T + 1);
  out.position.reserve(T + 1);
  out.control_slope.assign(T, 0.0);
  out.speed_clamped.assign(T, 0);
  out.end_clamped.assign(T, 0);
  out.frozen.assign(T, 0);
  world.controls[id] = SpeedControl{world.frame, schedule.values};

  double last_s = start.pose.s, last_vs = start.vs();
  Vec2 last_pos = start.position;
  for (std::size_t t = 0; t < T; ++t) {
    const VehicleState* v = world.find(id);
    if (v) {
      last_s = v->pose.s;
      last_vs = v->vs();
      last_pos = v->position;
      out.control_slope[t] = self_force_control_derivative(*v, schedule.values[t], world.weights);
    } else {
      out.frozen[t] = 1;
    }
    out.s.push_back(last_s);
    out.vs.push_back(last_vs);
    out.position.push_back(last_pos);

    const auto forces = compute_forces(world);
    if (opts.record_log) out.log.record(world, forces);
    const auto info = integrate(world, forces, world.dt);
    for (const auto& i : info) {
      if (i.id != id) continue;
      out.speed_clamped[t] = i.speed_clamped;
      out.end_clamped[t] = i.finished;
      if (i.finished) {
        last_s = length;
        last_vs = world.finished.back().vs();
        last_pos = world.finished.back().position;
      }
    }
  }
  if (const VehicleState* v = world.find(id)) {
    last_s = v->pose.s;
    last_vs = v->vs();
    last_pos = v->position;
  }
  out.s.push_back(last_s);
  out.vs.push_back(last_vs);
  out.position.push_back(last_pos);
  if (opts.record_log) out.log.record(world, compute_forces(world));
  return out;
}

namespace {

double regularizer_scale(const LossWeights& w, double dt) {
  return w.scale == RegularizerScale::kPerSecond ? dt : 1.0;
}

void check_targets(const FineTrajectory& traj, const std::vector<TrackingTarget>& targets) {
  for (const auto& k : targets) {
    if (k.frame < 0 || k.frame > traj.frames()) {
      throw RangeError("keyframe at frame " + std::to_string(k.frame) + " lies outside the horizon of " +
                       std::to_string(traj.frames()) + " frames");
    }
  }
}

}  // namespace

double loss(const FineTrajectory& traj, const ControlSchedule& schedule, const std::vector<TrackingTarget>& targets,
            const LossWeights& weights) {
  if (static_cast<long>(schedule.size()) != traj.frames()) {
    throw ValidationError("schedule and trajectory lengths differ");
  }
  check_targets(traj, targets);
  double tracking = 0.0;
  for (const auto& k : targets) {
    const auto f = static_cast<std::size_t>(k.frame);
    const double es = traj.s[f] - k.s;
    tracking += es * es;
    if (k.vs) {
      const double ev = traj.vs[f] - *k.vs;
      tracking += ev * ev;
    }
  }
  double reg = 0.0;
  for (double v : schedule.values) reg += std::abs(v);
  return 0.5 * weights.tracking * tracking + 0.5 * weights.regularizer * regularizer_scale(weights, traj.dt) * reg;
}

AdjointResult adjoint_gradient(const FineTrajectory& traj, const ControlSchedule& schedule,
                               const std::vector<TrackingTarget>& targets, const LossWeights& weights) {
  const long T = traj.frames();
  if (static_cast<long>(schedule.size()) != T) throw ValidationError("schedule and trajectory lengths differ");
  check_targets(traj, targets);

  // d loss / d x_t from the tracking terms.
  std::vector<Vec2> state_grad(static_cast<std::size_t>(T + 1), Vec2::Zero());
  for (const auto& k : targets) {
    const auto f = static_cast<std::size_t>(k.frame);
    state_grad[f].x() += weights.tracking * (traj.s[f] - k.s);
    if (k.vs) state_grad[f].y() += weights.tracking * (traj.vs[f] - *k.vs);
  }
  const double reg = 0.5 * weights.regularizer * regularizer_scale(weights, traj.dt);
  const double dt = traj.dt;
  const double m = traj.mass;

  AdjointResult out;
  out.gradient.assign(static_cast<std::size_t>(T), 0.0);
  out.lambda.assign(static_cast<std::size_t>(T + 1), Vec2::Zero());
  out.lambda[static_cast<std::size_t>(T)] = state_grad[static_cast<std::size_t>(T)];

  for (long t = T - 1; t >= 0; --t) {
    const auto i = static_cast<std::size_t>(t);
    const Vec2& next = out.lambda[i + 1];
    const double v_ctrl = schedule.values[i];
    const double reg_grad = v_ctrl > 0.0 ? reg : (v_ctrl < 0.0 ? -reg : 0.0);

    // Rows of the step Jacobian: d[s', v'] / d[s, v] and d[s', v'] / d v_o.
    Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
    Vec2 dcontrol = Vec2::Zero();
    if (!traj.frozen[i]) {
      const double k = traj.control_slope[i];
      if (traj.speed_clamped[i]) {
        // v' = 0, s' = s.
        J << 1.0, 0.0, 0.0, 0.0;
      } else {
        const double dv_dv = 1.0 - k * dt / m;
        J << 1.0, dt * dv_dv, 0.0, dv_dv;
        dcontrol << k * dt * dt / m, k * dt / m;
      }
      if (traj.end_clamped[i]) {
        J.row(0).setZero();
        dcontrol.x() = 0.0;
      }
    }
    out.gradient[i] = next.dot(dcontrol) + reg_grad;
    out.lambda[i] = (next.transpose() * J).transpose() + state_grad[i];
  }
  return out;
}

Adam::Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

void Adam::update(std::vector<double>& x, const std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < x.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    x[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
  }
}

OptimizeResult optimize(const World& world, VehicleId id, ControlSchedule initial,
                        const std::vector<TrackingTarget>& targets, const OptimizeConfig& cfg) {
  if (initial.values.empty()) throw ValidationError("empty control schedule");
  world.vehicle(id);
  for (double& v : initial.values) v = std::clamp(v, 0.0, cfg.v_max);

  OptimizeResult result;
  result.best_loss = std::numeric_limits<double>::infinity();
  ControlSchedule current = std::move(initial);
  Adam adam(current.size(), cfg.adam);
  int stale = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    FineTrajectory traj = rollout(world, id, current);
    const double value = loss(traj, current, targets, cfg.weights);
    result.losses.push_back(value);
    ++result.iterations;
    if (value < result.best_loss) {
      result.best_loss = value;
      result.best_iteration = it;
      result.schedule = current;
      result.trajectory = traj;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      result.best_losses.push_back(result.best_loss);
      break;
    }
    result.best_losses.push_back(result.best_loss);

    const AdjointResult grad = adjoint_gradient(traj, current, targets, cfg.weights);
    adam.update(current.values, grad.gradient);
    for (double& v : current.values) v = std::clamp(v, 0.0, cfg.v_max);
  }
  return result;
}

}  // namespace trajedit
