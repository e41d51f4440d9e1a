#include "gripsim/screw_drive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gripsim {

namespace {
constexpr double kEps = 1e-12;
}

void ScrewDriveParams::validate() const {
  if (!(r_g1 > 0.0) || !(r_g2 > 0.0)) throw ConfigError("screw drive: gear radii must be > 0");
  if (!(theta_th > 0.0) || !(theta_th < kPi / 2.0))
    throw ConfigError("screw drive: lead angle must be in (0, pi/2)");
  if (mu_st < 0.0) throw ConfigError("screw drive: mu_st must be >= 0");
  if (tau_pre_max < 0.0) throw ConfigError("screw drive: tau_pre_max must be >= 0");
  if (!(tau_m_max > 0.0)) throw ConfigError("screw drive: tau_m_max must be > 0");
}

const char* to_string(MotionMode mode) {
  return mode == MotionMode::Translation ? "translation" : "rotation";
}

LoadModel LoadModel::linear_spring(double stiffness, double rest) {
  LoadModel m;
  m.kind = Kind::LinearSpring;
  m.stiffness = stiffness;
  m.rest = rest;
  return m;
}

LoadModel LoadModel::constant(double force) {
  LoadModel m;
  m.kind = Kind::Constant;
  m.force = force;
  return m;
}

LoadModel LoadModel::hard_stop(double position) {
  LoadModel m;
  m.kind = Kind::HardStop;
  m.position = position;
  return m;
}

double LoadModel::eval(double x) const {
  switch (kind) {
    case Kind::Free: return 0.0;
    case Kind::LinearSpring: return stiffness * std::max(0.0, x - rest);
    case Kind::Constant: return force;
    case Kind::HardStop: return 0.0;
  }
  return 0.0;
}

void LoadModel::validate() const {
  if (kind == Kind::LinearSpring && stiffness < 0.0)
    throw ConfigError("load model: spring stiffness must be >= 0");
}

double input_torque(const ScrewDriveParams& params, double tau_m) {
  return params.r_g1 * tau_m / params.r_g2;
}

ThreadForces thread_statics(double f_n, double f_fri, double theta_th, double r_g1) {
  if (f_n < 0.0) throw ConfigError("thread_statics: f_n must be >= 0");
  const double c = std::cos(theta_th), s = std::sin(theta_th);
  return {f_n * c - f_fri * s, r_g1 * (f_n * s + f_fri * c)};
}

double switching_threshold(const ScrewDriveParams& params) {
  const double t = std::tan(params.theta_th);
  if (!(t > 0.0)) throw ConfigError("switching_threshold: tan(theta_th) must be > 0");
  return params.tau_pre_max / (params.r_g1 * t);
}

double required_preload_torque(const ScrewDriveParams& params, double f_ex) {
  return params.r_g1 * std::tan(params.theta_th) * f_ex;
}

bool DesignReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

DesignReport validate_design(const ScrewDriveParams& params) {
  params.validate();
  DesignReport report;
  const double tan_th = std::tan(params.theta_th);

  // Thread must not self-lock: tan(theta_th) < 1/mu_st.
  {
    DesignCheck c;
    c.name = "thread_not_self_locking";
    const double bound = params.mu_st > 0.0 ? 1.0 / params.mu_st
                                            : std::numeric_limits<double>::infinity();
    c.margin = bound - tan_th;
    c.pass = tan_th < bound;
    c.detail = "tan(theta_th) < 1/mu_st";
    report.checks.push_back(c);
  }

  // Preload must stay within motor authority so the slider can be made to slip.
  {
    DesignCheck c;
    c.name = "preload_within_motor_authority";
    const double bound = (params.r_g1 / params.r_g2) * params.tau_m_max;
    c.margin = bound - params.tau_pre_max;
    c.pass = params.tau_pre_max <= bound;
    c.detail = "tau_pre_max <= (r_g1/r_g2)*tau_m_max";
    report.checks.push_back(c);
  }

  // Translation load window (0, f_ex_sw).
  report.f_ex_sw = switching_threshold(params);
  {
    DesignCheck c;
    c.name = "translation_load_window";
    c.margin = report.f_ex_sw;
    c.pass = report.f_ex_sw > 0.0;
    c.detail = "translation holds for |f_ex| in (0, f_ex_sw)";
    report.checks.push_back(c);
  }
  return report;
}

namespace {

// Torque the motor must supply to keep translating against load magnitude f.
double translation_motor_torque(const ScrewDriveParams& p, double f) {
  return p.r_g2 * std::tan(p.theta_th) * f;
}

// Torque the motor must supply to slip the preloaded slider (rotation mode).
double rotation_motor_torque(const ScrewDriveParams& p, const ScrewSimOptions& o) {
  return (p.r_g2 / p.r_g1) * p.tau_pre_max * o.kinetic_ratio;
}

}  // namespace

StepResult step(const ScrewDriveParams& params, const MechanismState& state,
                const LoadModel& load, double d_theta_m, const ScrewSimOptions& opts) {
  params.validate();
  load.validate();
  if (std::abs(d_theta_m) > opts.max_step * (1.0 + 1e-9))
    throw ConfigError("step: |d_theta_m| exceeds the configured step bound");

  StepResult result;
  MechanismState s = state;

  const double tan_th = std::tan(params.theta_th);
  const double gear = params.r_g2 / params.r_g1;  // motor angle -> gear-1 angle
  const double f_sw = switching_threshold(params);
  const double f_exit = opts.kinetic_ratio * f_sw;
  const double f_stall = params.tau_m_max / (params.r_g2 * tan_th);

  const bool at_wall = load.kind == LoadModel::Kind::HardStop &&
                       state.x_shaft >= load.position - 1e-12;
  const bool pushing_wall = at_wall && d_theta_m > 0.0;
  const double f_here = load.eval(state.x_shaft);

  bool rotation;
  if (state.mode == MotionMode::Rotation) {
    // Hysteresis: rotate until the free-path load drops strictly below the
    // (kinetic-ratio scaled) threshold; a hard stop keeps pinning while pushed.
    rotation = pushing_wall || std::abs(f_here) >= f_exit;
    if (!rotation) result.switched_back = true;
  } else {
    rotation = pushing_wall || std::abs(f_here) >= f_sw;
    if (rotation) result.switched = true;
  }

  if (rotation) {
    const double tau_rot = rotation_motor_torque(params, opts);
    if (tau_rot > params.tau_m_max * (1.0 + kEps)) {
      throw StallError("motor stall: preload torque exceeds motor authority (no switch possible)",
                       state);
    }
    s.mode = MotionMode::Rotation;
    s.theta_m += d_theta_m;
    s.theta_sh += gear * d_theta_m;
    s.f_ex = pushing_wall ? f_sw : f_here;
    result.tau_m = tau_rot;
    result.state = s;
    return result;
  }

  // Translation. A step ends early at a hard stop or where a rising load
  // reaches the switching (or stall) level; the crossing is exact for the
  // supported load shapes, so halving the step size does not move it.
  if (translation_motor_torque(params, std::abs(f_here)) > params.tau_m_max * (1.0 + kEps)) {
    throw StallError("motor stall: translation load exceeds motor authority", state);
  }
  const double dx_full = params.r_g1 * tan_th * gear * d_theta_m;
  const double x_target = state.x_shaft + dx_full;

  if (load.kind == LoadModel::Kind::HardStop && d_theta_m > 0.0 &&
      state.x_shaft <= load.position && x_target > load.position) {
    const double frac = (load.position - state.x_shaft) / dx_full;
    s.x_shaft = load.position;
    s.theta_m += frac * d_theta_m;
    s.mode = MotionMode::Rotation;  // armed: the next push pins at the wall
    s.f_ex = f_sw;
    result.switched = true;
    result.tau_m = rotation_motor_torque(params, opts);
    if (result.tau_m > params.tau_m_max * (1.0 + kEps))
      throw StallError("motor stall: preload torque exceeds motor authority (no switch possible)", s);
    result.state = s;
    return result;
  }

  const double f_target = load.eval(x_target);
  const double level = std::min(f_sw, f_stall);
  if (std::abs(f_target) >= level && std::abs(f_target) > std::abs(f_here)) {
    double x_cross = x_target;
    if (load.kind == LoadModel::Kind::LinearSpring && load.stiffness > 0.0) {
      x_cross = load.rest + level / load.stiffness;
    }
    const double frac = dx_full != 0.0 ? std::clamp((x_cross - state.x_shaft) / dx_full, 0.0, 1.0)
                                       : 0.0;
    s.x_shaft = x_cross;
    s.theta_m += frac * d_theta_m;
    s.f_ex = load.eval(x_cross);
    if (f_stall < f_sw) {
      s.mode = MotionMode::Translation;
      throw StallError("motor stall: load reached motor authority before the switching threshold",
                       s);
    }
    s.mode = MotionMode::Rotation;  // switch happens here; step ends at the crossing
    result.switched = true;
    result.tau_m = translation_motor_torque(params, std::abs(s.f_ex));
    result.state = s;
    return result;
  }

  s.mode = MotionMode::Translation;
  s.theta_m += d_theta_m;
  s.x_shaft = x_target;
  s.f_ex = f_target;
  result.tau_m = translation_motor_torque(params, std::abs(s.f_ex));
  result.state = s;
  return result;
}

SweepResult sweep_motor(const ScrewDriveParams& params, const LoadModel& load,
                        double total_angle, const ScrewSimOptions& opts,
                        const MechanismState& initial) {
  SweepResult result;
  MechanismState s = initial;
  s.f_ex = load.eval(s.x_shaft);
  result.trace.push_back({s.theta_m, s.mode, s.x_shaft, s.theta_sh, s.f_ex, 0.0});
  result.peak_f_ex = std::abs(s.f_ex);

  const double sign = total_angle < 0.0 ? -1.0 : 1.0;
  const double target = initial.theta_m + total_angle;
  // Steps that end at a mode switch consume only part of their increment, so
  // the loop tracks the consumed motor angle rather than a step count.
  int guard = static_cast<int>(std::ceil(std::abs(total_angle) / opts.max_step)) * 2 + 16;
  while (sign * (target - s.theta_m) > 1e-12 && guard-- > 0) {
    const double d = sign * std::min(opts.max_step, sign * (target - s.theta_m));
    try {
      StepResult r = step(params, s, load, d, opts);
      s = r.state;
      result.switched = result.switched || r.switched;
      result.trace.push_back({s.theta_m, s.mode, s.x_shaft, s.theta_sh, s.f_ex, r.tau_m});
      result.peak_f_ex = std::max(result.peak_f_ex, std::abs(s.f_ex));
    } catch (const StallError& e) {
      s = e.state;
      result.stalled = true;
      result.trace.push_back({s.theta_m, s.mode, s.x_shaft, s.theta_sh, s.f_ex, params.tau_m_max});
      result.peak_f_ex = std::max(result.peak_f_ex, std::abs(s.f_ex));
      break;
    }
  }
  result.final_state = s;
  return result;
}

}  // namespace gripsim
