#include "gripsim/cycle.hpp"

#include <algorithm>
#include <cmath>

#include "gripsim/io.hpp"

namespace gripsim {

void HandConfig::validate() const {
  trsw.validate();
  finger.validate();
  lock.validate();
  if (!(tau_th > 0.0)) throw ConfigError("hand: tau_th must be > 0");
  if (!(tau_th < trsw.tau_m_max)) throw ConfigError("hand: tau_th must be below tau_m_max");
  if (finger_count < 0) throw ConfigError("hand: finger_count must be >= 0");
  if (!(finger_strength > 0.0)) throw ConfigError("hand: finger_strength must be > 0");
  if (!(options.motor_step > 0.0)) throw ConfigError("hand: motor step must be > 0");
}

const char* to_string(CyclePhase phase) {
  switch (phase) {
    case CyclePhase::Grasp: return "grasp";
    case CyclePhase::Hold: return "hold";
    case CyclePhase::ReleaseRotate: return "release_rotate";
    case CyclePhase::Extend: return "extend";
  }
  return "?";
}

double insertion_of_posture(const FingerParams& params, const FingerPosture& posture) {
  return params.d_L * posture.total_bend();
}

double payload_estimate(int finger_count, double finger_strength_newton) {
  if (finger_count < 0) throw ConfigError("payload_estimate: finger_count must be >= 0");
  if (!(finger_strength_newton > 0.0))
    throw ConfigError("payload_estimate: finger_strength must be > 0");
  return finger_count * finger_strength_newton / kGravity;
}

double payload_estimate(const HandConfig& config) {
  return payload_estimate(config.finger_count, config.finger_strength);
}

namespace {

// Monotone map between insertion force and consumed shaft insertion,
// warm-started along the loading path.
class InsertionSolver {
 public:
  InsertionSolver(const FingerParams& params, const SolveOptions& options,
                  const FrozenJoints* frozen = nullptr)
      : params_(params), options_(options), frozen_(frozen) {}

  void set_frozen(const FrozenJoints* frozen) {
    frozen_ = frozen;
    have_last_ = false;
  }

  const SolveResult& solve(double f) {
    if (!have_last_ || last_f_ != f) {
      last_ = have_last_ ? solve_posture(params_, f, options_, frozen_, &last_.dist)
                         : solve_posture(params_, f, options_, frozen_);
      last_f_ = f;
      have_last_ = true;
    }
    return last_;
  }

  double insertion(double f) { return insertion_of_posture(params_, solve(f).posture); }

  // Inverse of insertion(): regula falsi with bracket expansion.
  double force_for(double x) {
    if (x <= 1e-14) return 0.0;
    const double tol = 1e-10 * std::max(1.0, x);
    double lo = 0.0, u_lo = frozen_base_insertion();
    if (x <= u_lo + tol) return 0.0;
    double hi = std::max(last_f_ > 0.0 && have_last_ ? last_f_ : 0.0, 1e-3);
    double u_hi = insertion(hi);
    int guard = 0;
    while (u_hi < x && guard++ < 200) {
      lo = hi;
      u_lo = u_hi;
      hi *= 2.0;
      u_hi = insertion(hi);
    }
    if (u_hi < x) throw SolverError("insertion inversion: bracket expansion failed", x, u_hi - x);
    double f = hi;
    for (int it = 0; it < 200; ++it) {
      f = u_hi > u_lo ? lo + (x - u_lo) * (hi - lo) / (u_hi - u_lo) : 0.5 * (lo + hi);
      f = std::clamp(f, lo, hi);
      const double u = insertion(f);
      if (std::abs(u - x) <= tol) return f;
      if (u < x) {
        lo = f;
        u_lo = u;
      } else {
        hi = f;
        u_hi = u;
      }
      if (hi - lo <= 1e-13 * std::max(1.0, hi)) return f;
    }
    return f;
  }

 private:
  // Insertion at f = 0: free joints relax to zero, frozen angles persist.
  double frozen_base_insertion() {
    if (!frozen_) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < frozen_->frozen.size(); ++i)
      if (frozen_->frozen[i]) s += frozen_->theta[i];
    return params_.d_L * s;
  }

  FingerParams params_;
  SolveOptions options_;
  const FrozenJoints* frozen_ = nullptr;
  SolveResult last_;
  double last_f_ = -1.0;
  bool have_last_ = false;
};

void push_record(CycleTrace& trace, CyclePhase phase, const MechanismState& mech,
                 bool lock_engaged, double sum_theta) {
  if (!trace.records.empty()) {
    const auto& prev = trace.records.back();
    if (prev.mode == MotionMode::Translation && mech.mode == MotionMode::Rotation)
      ++trace.translation_to_rotation;
    if (prev.mode == MotionMode::Rotation && mech.mode == MotionMode::Translation)
      ++trace.rotation_to_translation;
  }
  CycleRecord r;
  r.step = static_cast<int>(trace.records.size());
  r.phase = phase;
  r.theta_m = mech.theta_m;
  r.mode = mech.mode;
  r.x_shaft = mech.x_shaft;
  r.theta_sh = mech.theta_sh;
  r.f_ex = mech.f_ex;
  r.lock_engaged = lock_engaged;
  r.sum_theta = sum_theta;
  trace.records.push_back(r);
}

}  // namespace

GraspResult grasp_phase(const HandConfig& config, const std::optional<CircularObject>& object) {
  config.validate();
  const DesignReport design = validate_design(config.trsw);
  if (!design.all_pass()) {
    std::string what = "grasp_phase: screw-drive design checks failed:";
    for (const auto& c : design.checks)
      if (!c.pass) what += " " + c.name;
    throw InfeasibleError(what);
  }

  const double tan_th = std::tan(config.trsw.theta_th);
  const double gear = config.trsw.r_g2 / config.trsw.r_g1;
  const double dx_per_step = config.trsw.r_g1 * tan_th * gear * config.options.motor_step;
  const double f_sw = switching_threshold(config.trsw);
  const double torque_per_force = config.trsw.r_g2 * tan_th;  // tau_m = this * f_tr

  GraspResult out;
  MechanismState mech;
  LockState lock = initial_lock_state(config.lock);

  WrapOptions wrap_options = config.options.wrap;
  wrap_options.solver = config.options.solver;
  std::optional<ContactTracker> tracker;
  if (object) tracker.emplace(config.finger, *object, wrap_options);

  InsertionSolver inserter(config.finger, config.options.solver,
                           tracker ? &tracker->frozen() : nullptr);
  SolveResult posture_solution = inserter.solve(0.0);
  push_record(out.trace, CyclePhase::Grasp, mech, lock.engaged, 0.0);

  bool adaptation_over = false;
  const int max_steps = 2000000;
  for (int i = 0; i < max_steps; ++i) {
    mech.theta_m += config.options.motor_step;
    mech.x_shaft += dx_per_step;
    lock = advance(config.lock, lock, dx_per_step);

    double f = inserter.force_for(mech.x_shaft);
    if (tracker && !adaptation_over) {
      // Contact events shift the insertion/force map; iterate until the
      // frozen set is stable at this insertion depth.
      for (int pass = 0; pass < config.finger.n + 2; ++pass) {
        const size_t frozen_before =
            static_cast<size_t>(std::count(tracker->frozen().frozen.begin(),
                                           tracker->frozen().frozen.end(), 1));
        if (f > tracker->current_force()) {
          if (!tracker->advance_to(f)) adaptation_over = true;
        }
        const size_t frozen_after =
            static_cast<size_t>(std::count(tracker->frozen().frozen.begin(),
                                           tracker->frozen().frozen.end(), 1));
        if (frozen_after == frozen_before) break;
        inserter.set_frozen(&tracker->frozen());
        f = inserter.force_for(mech.x_shaft);
        if (adaptation_over) break;
      }
      if (adaptation_over) f = tracker->current_force();
    }

    posture_solution = inserter.solve(f);
    mech.f_ex = f;
    mech.mode = MotionMode::Translation;
    if (std::abs(f) >= f_sw) {
      throw InfeasibleError(
          "grasp_phase: insertion load reached the switching threshold mid-grasp "
          "(tau_pre_max too low for tau_th)");
    }
    push_record(out.trace, CyclePhase::Grasp, mech, lock.engaged,
                posture_solution.posture.total_bend());

    const double tau_m = torque_per_force * f;
    if (tau_m >= config.tau_th || adaptation_over) break;
  }

  out.end.mech = mech;
  out.end.lock = lock;
  out.end.f_tr = mech.f_ex;
  out.end.posture = posture_solution.posture;
  if (tracker) {
    out.end.contact_links = tracker->contact_links();
    if (tracker->tip_collision()) {
      out.end.wrap_termination = WrapTermination::FingertipCollision;
    } else if (tracker->full_wrap()) {
      out.end.wrap_termination = WrapTermination::FullWrap;
    } else {
      out.end.wrap_termination = WrapTermination::TorqueThreshold;
    }
  }
  return out;
}

CycleTrace release_phase(const HandConfig& config, const CycleEndState& from) {
  config.validate();
  const FeasibilityReport feasibility = check_cycle_feasibility(config);
  if (!feasibility.pass) {
    std::string what = "release_phase: infeasible cycle:";
    for (const auto& c : feasibility.checks)
      if (!c.pass) what += " " + c.name;
    throw InfeasibleError(what);
  }

  const double tan_th = std::tan(config.trsw.theta_th);
  const double gear = config.trsw.r_g2 / config.trsw.r_g1;
  const double dx_per_step = config.trsw.r_g1 * tan_th * gear * config.options.motor_step;
  const double f_sw = switching_threshold(config.trsw);
  const double f_exit = config.options.screw.kinetic_ratio * f_sw;
  const double tau_rot = gear * config.trsw.tau_pre_max * config.options.screw.kinetic_ratio;

  CycleTrace trace;
  MechanismState mech = from.mech;
  LockState lock = from.lock;
  // Contacts separate on unloading: the release path uses the free finger.
  InsertionSolver inserter(config.finger, config.options.solver);

  auto sum_theta_at = [&](double x) {
    const double f = inserter.force_for(x);
    return inserter.solve(f).posture.total_bend();
  };

  mech.f_ex = inserter.force_for(mech.x_shaft);
  push_record(trace, CyclePhase::Hold, mech, lock.engaged, sum_theta_at(mech.x_shaft));

  const int max_steps = 2000000;
  int steps = 0;

  // --- Hold: retract until the lock engages (skipped if already unlocked).
  while (lock.mode == LockMode::SelfLocking && !lock.engaged && mech.x_shaft > 1e-12) {
    if (++steps > max_steps) throw SolverError("release_phase: hold did not terminate", 0, 0);
    const double want = std::min(dx_per_step, mech.x_shaft);
    const RetractResult r = retract(config.lock, lock, want);
    lock = r.state;
    mech.x_shaft -= r.travel;
    mech.theta_m -= config.options.motor_step * (want > 0.0 ? r.travel / dx_per_step : 0.0);
    mech.mode = MotionMode::Translation;
    mech.f_ex = inserter.force_for(mech.x_shaft);
    push_record(trace, CyclePhase::Hold, mech, lock.engaged, sum_theta_at(mech.x_shaft));
    if (r.blocked) break;
  }

  // --- ReleaseRotate: blocked translation forces rotation; roll to unlock.
  if (lock.mode == LockMode::SelfLocking && lock.engaged) {
    if (tau_rot > config.trsw.tau_m_max * (1.0 + 1e-12)) {
      throw InfeasibleError(
          "release_phase: motor stall in release (preload exceeds motor authority)");
    }
    const double hold_f = inserter.force_for(mech.x_shaft);
    while (lock.mode == LockMode::SelfLocking) {
      if (++steps > max_steps)
        throw SolverError("release_phase: unlock roll did not terminate", 0, 0);
      mech.theta_m -= config.options.motor_step;
      mech.theta_sh -= gear * config.options.motor_step;
      mech.mode = MotionMode::Rotation;
      // Torsionally rigid coupling: the flexible-shaft roll equals theta_sh.
      lock = set_roll(config.lock, lock, mech.theta_sh);
      mech.f_ex = -f_sw;  // lock reaction resisting retraction at the slip level
      push_record(trace, CyclePhase::ReleaseRotate, mech, lock.engaged,
                  sum_theta_at(mech.x_shaft));
    }
    if (std::abs(hold_f) >= f_exit) {
      throw InfeasibleError("release_phase: finger load still above the switch-back threshold");
    }
  }

  // --- Extend: free retraction back to the origin.
  while (mech.x_shaft > 1e-12) {
    if (++steps > max_steps) throw SolverError("release_phase: extend did not terminate", 0, 0);
    const double want = std::min(dx_per_step, mech.x_shaft);
    if (lock.mode == LockMode::Unlocking) {
      const RetractResult r = retract(config.lock, lock, want);
      lock = r.state;
    }
    mech.x_shaft -= want;
    mech.theta_m -= config.options.motor_step * (want / dx_per_step);
    mech.mode = MotionMode::Translation;
    mech.f_ex = inserter.force_for(mech.x_shaft);
    push_record(trace, CyclePhase::Extend, mech, lock.engaged, sum_theta_at(mech.x_shaft));
  }

  return trace;
}

FeasibilityReport check_cycle_feasibility(const HandConfig& config) {
  config.validate();
  FeasibilityReport report;
  const DesignReport design = validate_design(config.trsw);
  for (const auto& c : design.checks) {
    if (c.name == "translation_load_window") continue;
    report.checks.push_back({c.name, c.pass, c.margin, c.detail});
  }

  const double f_sw = switching_threshold(config.trsw);
  const double f_grasp = config.tau_th / (config.trsw.r_g2 * std::tan(config.trsw.theta_th));
  FeasibilityCheck c;
  c.name = "grasp_stays_translational";
  c.margin = f_sw - f_grasp;
  c.pass = f_grasp < f_sw;
  c.detail = "tau_th-implied grasp force below the switching threshold";
  report.checks.push_back(c);

  report.assumption =
      "lock blocking capacity is treated as rigid up to finger_strength; not checked numerically";
  report.pass = true;
  for (const auto& ck : report.checks) report.pass = report.pass && ck.pass;
  return report;
}

}  // namespace gripsim
