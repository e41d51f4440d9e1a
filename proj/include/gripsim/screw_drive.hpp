#pragma once

#include <string>
#include <vector>

#include "gripsim/common.hpp"

namespace gripsim {

// Statics and quasi-static stepping of the preloaded screw-drive actuation
// stage: a motor gear drives a threaded shaft whose output is translation
// under light axial load and rotation once the load exceeds the
// preload-governed threshold.

struct ScrewDriveParams {
  double r_g1 = 0.0;         // pitch radius of gear 1 (shaft gear) [mm]
  double r_g2 = 0.0;         // pitch radius of gear 2 (motor gear) [mm]
  double theta_th = 0.0;     // thread lead angle [rad]
  double mu_st = 0.0;        // max static friction coefficient on the thread
  double tau_pre_max = 0.0;  // max static preload friction torque on the shaft [N·mm]
  double tau_m_max = 0.0;    // motor torque limit [N·mm]

  void validate() const;
};

enum class MotionMode { Translation, Rotation };

const char* to_string(MotionMode mode);

struct MechanismState {
  MotionMode mode = MotionMode::Translation;
  double theta_m = 0.0;   // cumulative motor angle [rad]
  double x_shaft = 0.0;   // shaft axial translation [mm]
  double theta_sh = 0.0;  // shaft axial rotation [rad]
  double f_ex = 0.0;      // axial load at the shaft tip [N], + opposes insertion
};

// Abstraction of whatever pushes back on the shaft tip. eval() returns the
// free-path load; the rigid reaction of a HardStop is synthesized in step().
struct LoadModel {
  enum class Kind { Free, LinearSpring, Constant, HardStop };
  Kind kind = Kind::Free;
  double stiffness = 0.0;  // LinearSpring [N/mm]
  double rest = 0.0;       // LinearSpring contact position [mm]
  double force = 0.0;      // Constant [N]
  double position = 0.0;   // HardStop wall position [mm]; blocks +x crossing

  static LoadModel free_load() { return {}; }
  static LoadModel linear_spring(double stiffness, double rest);
  static LoadModel constant(double force);
  static LoadModel hard_stop(double position);

  // One-sided contact: the spring only pushes back once x passes `rest`.
  double eval(double x) const;
  void validate() const;
};

struct ScrewSimOptions {
  double max_step = 0.01;      // per-step motor angle bound [rad]
  double kinetic_ratio = 1.0;  // kinetic/static preload ratio; scales the
                               // rotation->translation switch-back threshold
};

struct StepResult {
  MechanismState state;
  double tau_m = 0.0;           // motor torque implied by the step [N·mm]
  bool switched = false;        // translation -> rotation within this step
  bool switched_back = false;   // rotation -> translation within this step
};

// Raised when the motor cannot supply the torque the blocked shaft demands.
// Carries the last admissible state.
class StallError : public InfeasibleError {
 public:
  StallError(const std::string& what, const MechanismState& state)
      : InfeasibleError(what), state(state) {}
  MechanismState state;
};

struct DesignCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct DesignReport {
  std::vector<DesignCheck> checks;
  double f_ex_sw = 0.0;  // upper bound of the translation load window [N]
  bool all_pass() const;
};

// Torque applied to gear 1 (and hence to the shaft thread) for motor torque tau_m.
double input_torque(const ScrewDriveParams& params, double tau_m);

struct ThreadForces {
  double f_sh = 0.0;    // thrust on the shaft [N]
  double tau_sh = 0.0;  // torque on the shaft [N·mm]
};

// Resolves aggregated thread-contact normal/tangential forces into shaft
// thrust and torque.
ThreadForces thread_statics(double f_n, double f_fri, double theta_th, double r_g1);

// External load magnitude at which translation yields to rotation.
double switching_threshold(const ScrewDriveParams& params);

// Friction torque the preloaded slider must supply to keep the shaft from
// rotating under axial load f_ex.
double required_preload_torque(const ScrewDriveParams& params, double f_ex);

// Static design checks: thread non-self-locking, preload within motor
// authority, and the translation load window. Failures are report entries.
DesignReport validate_design(const ScrewDriveParams& params);

// Advances the mechanism by a motor increment d_theta_m. Exactly one of
// {dx, dtheta_sh} is nonzero per (sub-)step; threshold crossings within a
// step are located analytically and the step is split there.
StepResult step(const ScrewDriveParams& params, const MechanismState& state,
                const LoadModel& load, double d_theta_m, const ScrewSimOptions& opts = {});

struct SweepRecord {
  double theta_m = 0.0;
  MotionMode mode = MotionMode::Translation;
  double x_shaft = 0.0;
  double theta_sh = 0.0;
  double f_ex = 0.0;
  double tau_m = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> trace;
  MechanismState final_state;
  double peak_f_ex = 0.0;
  bool switched = false;  // a translation->rotation switch occurred
  bool stalled = false;   // sweep ended in a motor stall
};

// Monotone motor sweep subdivided to the step bound. A stall truncates the
// sweep and is reported in the result rather than thrown.
SweepResult sweep_motor(const ScrewDriveParams& params, const LoadModel& load,
                        double total_angle, const ScrewSimOptions& opts = {},
                        const MechanismState& initial = {});

}  // namespace gripsim
