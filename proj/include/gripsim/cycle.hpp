#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gripsim/common.hpp"
#include "gripsim/finger.hpp"
#include "gripsim/grasp.hpp"
#include "gripsim/lock.hpp"
#include "gripsim/screw_drive.hpp"

namespace gripsim {

// End-to-end 1-DOF grasp/release cycle: forward motor rotation translates the
// shaft and bends the finger until the torque threshold; reversing retracts
// until the lock engages, forces the drive into rotation, rolls the shaft to
// unlock, and then extends back to the origin.

struct CycleOptions {
  double motor_step = 0.005;  // motor angle per cycle step [rad]
  ScrewSimOptions screw;
  WrapOptions wrap;           // contact handling when an object is present
  SolveOptions solver;
};

struct HandConfig {
  ScrewDriveParams trsw;
  FingerParams finger;
  LockParams lock;
  double tau_th = 100.0;          // grasp-stop motor torque [N·mm]
  int finger_count = 3;
  double finger_strength = 104.2; // breaking force per finger [N]
  CycleOptions options;

  void validate() const;
};

enum class CyclePhase { Grasp, Hold, ReleaseRotate, Extend };

const char* to_string(CyclePhase phase);

struct CycleRecord {
  int step = 0;
  CyclePhase phase = CyclePhase::Grasp;
  double theta_m = 0.0;
  MotionMode mode = MotionMode::Translation;
  double x_shaft = 0.0;
  double theta_sh = 0.0;
  double f_ex = 0.0;
  bool lock_engaged = false;
  double sum_theta = 0.0;
};

struct CycleTrace {
  std::vector<CycleRecord> records;
  int translation_to_rotation = 0;
  int rotation_to_translation = 0;
};

struct CycleEndState {
  MechanismState mech;
  LockState lock;
  double f_tr = 0.0;
  FingerPosture posture;
  std::optional<WrapTermination> wrap_termination;  // set when grasping an object
  std::vector<int> contact_links;
};

struct GraspResult {
  CycleTrace trace;
  CycleEndState end;
};

// Forward motor phase from the straight finger at the origin. Translation
// drives shaft insertion, insertion drives the finger force, and the lock
// ratchets along; stops once the implied motor torque reaches tau_th.
GraspResult grasp_phase(const HandConfig& config,
                        const std::optional<CircularObject>& object = std::nullopt);

// Reverse motor phase: Hold (retraction through the lock backlash),
// ReleaseRotate (blocked translation forces rotation until the roll unlocks),
// Extend (free retraction to the origin, finger straightens). Contacts from a
// grasped object are assumed to separate at the first retraction.
CycleTrace release_phase(const HandConfig& config, const CycleEndState& from);

struct FeasibilityCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<FeasibilityCheck> checks;
  std::string assumption;  // stated, not numerically checked
  bool pass = false;
};

// (a) thread does not self-lock, (b) preload within motor authority,
// (c) the tau_th-implied grasp force stays below the switching threshold.
// The lock is assumed rigid up to finger_strength (recorded as an assumption).
FeasibilityReport check_cycle_feasibility(const HandConfig& config);

// Theoretical payload from per-finger breaking force [kg].
double payload_estimate(int finger_count, double finger_strength_newton);
double payload_estimate(const HandConfig& config);

// Shaft insertion consumed by a posture: d_L * sum(theta) under the
// shaft-parallel assumption.
double insertion_of_posture(const FingerParams& params, const FingerPosture& posture);

}  // namespace gripsim
