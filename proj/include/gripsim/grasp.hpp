#pragma once

#include <vector>

#include "gripsim/common.hpp"
#include "gripsim/finger.hpp"
#include "gripsim/screw_drive.hpp"

namespace gripsim {

// Quasi-static cylinder-wrap simulation: the insertion force ramps up and
// joints freeze one by one as their links reach the object surface
// (freeze-on-contact), until the motor torque threshold, a full wrap, or a
// fingertip collision ends the adaptation.

struct CircularObject {
  Vec2 center{0.0, 0.0};  // in the finger base frame [mm]
  double diameter = 0.0;  // [mm]

  double radius() const { return diameter / 2.0; }
  void validate() const;
};

// Default placement: center above the finger axis at radius + clearance,
// one link length along the finger unless center_x is given.
CircularObject default_object_placement(const FingerParams& params, double diameter,
                                        double clearance = 2.0, double center_x = -1.0);

// Per-link penetration depth into the object, max(0, radius - distance).
// Segment i spans pin i to pin i+1; the last segment is the fingertip.
std::vector<double> link_penetration(const FingerParams& params, const FingerPosture& posture,
                                     const CircularObject& object, double tip_length = -1.0);

enum class WrapTermination { TorqueThreshold, FullWrap, FingertipCollision };

const char* to_string(WrapTermination t);

struct WrapOptions {
  double force_step = 0.05;       // insertion force increment [N]
  double penetration_tol = 1e-2;  // max admissible penetration [mm]
  double contact_tol = 5e-2;      // surface distance that counts as contact [mm]
  double tip_length = -1.0;       // fingertip segment length; l_L if negative
  SolveOptions solver;
};

struct WrapStepRecord {
  double f_tr = 0.0;
  int frozen_count = 0;
  double max_penetration = 0.0;
  double sum_theta = 0.0;
};

struct WrapResult {
  FingerPosture posture;
  ShaftForceDistribution dist;
  FrozenJoints frozen;
  std::vector<int> contact_links;  // 1-based link indices, ascending
  double f_tr_final = 0.0;
  WrapTermination terminated_by = WrapTermination::TorqueThreshold;
  std::vector<WrapStepRecord> trace;
};

// Incremental-loading contact bookkeeping shared by wrap_simulate and the
// grasp phase of the hand cycle. Loading must be monotone non-decreasing.
class ContactTracker {
 public:
  ContactTracker(const FingerParams& params, const CircularObject& object,
                 const WrapOptions& options);

  // Raises the insertion force to f_target, freezing joints at the loads
  // where their links first touch. Returns false once the wrap is over
  // (full wrap or fingertip collision); the caller stops loading then.
  bool advance_to(double f_target);

  const SolveResult& current() const { return current_; }
  double current_force() const { return f_current_; }
  const FrozenJoints& frozen() const { return frozen_; }
  bool full_wrap() const { return full_wrap_; }
  bool tip_collision() const { return tip_collision_; }
  std::vector<int> contact_links() const;
  double max_penetration() const;

 private:
  SolveResult solve_at(double f_tr) const;
  // Most distal free joint at or proximal to link (1-based); -1 if none.
  int freeze_candidate(int link) const;

  FingerParams params_;
  CircularObject object_;
  WrapOptions options_;
  FrozenJoints frozen_;
  SolveResult current_;
  double f_current_ = 0.0;
  bool full_wrap_ = false;
  bool tip_collision_ = false;
  bool have_warm_ = false;
};

// Ramps f_tr in force_step increments until the implied motor torque reaches
// tau_th, all joints freeze, or the fingertip collides. The implied torque is
// r_g2 * tan(theta_th) * f_tr as transmitted by the screw drive.
WrapResult wrap_simulate(const FingerParams& params, const CircularObject& object,
                         const ScrewDriveParams& trsw, double tau_th,
                         const WrapOptions& options = {});

}  // namespace gripsim
