#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gripsim/common.hpp"

namespace gripsim {

// Discrete state machine of the self-locking mechanism: rectangular shaft
// protrusions ratchet over spring-loaded pawls. Advancing (flexion) is always
// free; retraction (extension) is arrested at the nearest protrusion/pawl
// engagement unless the shaft is rolled into the unlocking orientation.
// Axial positions are arc length along the finger path.

struct LockParams {
  double protrusion_pitch = 4.0;            // axial spacing between protrusions [mm]
  int protrusion_count = 30;
  std::vector<double> pawl_positions;       // pawl axial positions [mm], two per link,
                                            // strictly increasing within a link
  double unlock_roll_angle = kPi / 2.0;     // roll that disengages (mod pi) [rad]
  double roll_tolerance = 0.1;              // classification band around the unlock angle [rad]

  double travel_range() const { return protrusion_pitch * protrusion_count; }
  void validate() const;
};

// Two pawls per link, staggered by half a pitch.
std::vector<double> default_pawl_positions(int links, double link_length, double pitch,
                                           double offset = 1.0);

enum class LockMode { SelfLocking, Unlocking };

const char* to_string(LockMode mode);

struct LockState {
  double s = 0.0;        // shaft axial position [mm], + toward the fingertip
  double roll = 0.0;     // shaft roll angle [rad]
  LockMode mode = LockMode::SelfLocking;  // derived from roll
  bool engaged = false;
  // (protrusion index, pawl index) of the blocking pair when engaged.
  std::optional<std::pair<int, int>> engaged_pair;
};

// Classifies roll into SelfLocking/Unlocking; period pi for the rectangular
// protrusion cross-section.
LockMode classify_roll(const LockParams& params, double roll);

LockState initial_lock_state(const LockParams& params);

// Flexion-direction travel; never blocked, ratcheting over the pawls.
LockState advance(const LockParams& params, const LockState& state, double dx);

struct RetractResult {
  LockState state;
  bool blocked = false;  // engagement arrested the motion short of dx
  double travel = 0.0;   // distance actually retracted [mm]
};

// Extension-direction travel: free in Unlocking mode, otherwise limited by
// the nearest engagement.
RetractResult retract(const LockParams& params, const LockState& state, double dx);

LockState set_roll(const LockParams& params, const LockState& state, double roll);

// Retraction distance to the nearest protrusion/pawl engagement (0 when
// engaged). Only defined in SelfLocking mode.
double backlash(const LockParams& params, const LockState& state);

}  // namespace gripsim
