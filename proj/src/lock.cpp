#include "gripsim/lock.hpp"

#include <algorithm>
#include <cmath>

namespace gripsim {

namespace {
constexpr double kEngageTol = 1e-6;  // face-meets-face position tolerance [mm]
}

void LockParams::validate() const {
  if (!(protrusion_pitch > 0.0)) throw ConfigError("lock: protrusion pitch must be > 0");
  if (protrusion_count < 1) throw ConfigError("lock: protrusion count must be >= 1");
  if (pawl_positions.empty()) throw ConfigError("lock: at least one pawl required");
  if (pawl_positions.size() % 2 != 0)
    throw ConfigError("lock: pawls come in pairs (two per link)");
  for (size_t i = 0; i + 1 < pawl_positions.size(); i += 2) {
    if (!(pawl_positions[i] < pawl_positions[i + 1]))
      throw ConfigError("lock: pawl positions must be strictly increasing within a link");
  }
  if (roll_tolerance < 0.0 || roll_tolerance >= kPi / 4.0)
    throw ConfigError("lock: roll tolerance out of range");
}

std::vector<double> default_pawl_positions(int links, double link_length, double pitch,
                                           double offset) {
  std::vector<double> p;
  p.reserve(static_cast<size_t>(links) * 2);
  for (int i = 0; i < links; ++i) {
    const double base = i * link_length + offset;
    p.push_back(base);
    p.push_back(base + pitch / 2.0);
  }
  return p;
}

const char* to_string(LockMode mode) {
  return mode == LockMode::SelfLocking ? "self_locking" : "unlocking";
}

LockMode classify_roll(const LockParams& params, double roll) {
  // Distance to the unlock angle modulo pi (rectangular cross-section).
  double d = std::fmod(std::abs(roll - params.unlock_roll_angle), kPi);
  d = std::min(d, kPi - d);
  return d <= params.roll_tolerance ? LockMode::Unlocking : LockMode::SelfLocking;
}

LockState initial_lock_state(const LockParams& params) {
  LockState st;
  st.mode = classify_roll(params, 0.0);
  return st;
}

namespace {

// Highest engagement position <= s (+tolerance), with the pair realizing it.
struct Engagement {
  bool found = false;
  double position = 0.0;
  int protrusion = 0;
  int pawl = 0;
};

Engagement nearest_engagement_below(const LockParams& params, double s) {
  Engagement best;
  for (size_t k = 0; k < params.pawl_positions.size(); ++k) {
    const double q = params.pawl_positions[k];
    // Protrusion j sits at s - j*pitch; it engages pawl q when s = q + j*pitch.
    const double j_real = std::floor((s + kEngageTol - q) / params.protrusion_pitch);
    if (j_real < 0.0) continue;
    const int j = std::min(static_cast<int>(j_real), params.protrusion_count - 1);
    const double e = q + j * params.protrusion_pitch;
    if (e > s + kEngageTol) continue;
    if (!best.found || e > best.position + kEngageTol ||
        (std::abs(e - best.position) <= kEngageTol &&
         (static_cast<int>(k) < best.pawl ||
          (static_cast<int>(k) == best.pawl && j < best.protrusion)))) {
      best.found = true;
      best.position = e;
      best.protrusion = j;
      best.pawl = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

LockState advance(const LockParams& params, const LockState& state, double dx) {
  params.validate();
  if (!(dx > 0.0)) throw ConfigError("lock advance: dx must be > 0");
  if (state.s + dx > params.travel_range() + kEngageTol)
    throw ConfigError("lock advance: travel range exceeded");
  LockState st = state;
  st.s += dx;
  st.engaged = false;
  st.engaged_pair.reset();
  return st;
}

RetractResult retract(const LockParams& params, const LockState& state, double dx) {
  params.validate();
  if (!(dx > 0.0)) throw ConfigError("lock retract: dx must be > 0");
  RetractResult r;
  r.state = state;
  if (state.mode == LockMode::Unlocking) {
    r.state.s -= dx;
    r.state.engaged = false;
    r.state.engaged_pair.reset();
    r.travel = dx;
    r.blocked = false;
    return r;
  }
  const Engagement e = nearest_engagement_below(params, state.s);
  const double gap = e.found ? std::max(0.0, state.s - e.position) : state.s;
  r.travel = std::min(dx, gap);
  r.state.s = state.s - r.travel;
  r.blocked = r.travel < dx - kEngageTol;
  if (e.found && r.state.s <= e.position + kEngageTol) {
    r.state.engaged = true;
    r.state.engaged_pair = std::make_pair(e.protrusion, e.pawl);
  } else {
    r.state.engaged = false;
    r.state.engaged_pair.reset();
  }
  return r;
}

LockState set_roll(const LockParams& params, const LockState& state, double roll) {
  params.validate();
  LockState st = state;
  st.roll = roll;
  st.mode = classify_roll(params, roll);
  if (st.mode == LockMode::Unlocking) {
    st.engaged = false;
    st.engaged_pair.reset();
  }
  return st;
}

double backlash(const LockParams& params, const LockState& state) {
  params.validate();
  if (state.mode != LockMode::SelfLocking)
    throw ConfigError("backlash: undefined in unlocking mode");
  if (state.engaged) return 0.0;
  const Engagement e = nearest_engagement_below(params, state.s);
  if (!e.found) return state.s;  // free retraction all the way to the origin
  return std::max(0.0, state.s - e.position);
}

}  // namespace gripsim
