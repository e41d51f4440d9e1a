#include "gripsim/grasp.hpp"

#include <algorithm>
#include <cmath>

#include "gripsim/io.hpp"

namespace gripsim {

void CircularObject::validate() const {
  if (!(diameter > 0.0)) throw ConfigError("object: diameter must be > 0");
}

CircularObject default_object_placement(const FingerParams& params, double diameter,
                                        double clearance, double center_x) {
  CircularObject obj;
  obj.diameter = diameter;
  // Palm-normal axis crosses mid-grasp; the surface clears the proximal link
  // by `clearance`.
  obj.center = {center_x >= 0.0 ? center_x : 2.5 * params.l_L, diameter / 2.0 + clearance};
  return obj;
}

namespace {

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

std::vector<double> link_penetration(const FingerParams& params, const FingerPosture& posture,
                                     const CircularObject& object, double tip_length) {
  object.validate();
  const Kinematics kin = forward_kinematics(params, posture, tip_length);
  const size_t n = kin.pins.size();
  std::vector<double> depth(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = kin.pins[i];
    const Vec2 b = (i + 1 < n) ? kin.pins[i + 1] : kin.tip;
    const double dist = segment_distance(a, b, object.center);
    depth[i] = std::max(0.0, object.radius() - dist);
  }
  return depth;
}

const char* to_string(WrapTermination t) {
  switch (t) {
    case WrapTermination::TorqueThreshold: return "torque_threshold";
    case WrapTermination::FullWrap: return "full_wrap";
    case WrapTermination::FingertipCollision: return "fingertip_collision";
  }
  return "?";
}

ContactTracker::ContactTracker(const FingerParams& params, const CircularObject& object,
                               const WrapOptions& options)
    : params_(params), object_(object), options_(options), frozen_(FrozenJoints::none(params.n)) {
  params_.validate();
  object_.validate();
  if (options_.tip_length < 0.0) options_.tip_length = params_.l_L;
  current_ = solve_at(0.0);
  const std::vector<double> pen =
      link_penetration(params_, current_.posture, object_, options_.tip_length);
  if (*std::max_element(pen.begin(), pen.end()) > options_.penetration_tol)
    throw ConfigError("ContactTracker: object overlaps the unloaded finger");
}

SolveResult ContactTracker::solve_at(double f_tr) const {
  // Continuation along the loading path: warm-start from the last optimum so
  // the posture evolves continuously through contact events.
  if (have_warm_) return solve_posture(params_, f_tr, options_.solver, &frozen_, &current_.dist);
  return solve_posture(params_, f_tr, options_.solver, &frozen_);
}

int ContactTracker::freeze_candidate(int link) const {
  for (int j = link; j >= 1; --j) {
    if (!frozen_.frozen[static_cast<size_t>(j - 1)]) return j;
  }
  return -1;
}

std::vector<int> ContactTracker::contact_links() const {
  const std::vector<double> pen =
      link_penetration(params_, current_.posture, object_, options_.tip_length);
  const Kinematics kin = forward_kinematics(params_, current_.posture, options_.tip_length);
  std::vector<int> links;
  for (size_t i = 0; i < pen.size(); ++i) {
    const Vec2& a = kin.pins[i];
    const Vec2 b = (i + 1 < pen.size()) ? kin.pins[i + 1] : kin.tip;
    const double dist = segment_distance(a, b, object_.center);
    if (dist <= object_.radius() + options_.contact_tol)
      links.push_back(static_cast<int>(i) + 1);
  }
  return links;
}

double ContactTracker::max_penetration() const {
  const std::vector<double> pen =
      link_penetration(params_, current_.posture, object_, options_.tip_length);
  return *std::max_element(pen.begin(), pen.end());
}

bool ContactTracker::advance_to(double f_target) {
  if (f_target < f_current_ - 1e-15) throw ConfigError("ContactTracker: loading must be monotone");
  const int n = params_.n;
  const double tol = options_.penetration_tol;

  // Max penetration over links that can still be arrested by freezing a
  // joint. Links whose whole proximal joint chain is frozen have a fixed
  // pose and stay at the depth they were frozen with (<= tol).
  const auto freezable_worst = [&](const FingerPosture& posture) {
    const std::vector<double> pen = link_penetration(params_, posture, object_, options_.tip_length);
    int link = -1;
    double depth = 0.0;
    for (int i = 0; i < n; ++i) {
      if (freeze_candidate(i + 1) < 0) continue;
      if (pen[static_cast<size_t>(i)] > depth) {
        depth = pen[static_cast<size_t>(i)];
        link = i + 1;
      }
    }
    return std::make_pair(link, depth);
  };

  const auto any_proximal_free = [&] {
    for (int j = 1; j < n; ++j)
      if (!frozen_.frozen[static_cast<size_t>(j - 1)]) return true;
    return false;
  };

  // Clamping a joint shifts the optimum discontinuously at constant load, so
  // contact events are located geometrically: bisect along the straight-line
  // posture interpolation between the last clean equilibrium and the
  // violating one, and freeze at the interpolated touch angle.
  for (int guard = 0; guard < 2 * n + 4; ++guard) {
    SolveResult trial = solve_at(f_target);
    have_warm_ = true;
    const auto [worst_link, worst_depth] = freezable_worst(trial.posture);

    if (worst_link < 0 || worst_depth <= tol) {
      current_ = std::move(trial);
      f_current_ = f_target;
      return !tip_collision_ && !full_wrap_;
    }

    const FingerPosture& clean = current_.posture;
    FingerPosture probe = clean;
    double lo = 0.0, hi = 1.0;
    int crossing_link = worst_link;
    FingerPosture touch = clean;
    for (int it = 0; it < 80; ++it) {
      const double t = 0.5 * (lo + hi);
      for (size_t k = 0; k < probe.theta.size(); ++k)
        probe.theta[k] = (1.0 - t) * clean.theta[k] + t * trial.posture.theta[k];
      const auto [link, depth] = freezable_worst(probe);
      if (link >= 0 && depth > tol) {
        hi = t;
        crossing_link = link;
      } else {
        lo = t;
        touch = probe;
      }
    }

    // Fingertip segment contact ends the wrap while proximal joints are free;
    // the last clean equilibrium is the reported posture.
    if (crossing_link == n && any_proximal_free()) {
      tip_collision_ = true;
      return false;
    }

    const int joint = freeze_candidate(crossing_link);
    if (joint < 0)
      throw SolverError("ContactTracker: no free joint left to arrest contact", f_current_, 0.0);
    frozen_.frozen[static_cast<size_t>(joint - 1)] = 1;
    frozen_.theta[static_cast<size_t>(joint - 1)] = touch.theta[static_cast<size_t>(joint - 1)];
    log_debug("contact: link " + std::to_string(crossing_link) + " froze joint " +
              std::to_string(joint) + " near f_tr " + format_float(f_target));
    if (frozen_.all()) {
      full_wrap_ = true;
      current_ = solve_at(f_target);
      f_current_ = f_target;
      return false;
    }
  }
  throw SolverError("ContactTracker: contact resolution did not settle", f_current_, 0.0);
}

WrapResult wrap_simulate(const FingerParams& params, const CircularObject& object,
                         const ScrewDriveParams& trsw, double tau_th,
                         const WrapOptions& options) {
  trsw.validate();
  if (!(tau_th > 0.0)) throw ConfigError("wrap_simulate: tau_th must be > 0");
  if (!(options.force_step > 0.0)) throw ConfigError("wrap_simulate: force step must be > 0");

  // Motor torque implied by insertion force: tau_m = r_g2 tan(theta_th) f_tr.
  const double conversion = trsw.r_g2 * std::tan(trsw.theta_th);
  const double f_max = tau_th / conversion;

  ContactTracker tracker(params, object, options);
  WrapResult result;
  bool keep_going = true;
  double f = 0.0;
  while (keep_going && f < f_max - 1e-12) {
    f = std::min(f + options.force_step, f_max);
    keep_going = tracker.advance_to(f);
    result.trace.push_back({tracker.current_force(),
                            static_cast<int>(std::count(tracker.frozen().frozen.begin(),
                                                        tracker.frozen().frozen.end(), 1)),
                            tracker.max_penetration(), tracker.current().posture.total_bend()});
  }

  result.posture = tracker.current().posture;
  result.dist = tracker.current().dist;
  result.frozen = tracker.frozen();
  result.contact_links = tracker.contact_links();
  result.f_tr_final = tracker.current_force();
  if (tracker.tip_collision()) {
    result.terminated_by = WrapTermination::FingertipCollision;
  } else if (tracker.full_wrap()) {
    result.terminated_by = WrapTermination::FullWrap;
  } else {
    result.terminated_by = WrapTermination::TorqueThreshold;
  }
  return result;
}

}  // namespace gripsim
