// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <vector>

#include "gripsim/finger.hpp"

namespace gripsim::oracle {

// Exhaustive grid search over the force simplex {f >= 0, sum f = f_tr} at
// resolution f_tr/steps, minimizing the same objective the solver minimizes.
// Independent of the projected-descent path in solve_posture.
struct GridMinimum {
  double objective = 0.0;
  std::vector<double> f;
};

inline GridMinimum grid_search(const FingerParams& params, double f_tr, int steps,
                               const SolveOptions& options = {}) {
  const int n = params.n;
  GridMinimum best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> counts(static_cast<size_t>(n), 0);
  ShaftForceDistribution dist;
  dist.f.assign(static_cast<size_t>(n), 0.0);

  // Enumerate compositions of `steps` into n parts.
  std::vector<int> idx(static_cast<size_t>(n - 1), 0);
  const double delta = f_tr / steps;
  while (true) {
    int used = 0;
    for (int i = 0; i < n - 1; ++i) used += idx[static_cast<size_t>(i)];
    if (used <= steps) {
      for (int i = 0; i < n - 1; ++i) dist.f[static_cast<size_t>(i)] = idx[static_cast<size_t>(i)] * delta;
      dist.f[static_cast<size_t>(n - 1)] = (steps - used) * delta;
      const double obj = force_objective(params, f_tr, dist, options);
      if (obj < best.objective) {
        best.objective = obj;
        best.f = dist.f;
      }
    }
    // Next composition.
    int pos = 0;
    while (pos < n - 1) {
      ++idx[static_cast<size_t>(pos)];
      int total = 0;
      for (int i = 0; i < n - 1; ++i) total += idx[static_cast<size_t>(i)];
      if (total <= steps) break;
      idx[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos >= n - 1) break;
  }
  return best;
}

// World-frame re-derivation of the per-link force and moment balances from a
// solution (theta, f, f_L, m_L). Returns the largest absolute residual
// (forces in N, moments in N·mm). Arithmetic path is distinct from the
// recursion: everything is rotated into the base frame first.
inline double equilibrium_residual(const FingerParams& params, const FingerPosture& posture,
                                   const ShaftForceDistribution& dist, const JointLoads& loads) {
  const int n = params.n;
  std::vector<double> alpha(static_cast<size_t>(n), 0.0);  // world angle of link i
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += posture.theta[static_cast<size_t>(i)];
    alpha[static_cast<size_t>(i)] = acc;
  }
  std::vector<Vec2> pins(static_cast<size_t>(n), Vec2{0.0, 0.0});
  for (int i = 1; i < n; ++i) {
    pins[static_cast<size_t>(i)] =
        pins[static_cast<size_t>(i - 1)] +
        params.l_L * Vec2{std::cos(alpha[static_cast<size_t>(i - 1)]),
                          std::sin(alpha[static_cast<size_t>(i - 1)])};
  }

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    // Pin force on link i from link i-1, rotated to the world frame.
    const Vec2 w_i = rotate(loads.f_L[k], alpha[k]);
    const Vec2 w_next = (i + 1 < n) ? rotate(loads.f_L[k + 1], alpha[k + 1]) : Vec2{0.0, 0.0};
    const Vec2 shaft = rotate(Vec2{dist.f[k], 0.0}, alpha[k]);

    // Force balance: pin reaction + shaft drag - distal reaction = 0.
    const Vec2 fres = w_i - w_next + shaft;
    worst = std::max({worst, std::abs(fres[0]), std::abs(fres[1])});

    // Moment balance about pin i: own spring opposes flexion, the distal
    // spring reacts positively, the shaft drags at offset d_L, and the distal
    // pin reaction acts at the far pin.
    double m = -loads.m_L[k] + params.d_L * dist.f[k];
    if (i + 1 < n) {
      m += loads.m_L[k + 1];
      const Vec2 r = pins[k + 1] - pins[k];
      m += cross(r, -1.0 * w_next);
    }
    worst = std::max(worst, std::abs(m));

    // Constitutive check: the stored moment is k_i * theta_i.
    const double kj = params.k_sp[k] + params.k_FS;
    worst = std::max(worst, std::abs(loads.m_L[k] - kj * posture.theta[k]));
  }
  return worst;
}

// Exhaustive engagement scan used against the lock module: smallest
// engagement gap at axial position s, by scanning every protrusion/pawl pair.
inline double scan_backlash(const std::vector<double>& pawls, double pitch, int protrusions,
                            double s) {
  double best = s;  // free retraction to the origin if nothing engages
  for (double q : pawls) {
    for (int j = 0; j < protrusions; ++j) {
      const double e = q + j * pitch;
      if (e <= s + 1e-9) best = std::min(best, s - e);
    }
  }
  return std::max(0.0, best);
}

}  // namespace gripsim::oracle
