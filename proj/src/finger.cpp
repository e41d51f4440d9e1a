#include "gripsim/finger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gripsim/io.hpp"

namespace gripsim {

void FingerParams::validate() const {
  if (n < 1) throw ConfigError("finger: n must be >= 1");
  if (!(l_L > 0.0)) throw ConfigError("finger: l_L must be > 0");
  if (!(d_L > 0.0)) throw ConfigError("finger: d_L must be > 0");
  if (static_cast<int>(k_sp.size()) != n)
    throw ConfigError("finger: k_sp must have one entry per joint");
  for (double k : k_sp)
    if (k < 0.0) throw ConfigError("finger: k_sp entries must be >= 0");
  if (!(k_FS > 0.0)) throw ConfigError("finger: k_FS must be > 0");
}

double joint_stiffness(const FingerParams& params, int joint) {
  if (joint < 1 || joint > params.n) throw ConfigError("joint_stiffness: joint index out of range");
  return params.k_sp[static_cast<size_t>(joint - 1)] + params.k_FS;
}

double FingerPosture::total_bend() const {
  return std::accumulate(theta.begin(), theta.end(), 0.0);
}

double ShaftForceDistribution::sum() const {
  return std::accumulate(f.begin(), f.end(), 0.0);
}

bool FrozenJoints::any() const {
  for (auto b : frozen)
    if (b) return true;
  return false;
}

bool FrozenJoints::all() const {
  for (auto b : frozen)
    if (!b) return false;
  return true;
}

FrozenJoints FrozenJoints::none(int n) {
  FrozenJoints fj;
  fj.frozen.assign(static_cast<size_t>(n), 0);
  fj.theta.assign(static_cast<size_t>(n), 0.0);
  return fj;
}

EquilibriumResult equilibrium_recursion(const FingerParams& params,
                                        const ShaftForceDistribution& dist,
                                        const FingerModelOptions& options,
                                        const FrozenJoints* frozen) {
  params.validate();
  const size_t n = static_cast<size_t>(params.n);
  if (dist.f.size() != n) throw ConfigError("equilibrium_recursion: distribution length mismatch");

  EquilibriumResult out;
  out.posture.theta.assign(n, 0.0);
  out.loads.f_L.assign(n, Vec2{0.0, 0.0});
  out.loads.m_L.assign(n, 0.0);

  auto& theta = out.posture.theta;
  const auto angle_at = [&](size_t i) {
    return (frozen && frozen->frozen[i]) ? frozen->theta[i] : theta[i];
  };

  // Distal link: only the shaft force acts beyond its joint.
  {
    const size_t i = n - 1;
    const double m = params.d_L * dist.f[i];
    const double k = params.k_sp[i] + params.k_FS;
    theta[i] = (frozen && frozen->frozen[i]) ? frozen->theta[i] : m / k;
    out.loads.m_L[i] = k * theta[i];
    out.loads.f_L[i] = Vec2{-dist.f[i], 0.0};
  }

  Vec2 f_next = out.loads.f_L[n - 1];  // pin force on link i+1, in its frame
  double m_next = params.d_L * dist.f[n - 1];

  for (size_t ii = n - 1; ii-- > 0;) {
    // Rotation from the (ii+1)-frame into the ii-frame.
    double phi = angle_at(ii + 1);
    if (options.literal_frame_rotation) {
      phi = 0.0;
      for (size_t j = ii + 1; j < n; ++j) phi += angle_at(j);
    }
    const Vec2 rf = rotate(f_next, phi);
    // Moment balance about pin ii: distal spring reaction, the shaft force at
    // offset d_L, and the pin force from the distal neighbour at lever l_L.
    const double m = m_next + params.d_L * dist.f[ii] - cross(Vec2{params.l_L, 0.0}, rf);
    const double k = params.k_sp[ii] + params.k_FS;
    theta[ii] = (frozen && frozen->frozen[ii]) ? frozen->theta[ii] : m / k;
    out.loads.m_L[ii] = k * theta[ii];
    out.loads.f_L[ii] = rf - Vec2{dist.f[ii], 0.0};
    f_next = out.loads.f_L[ii];
    m_next = m;
  }
  return out;
}

Kinematics forward_kinematics(const FingerParams& params, const FingerPosture& posture,
                              double tip_length) {
  params.validate();
  const size_t n = static_cast<size_t>(params.n);
  if (posture.theta.size() != n) throw ConfigError("forward_kinematics: posture length mismatch");
  if (tip_length < 0.0) tip_length = params.l_L;

  Kinematics kin;
  kin.pins.assign(n, Vec2{0.0, 0.0});
  double alpha = 0.0;
  Vec2 p{0.0, 0.0};
  for (size_t i = 0; i < n; ++i) {
    alpha += posture.theta[i];
    kin.pins[i] = p;
    const Vec2 dir{std::cos(alpha), std::sin(alpha)};
    if (i + 1 < n) {
      p = p + params.l_L * dir;
    } else {
      kin.tip = p + tip_length * dir;
    }
  }
  return kin;
}

double elastic_energy(const FingerParams& params, const FingerPosture& posture) {
  params.validate();
  if (posture.theta.size() != static_cast<size_t>(params.n))
    throw ConfigError("elastic_energy: posture length mismatch");
  double e = 0.0;
  for (size_t i = 0; i < posture.theta.size(); ++i) {
    const double k = params.k_sp[i] + params.k_FS;
    e += 0.5 * k * posture.theta[i] * posture.theta[i];
  }
  return e;
}

double force_objective(const FingerParams& params, double f_tr,
                       const ShaftForceDistribution& dist, const SolveOptions& options,
                       const FrozenJoints* frozen) {
  const EquilibriumResult eq = equilibrium_recursion(params, dist, options.model, frozen);
  double obj = 0.0;
  for (size_t i = 0; i < eq.posture.theta.size(); ++i) {
    if (frozen && frozen->frozen[i]) continue;  // clamped joints contribute a constant
    const double k = params.k_sp[i] + params.k_FS;
    const double th = eq.posture.theta[i];
    if (options.objective == ForceObjective::TotalPotential) {
      const double dev = th - params.d_L * f_tr / k;
      obj += 0.5 * k * dev * dev;
    } else {
      obj += 0.5 * k * th * th;
    }
  }
  return obj;
}

namespace {

// Euclidean projection onto {f >= 0, sum f = total}.
void project_simplex(std::vector<double>& v, double total) {
  const size_t n = v.size();
  if (total <= 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  size_t rho = 0;
  for (size_t i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - total) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
}

struct DescentOutcome {
  std::vector<double> f;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

DescentOutcome projected_descent(const FingerParams& params, double f_tr,
                                 std::vector<double> f, const SolveOptions& options,
                                 const FrozenJoints* frozen) {
  const size_t n = f.size();
  const auto eval = [&](const std::vector<double>& x) {
    ShaftForceDistribution d;
    d.f = x;
    return force_objective(params, f_tr, d, options, frozen);
  };

  DescentOutcome out;
  double obj = eval(f);
  const double h = std::max(1e-7 * f_tr, 1e-10);
  std::vector<double> grad(n), trial(n), probe(n);
  double step_size = 1.0;
  int stable = 0;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    // Central-difference gradient; the recursion is smooth in f.
    for (size_t i = 0; i < n; ++i) {
      probe = f;
      probe[i] = f[i] + h;
      const double up = eval(probe);
      probe[i] = f[i] - h;
      const double dn = eval(probe);
      grad[i] = (up - dn) / (2.0 * h);
    }

    bool improved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (size_t i = 0; i < n; ++i) trial[i] = f[i] - step_size * grad[i];
      project_simplex(trial, f_tr);
      const double trial_obj = eval(trial);
      double decrease = 0.0;
      for (size_t i = 0; i < n; ++i) decrease += grad[i] * (f[i] - trial[i]);
      if (trial_obj <= obj - 1e-4 * decrease && trial_obj < obj) {
        const double rel_drop = (obj - trial_obj) / std::max(1.0, std::abs(obj));
        f = trial;
        obj = trial_obj;
        step_size = std::min(step_size * 1.5, 1e6);
        improved = true;
        stable = rel_drop <= options.tolerance ? stable + 1 : 0;
        break;
      }
      step_size *= 0.5;
      if (step_size < 1e-16) break;
    }
    if (!improved || stable >= 3) {
      out.converged = true;
      break;
    }
  }
  out.f = std::move(f);
  out.objective = obj;
  out.iterations = it;
  return out;
}

}  // namespace

SolveResult solve_posture(const FingerParams& params, double f_tr, const SolveOptions& options,
                          const FrozenJoints* frozen, const ShaftForceDistribution* warm_start) {
  params.validate();
  if (f_tr < 0.0) throw ConfigError("solve_posture: f_tr must be >= 0 (extension is handled by the lock)");
  const size_t n = static_cast<size_t>(params.n);
  if (frozen && (frozen->frozen.size() != n || frozen->theta.size() != n))
    throw ConfigError("solve_posture: frozen mask length mismatch");

  SolveResult result;
  // Degenerate simplexes have a closed form.
  if (f_tr == 0.0 || params.n == 1) {
    ShaftForceDistribution d;
    d.f.assign(n, 0.0);
    d.f[n - 1] = f_tr;
    EquilibriumResult eq = equilibrium_recursion(params, d, options.model, frozen);
    result.dist = std::move(d);
    result.posture = std::move(eq.posture);
    result.loads = std::move(eq.loads);
    result.objective = force_objective(params, f_tr, result.dist, options, frozen);
    return result;
  }

  std::vector<std::vector<double>> starts;
  if (warm_start) {
    if (warm_start->f.size() != n) throw ConfigError("solve_posture: warm start length mismatch");
    starts.push_back(warm_start->f);
    project_simplex(starts.back(), f_tr);
  } else {
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> v(n, 0.0);
      v[i] = f_tr;
      starts.push_back(std::move(v));
    }
    starts.emplace_back(n, f_tr / static_cast<double>(n));
    if (options.jitter_starts > 0) {
      std::mt19937_64 rng(options.seed);
      std::exponential_distribution<double> exp_dist(1.0);
      for (int j = 0; j < options.jitter_starts; ++j) {
        std::vector<double> v(n);
        double total = 0.0;
        for (double& x : v) {
          x = exp_dist(rng);
          total += x;
        }
        for (double& x : v) x *= f_tr / total;
        starts.push_back(std::move(v));
      }
    }
  }

  DescentOutcome best;
  int best_index = -1;
  int total_iterations = 0;
  for (size_t si = 0; si < starts.size(); ++si) {
    DescentOutcome o = projected_descent(params, f_tr, starts[si], options, frozen);
    total_iterations += o.iterations;
    if (best_index < 0 || o.objective < best.objective - 1e-15) {
      best = std::move(o);
      best_index = static_cast<int>(si);
    }
  }
  if (!best.converged) {
    throw SolverError("solve_posture: projected descent did not converge", best.objective,
                      best.objective);
  }

  result.dist.f = best.f;
  EquilibriumResult eq = equilibrium_recursion(params, result.dist, options.model, frozen);
  result.posture = std::move(eq.posture);
  result.loads = std::move(eq.loads);
  result.objective = best.objective;
  result.iterations = total_iterations;
  result.winning_start = best_index;
  return result;
}

namespace {

double observation_residual(const FingerParams& geometry, double k_fs,
                            const PostureObservation& obs, const SolveOptions& options) {
  FingerParams p = geometry;
  p.k_FS = k_fs;
  const SolveResult s = solve_posture(p, obs.f_tr, options);
  const Kinematics kin = forward_kinematics(p, s.posture);
  double r = 0.0;
  for (size_t i = 0; i < kin.pins.size(); ++i) r += norm(kin.pins[i] - obs.pins[i]);
  return r;
}

}  // namespace

KfsResult identify_kfs(const FingerParams& geometry,
                       const std::vector<PostureObservation>& observations,
                       const SolveOptions& options) {
  FingerParams geom = geometry;
  if (geom.k_FS <= 0.0) geom.k_FS = 1.0;  // placeholder; overwritten per candidate
  geom.validate();
  for (double k : geom.k_sp)
    if (k != 0.0)
      throw ConfigError("identify_kfs: identification geometry must have all k_sp = 0");
  if (observations.empty()) throw ConfigError("identify_kfs: at least one observation required");
  for (const auto& obs : observations) {
    if (!(obs.f_tr > 0.0)) throw ConfigError("identify_kfs: every observation needs f_tr > 0");
    if (obs.pins.size() != static_cast<size_t>(geom.n))
      throw ConfigError("identify_kfs: observation pin count mismatch");
  }

  const double lo = 1e-2, hi = 1e8;  // N·mm/rad search bracket
  KfsResult result;
  double mean_acc = 0.0;

  for (const auto& obs : observations) {
    // Golden-section search on log k; the pin residual is unimodal in k
    // because the posture relaxes monotonically toward straight as k grows.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo), b = std::log(hi);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = observation_residual(geom, std::exp(c), obs, options);
    double fd = observation_residual(geom, std::exp(d), obs, options);
    for (int it = 0; it < 90 && (b - a) > 1e-11; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = observation_residual(geom, std::exp(c), obs, options);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = observation_residual(geom, std::exp(d), obs, options);
      }
    }
    KfsFit fit;
    fit.k_fs = std::exp(0.5 * (a + b));
    fit.residual = observation_residual(geom, fit.k_fs, obs, options);
    // A fit pushed to the top of the bracket means the observation carries no
    // deflection: the stiffness is unbounded (straight finger), not measured.
    fit.identifiable = fit.k_fs < hi * 0.5;
    if (fit.identifiable) {
      mean_acc += fit.k_fs;
      ++result.identifiable_count;
    }
    result.fits.push_back(fit);
  }
  result.mean_k_fs = result.identifiable_count > 0
                         ? mean_acc / static_cast<double>(result.identifiable_count)
                         : std::numeric_limits<double>::infinity();
  return result;
}

namespace {

double spread_ratio(const std::vector<double>& theta) {
  const auto [mn, mx] = std::minmax_element(theta.begin(), theta.end());
  const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) /
                      static_cast<double>(theta.size());
  if (mean <= 0.0) return std::numeric_limits<double>::infinity();
  return (*mx - *mn) / mean;
}

}  // namespace

std::vector<double> design_springs(const FingerParams& base, SpringObjective objective,
                                   double f_tr_ref, const SolveOptions& options) {
  FingerParams p = base;
  p.k_sp.assign(static_cast<size_t>(base.n), 0.0);
  p.validate();
  if (!(f_tr_ref > 0.0)) throw ConfigError("design_springs: f_tr_ref must be > 0");
  const size_t n = static_cast<size_t>(p.n);
  if (p.n == 1) return p.k_sp;  // a single joint is uniform by definition

  // Per-joint angle targets: equal for UniformBend, a geometric decay for
  // ProximalFirst (tip target just under half the base target for margin).
  std::vector<double> profile(n, 1.0);
  if (objective == SpringObjective::ProximalFirst) {
    const double rho = std::pow(1.0 / 2.2, 1.0 / static_cast<double>(n - 1));
    for (size_t i = 0; i < n; ++i) profile[i] = std::pow(rho, static_cast<double>(i));
  }

  // Fixed point: pick the largest target scale that keeps every k_sp >= 0,
  // then set k_i = m_i / theta_target_i and re-solve until the achieved
  // profile matches the target within half the allowed spread.
  for (int it = 0; it < 120; ++it) {
    const SolveResult s = solve_posture(p, f_tr_ref, options);

    if (objective == SpringObjective::UniformBend) {
      if (spread_ratio(s.posture.theta) <= 0.005) break;
    } else if (it > 0) {
      bool on_profile = true;
      for (size_t i = 0; i < n; ++i) {
        const double want = s.posture.theta.front() * profile[i] / profile[0];
        if (std::abs(s.posture.theta[i] - want) > 0.01 * want) on_profile = false;
      }
      if (on_profile) break;
    }

    std::vector<double> m(n);
    for (size_t i = 0; i < n; ++i) m[i] = (p.k_sp[i] + p.k_FS) * s.posture.theta[i];
    double scale = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) scale = std::min(scale, m[i] / (p.k_FS * profile[i]));
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw InfeasibleError("design_springs: degenerate load distribution at f_tr_ref");
    for (size_t i = 0; i < n; ++i) {
      double k_new = m[i] / (scale * profile[i]) - p.k_FS;
      if (k_new < 0.0) k_new = 0.0;
      p.k_sp[i] = 0.5 * (p.k_sp[i] + k_new);  // damped update
    }
  }

  if (objective == SpringObjective::ProximalFirst) {
    // The accumulated proximal moments already enforce the decreasing angle
    // profile; clamp the coefficients weakly non-decreasing toward the tip.
    for (size_t i = 1; i < n; ++i) p.k_sp[i] = std::max(p.k_sp[i], p.k_sp[i - 1]);
  }

  // Verify the postcondition on the final coefficients.
  const SolveResult s = solve_posture(p, f_tr_ref, options);
  if (objective == SpringObjective::UniformBend) {
    const double spread = spread_ratio(s.posture.theta);
    if (spread > 0.01)
      throw SolverError("design_springs: uniform-bend spread did not converge", spread, spread);
  } else {
    for (size_t i = 0; i + 1 < n; ++i)
      if (s.posture.theta[i] + 1e-9 < s.posture.theta[i + 1])
        throw SolverError("design_springs: proximal-first ordering violated",
                          s.posture.theta[i + 1] - s.posture.theta[i], 0.0);
    if (s.posture.theta.front() < 2.0 * s.posture.theta.back())
      throw SolverError("design_springs: base/tip ratio below 2",
                        s.posture.theta.front() / s.posture.theta.back(), 0.0);
  }
  return p.k_sp;
}

}  // namespace gripsim
