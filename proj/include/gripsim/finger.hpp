#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gripsim/common.hpp"

namespace gripsim {

// Planar quasi-static model of the n-link finger driven by an inserted
// flexible shaft. Joint indices are 1-based: joint i connects link i-1 and
// link i, joint 1 is at the base. Angles are flexion-positive; the restoring
// torque at joint i has magnitude m_i = k_i * theta_i and opposes flexion.

struct FingerParams {
  int n = 0;                  // number of links
  double l_L = 0.0;           // inter-joint length [mm]
  double d_L = 0.0;           // joint-to-shaft offset [mm]
  std::vector<double> k_sp;   // torsion spring coefficient per joint [N·mm/rad], length n
  double k_FS = 0.0;          // flexural stiffness of the flexible shaft [N·mm/rad]

  void validate() const;
};

// Composite joint stiffness k_sp_i + k_FS. 1-based joint index.
double joint_stiffness(const FingerParams& params, int joint);

struct FingerPosture {
  std::vector<double> theta;  // joint angles [rad], flexion-positive
  double total_bend() const;
};

struct ShaftForceDistribution {
  std::vector<double> f;  // per-link axial shaft force f_FS_i [N], >= 0
  double sum() const;
};

struct JointLoads {
  // Pin force applied to link i by link i-1, expressed in the link-i frame.
  std::vector<Vec2> f_L;
  // Spring restoring torque magnitudes k_i * theta_i [N·mm].
  std::vector<double> m_L;
};

// Joints clamped by contact: theta[i] is prescribed where frozen[i] is set.
struct FrozenJoints {
  std::vector<std::uint8_t> frozen;  // length n, 0/1
  std::vector<double> theta;         // prescribed angles, used where frozen
  bool any() const;
  bool all() const;
  static FrozenJoints none(int n);
};

struct FingerModelOptions {
  // Inter-frame rotation between adjacent links: the default rotates by the
  // single joint angle; the literal variant uses the cumulative distal sum.
  bool literal_frame_rotation = false;
};

// Back-substitution of the per-link force and moment balances, from the
// distal link down to the base. Distal joint angles are known before each
// proximal joint is processed, so the solve is exact (no iteration). Frozen
// joints keep their prescribed angles; the contact supplies the balance
// moment there.
struct EquilibriumResult {
  FingerPosture posture;
  JointLoads loads;
};
EquilibriumResult equilibrium_recursion(const FingerParams& params,
                                        const ShaftForceDistribution& dist,
                                        const FingerModelOptions& options = {},
                                        const FrozenJoints* frozen = nullptr);

// Joint-pin positions in the base frame (pin 1 at the origin) plus the
// fingertip, which extends tip_length beyond pin n (default l_L).
struct Kinematics {
  std::vector<Vec2> pins;  // length n
  Vec2 tip{0.0, 0.0};
};
Kinematics forward_kinematics(const FingerParams& params, const FingerPosture& posture,
                              double tip_length = -1.0);

// 1/2 * sum_i k_i * theta_i^2 [N·mm].
double elastic_energy(const FingerParams& params, const FingerPosture& posture);

// Which stationarity principle selects the shaft force distribution.
//
// TotalPotential (default) minimizes the deviation energy
//   sum_i 1/2 k_i (theta_i - d_L f_tr / k_i)^2,
// the completed-square form of the total potential (elastic energy minus the
// insertion work d_L f_tr sum(theta) under the shaft-parallel assumption).
// ElasticEnergyOnly minimizes 1/2 sum k_i theta_i^2 alone; that objective is
// degenerate (it concentrates the whole load on the most proximal link) and
// is kept for comparison.
enum class ForceObjective { TotalPotential, ElasticEnergyOnly };

struct SolveOptions {
  ForceObjective objective = ForceObjective::TotalPotential;
  double tolerance = 1e-10;    // convergence tolerance on the objective
  int max_iterations = 2000;   // per start
  int jitter_starts = 0;       // extra random starts beyond vertices + centroid
  std::uint64_t seed = 0;      // seeds the jitter starts only
  FingerModelOptions model;
};

struct SolveResult {
  ShaftForceDistribution dist;
  FingerPosture posture;
  JointLoads loads;
  double objective = 0.0;
  int iterations = 0;
  int winning_start = 0;
};

// Objective value for a given distribution (the quantity solve_posture
// minimizes), exposed so independent oracles can evaluate the same problem.
double force_objective(const FingerParams& params, double f_tr,
                       const ShaftForceDistribution& dist, const SolveOptions& options = {},
                       const FrozenJoints* frozen = nullptr);

// Finds the shaft force distribution on the simplex {f >= 0, sum f = f_tr}
// that minimizes the configured objective, via projected gradient descent
// with multi-start (simplex vertices + centroid + optional seeded jitter).
// Ties are broken by the lowest start index. warm_start, when given,
// replaces the multi-start (used by incremental loading loops).
SolveResult solve_posture(const FingerParams& params, double f_tr,
                          const SolveOptions& options = {},
                          const FrozenJoints* frozen = nullptr,
                          const ShaftForceDistribution* warm_start = nullptr);

// --- flexural stiffness identification -------------------------------------

struct PostureObservation {
  double f_tr = 0.0;       // applied insertion force [N]
  std::vector<Vec2> pins;  // measured joint-pin positions [mm], length n
};

struct KfsFit {
  double k_fs = 0.0;       // fitted stiffness [N·mm/rad]
  double residual = 0.0;   // sum of pin distances at the fit [mm]
  bool identifiable = true;
};

struct KfsResult {
  std::vector<KfsFit> fits;  // one per observation, input order
  double mean_k_fs = 0.0;    // mean over identifiable fits
  int identifiable_count = 0;
};

// Fits k_FS per observation by minimizing the summed pin-position distance
// between predicted and measured postures, then reports each fit and their
// mean. Requires the spring-less identification geometry (all k_sp zero).
// Observations with no usable deflection are flagged unidentifiable.
KfsResult identify_kfs(const FingerParams& geometry,
                       const std::vector<PostureObservation>& observations,
                       const SolveOptions& options = {});

// --- spring design ----------------------------------------------------------

enum class SpringObjective { UniformBend, ProximalFirst };

// Chooses per-joint spring coefficients so that solving at f_tr_ref yields
// either a uniform bend (spread <= 1% of the mean angle) or a proximal-first
// profile (non-increasing angles with theta_1 >= 2 * theta_n).
std::vector<double> design_springs(const FingerParams& base, SpringObjective objective,
                                   double f_tr_ref, const SolveOptions& options = {});

}  // namespace gripsim
