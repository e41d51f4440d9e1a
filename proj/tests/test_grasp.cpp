#include <doctest.h>

#include <cmath>
#include <random>

#include "gripsim/grasp.hpp"

using namespace gripsim;

namespace {

FingerParams wrap_finger() {
  FingerParams p;
  p.n = 7;
  p.l_L = 12.0;
  p.d_L = 13.0;
  p.k_sp.assign(7, 0.0);
  p.k_FS = 257.8310078088704;
  return p;
}

ScrewDriveParams wrap_drive() {
  ScrewDriveParams p;
  p.r_g1 = 30.0;
  p.r_g2 = 15.0;
  p.theta_th = 0.35;
  p.mu_st = 0.2;
  p.tau_pre_max = 280.0;
  p.tau_m_max = 200.0;
  return p;
}

}  // namespace

TEST_CASE("link penetration") {
  const FingerParams p = wrap_finger();
  FingerPosture straight;
  straight.theta.assign(7, 0.0);

  SUBCASE("far object never penetrates") {
    CircularObject obj;
    obj.center = {40.0, 200.0};
    obj.diameter = 20.0;
    for (double d : link_penetration(p, straight, obj)) CHECK(d == 0.0);
  }
  SUBCASE("object centred on a segment penetrates by its radius") {
    CircularObject obj;
    obj.center = {6.0, 0.0};
    obj.diameter = 10.0;
    const std::vector<double> depth = link_penetration(p, straight, obj);
    CHECK(depth[0] == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("depth is 1-Lipschitz in the object centre") {
    std::mt19937 rng(808);
    std::uniform_real_distribution<double> ang(0.0, 0.3), off(-1e-3, 1e-3);
    FingerPosture posture;
    for (int i = 0; i < 7; ++i) posture.theta.push_back(ang(rng));
    CircularObject obj;
    obj.center = {30.0, 18.0};
    obj.diameter = 40.0;
    const std::vector<double> base = link_penetration(p, posture, obj);
    for (int trial = 0; trial < 200; ++trial) {
      CircularObject moved = obj;
      moved.center = obj.center + Vec2{off(rng), off(rng)};
      const std::vector<double> perturbed = link_penetration(p, posture, moved);
      for (size_t i = 0; i < base.size(); ++i) {
        CHECK(std::abs(perturbed[i] - base[i]) <= 1e-2);
      }
    }
  }
}

TEST_CASE("wrap with a distant object reduces to the free posture ramp") {
  const FingerParams finger = wrap_finger();
  const ScrewDriveParams drive = wrap_drive();
  CircularObject obj;
  obj.center = {500.0, 500.0};
  obj.diameter = 20.0;
  const WrapResult r = wrap_simulate(finger, obj, drive, 100.0);
  CHECK(r.terminated_by == WrapTermination::TorqueThreshold);
  CHECK(r.contact_links.empty());

  const double f_max = 100.0 / (drive.r_g2 * std::tan(drive.theta_th));
  CHECK(r.f_tr_final == doctest::Approx(f_max).epsilon(1e-9));
  const SolveResult free_solution = solve_posture(finger, f_max);
  CHECK(r.posture.total_bend() ==
        doctest::Approx(free_solution.posture.total_bend()).epsilon(1e-6));
}

TEST_CASE("wrap around a graspable cylinder freezes joints monotonically without penetration") {
  const FingerParams base = wrap_finger();
  FingerParams designed = base;
  designed.k_sp = design_springs(base, SpringObjective::UniformBend, 10.0);

  const ScrewDriveParams drive = wrap_drive();
  const CircularObject obj = default_object_placement(designed, 40.0);
  WrapOptions opts;
  const WrapResult r = wrap_simulate(designed, obj, drive, 100.0, opts);

  int prev_frozen = 0;
  for (const auto& rec : r.trace) {
    CHECK(rec.frozen_count >= prev_frozen);
    prev_frozen = rec.frozen_count;
    CHECK(rec.max_penetration <= opts.penetration_tol + 1e-9);
  }
  CHECK(r.contact_links.size() >= 1);
  for (size_t i = 0; i + 1 < r.contact_links.size(); ++i)
    CHECK(r.contact_links[i] < r.contact_links[i + 1]);

  if (r.terminated_by == WrapTermination::TorqueThreshold) {
    const double conversion = drive.r_g2 * std::tan(drive.theta_th);
    CHECK(std::abs(conversion * r.f_tr_final - 100.0) <= conversion * opts.force_step + 1e-9);
  }
}

TEST_CASE("wrap options are validated") {
  const FingerParams finger = wrap_finger();
  const ScrewDriveParams drive = wrap_drive();
  CircularObject obj;
  obj.center = {12.0, 12.0};
  obj.diameter = 0.0;
  CHECK_THROWS_AS(wrap_simulate(finger, obj, drive, 100.0), ConfigError);
  obj.diameter = 20.0;
  CHECK_THROWS_AS(wrap_simulate(finger, obj, drive, 0.0), ConfigError);
}
