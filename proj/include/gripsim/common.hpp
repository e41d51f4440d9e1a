#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gripsim {

// Units used throughout the library: N, mm, rad (torque N·mm, stiffness
// N·mm/rad). Config files may declare degrees / N·mm/deg; conversion happens
// at the scenario boundary, never inside the models.

constexpr double kPi = 3.14159265358979323846;
constexpr double kGravity = 9.80665;  // m/s^2

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v[0], s * v[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

// Rotate v by angle (counterclockwise).
inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

// Invalid parameters, malformed config files, violated preconditions.
// Maps to exit/status code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver failed to converge. Maps to exit/status code 2.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_objective, double residual)
      : std::runtime_error(what), best_objective(best_objective), residual(residual) {}
  double best_objective = 0.0;
  double residual = 0.0;
};

// Design cannot perform the requested motion (e.g. a cycle aborts mid-phase).
// Maps to exit/status code 3.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gripsim
