#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gripsim/cycle.hpp"

namespace gripsim {

// Scenario files are strict JSON: a required `units` block declares the angle
// and torsional-stiffness units, unknown keys are rejected, and every
// experiment names its inputs explicitly. Values are converted to N/mm/rad at
// the accessor boundary; the document itself is kept verbatim so sweeps and
// summary echoes operate in the file's own units.

struct RunOptions {
  bool strict = false;
  int threads = 1;
  std::uint64_t seed = 0;
};

class Scenario {
 public:
  static Scenario load_file(const std::filesystem::path& path);
  // origin anchors relative paths (e.g. the observations CSV) and error text.
  static Scenario parse(const std::string& text, const std::filesystem::path& origin = {});

  const std::string& experiment() const { return experiment_; }
  bool has_sweep() const;
  std::string out_prefix() const;
  const nlohmann::ordered_json& document() const { return doc_; }

  // Typed accessors (each validates its section).
  ScrewDriveParams trsw_params() const;
  LoadModel load_model() const;
  FingerParams finger_params() const;
  LockParams lock_params() const;
  std::optional<CircularObject> object() const;
  SolveOptions solve_options(std::uint64_t seed = 0) const;
  WrapOptions wrap_options(std::uint64_t seed = 0) const;
  HandConfig hand_config(std::uint64_t seed = 0) const;
  std::vector<double> forces() const;
  double tau_th() const;
  double motor_sweep_angle() const;
  ScrewSimOptions screw_sim_options() const;
  std::vector<PostureObservation> observations() const;
  SpringObjective design_objective() const;
  double design_reference_force() const;

  // Executes the experiment, writing CSV traces and a summary JSON under
  // out_dir. Throws ConfigError/SolverError/InfeasibleError; the caller maps
  // those to exit codes 1/2/3.
  void run(const std::filesystem::path& out_dir, const RunOptions& options = {}) const;

  // One summary row per grid point of the single swept parameter, plus the
  // per-point outputs; rows are collected in input order regardless of the
  // thread count.
  void run_sweep(const std::filesystem::path& out_dir, const RunOptions& options = {}) const;

 private:
  Scenario() = default;
  Scenario with_override(const std::string& dotted_path, const nlohmann::ordered_json& value) const;

  nlohmann::ordered_json doc_;
  std::string experiment_;
  std::filesystem::path origin_dir_;
  std::string origin_name_;
};

// Observation CSV reader: columns f_tr_N, pin_index, x_mm, y_mm; pin_index
// restarting at 1 begins a new observation.
std::vector<PostureObservation> read_observations_csv(const std::filesystem::path& path,
                                                      int expected_pins);

}  // namespace gripsim
