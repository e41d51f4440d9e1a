#include "gripsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "gripsim/io.hpp"

namespace gripsim {

namespace {

using json = nlohmann::ordered_json;

int line_of_byte(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double need_num(const json& obj, const std::string& where, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(where + ": missing key '" + key + "'");
  if (!v->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v->get<double>();
}

double opt_num(const json& obj, const std::string& where, const std::string& key, double dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  if (!v->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v->get<double>();
}

int opt_int(const json& obj, const std::string& where, const std::string& key, int dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  if (!v->is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return v->get<int>();
}

bool opt_bool(const json& obj, const std::string& where, const std::string& key, bool dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  if (!v->is_boolean()) throw ConfigError(where + ": '" + key + "' must be a boolean");
  return v->get<bool>();
}

std::string need_str(const json& obj, const std::string& where, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(where + ": missing key '" + key + "'");
  if (!v->is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  return v->get<std::string>();
}

const json& need_section(const json& doc, const std::string& origin, const std::string& key) {
  const json* v = find(doc, key);
  if (!v) throw ConfigError(origin + ": missing section '" + key + "'");
  if (!v->is_object()) throw ConfigError(origin + ": section '" + key + "' must be an object");
  return *v;
}

constexpr const char* kExperiments[] = {"trsw-sim",       "finger-solve", "identify-kfs",
                                        "design-springs", "grasp-sim",    "cycle-sim",
                                        "validate"};

}  // namespace

Scenario Scenario::load_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open scenario file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

Scenario Scenario::parse(const std::string& text, const std::filesystem::path& origin) {
  Scenario sc;
  sc.origin_name_ = origin.empty() ? "<scenario>" : origin.filename().string();
  sc.origin_dir_ = origin.empty() ? std::filesystem::current_path() : origin.parent_path();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(sc.origin_name_ + ":" + std::to_string(line_of_byte(text, e.byte)) + ": " +
                      e.what());
  }
  if (!doc.is_object()) throw ConfigError(sc.origin_name_ + ": scenario must be a JSON object");

  // Summaries wrap the scenario they were produced from; accept that form so
  // an emitted summary re-parses directly.
  if (doc.contains("scenario")) {
    check_keys(doc, sc.origin_name_, {"scenario", "results"});
    doc = doc["scenario"];
    if (!doc.is_object()) throw ConfigError(sc.origin_name_ + ": 'scenario' must be an object");
  }

  check_keys(doc, sc.origin_name_,
             {"experiment", "units", "trsw", "finger", "lock", "load", "object", "forces",
              "observations_csv", "design", "motor", "tau_th", "solver", "grasp", "cycle", "hand",
              "sweep", "out_prefix"});

  const json* exp = find(doc, "experiment");
  if (!exp || !exp->is_string())
    throw ConfigError(sc.origin_name_ + ": missing experiment selector");
  sc.experiment_ = exp->get<std::string>();
  bool known = false;
  for (const char* e : kExperiments)
    if (sc.experiment_ == e) known = true;
  if (!known) throw ConfigError(sc.origin_name_ + ": unknown experiment '" + sc.experiment_ + "'");

  const json& units = need_section(doc, sc.origin_name_, "units");
  check_keys(units, sc.origin_name_ + "/units", {"angle", "stiffness"});
  const std::string angle = need_str(units, sc.origin_name_ + "/units", "angle");
  const std::string stiffness = need_str(units, sc.origin_name_ + "/units", "stiffness");
  if (angle != "rad" && angle != "deg")
    throw ConfigError(sc.origin_name_ + "/units: angle must be 'rad' or 'deg'");
  if (stiffness != "N.mm/rad" && stiffness != "N.mm/deg")
    throw ConfigError(sc.origin_name_ + "/units: stiffness must be 'N.mm/rad' or 'N.mm/deg'");

  // Validate section keys eagerly so typos fail before any computation.
  if (const json* s = find(doc, "trsw"))
    check_keys(*s, sc.origin_name_ + "/trsw",
               {"r_g1", "r_g2", "theta_th", "mu_st", "tau_pre_max", "tau_m_max", "d_slit",
                "preload_calibration", "kinetic_ratio"});
  if (const json* s = find(doc, "finger"))
    check_keys(*s, sc.origin_name_ + "/finger", {"n", "l_L", "d_L", "k_sp", "k_FS"});
  if (const json* s = find(doc, "lock"))
    check_keys(*s, sc.origin_name_ + "/lock",
               {"protrusion_pitch", "protrusion_count", "pawl_positions", "pawl_offset",
                "unlock_roll_angle", "roll_tolerance"});
  if (const json* s = find(doc, "load"))
    check_keys(*s, sc.origin_name_ + "/load", {"kind", "stiffness", "rest", "force", "position"});
  if (const json* s = find(doc, "object"))
    check_keys(*s, sc.origin_name_ + "/object", {"center", "diameter", "clearance", "center_x"});
  if (const json* s = find(doc, "design"))
    check_keys(*s, sc.origin_name_ + "/design", {"objective", "f_tr_ref"});
  if (const json* s = find(doc, "motor"))
    check_keys(*s, sc.origin_name_ + "/motor", {"step", "sweep"});
  if (const json* s = find(doc, "solver"))
    check_keys(*s, sc.origin_name_ + "/solver",
               {"objective", "tolerance", "max_iterations", "jitter_starts",
                "literal_frame_rotation"});
  if (const json* s = find(doc, "grasp"))
    check_keys(*s, sc.origin_name_ + "/grasp",
               {"force_step", "penetration_tol", "contact_tol", "tip_length"});
  if (const json* s = find(doc, "cycle")) check_keys(*s, sc.origin_name_ + "/cycle", {"motor_step"});
  if (const json* s = find(doc, "hand"))
    check_keys(*s, sc.origin_name_ + "/hand", {"finger_count", "finger_strength"});
  if (const json* s = find(doc, "sweep")) {
    check_keys(*s, sc.origin_name_ + "/sweep", {"parameter", "values"});
    need_str(*s, sc.origin_name_ + "/sweep", "parameter");
    const json* vals = find(*s, "values");
    if (!vals || !vals->is_array() || vals->empty())
      throw ConfigError(sc.origin_name_ + "/sweep: 'values' must be a non-empty array");
  }

  sc.doc_ = std::move(doc);
  return sc;
}

namespace {

double angle_factor(const json& doc) {
  return doc["units"]["angle"].get<std::string>() == "deg" ? kPi / 180.0 : 1.0;
}

double stiffness_factor(const json& doc) {
  return doc["units"]["stiffness"].get<std::string>() == "N.mm/deg" ? 180.0 / kPi : 1.0;
}

}  // namespace

bool Scenario::has_sweep() const { return doc_.contains("sweep"); }

std::string Scenario::out_prefix() const {
  if (const json* v = find(doc_, "out_prefix")) return v->get<std::string>();
  std::string p = experiment_;
  std::replace(p.begin(), p.end(), '-', '_');
  return p;
}

ScrewDriveParams Scenario::trsw_params() const {
  const json& s = need_section(doc_, origin_name_, "trsw");
  const std::string where = origin_name_ + "/trsw";
  ScrewDriveParams p;
  p.r_g1 = need_num(s, where, "r_g1");
  p.r_g2 = need_num(s, where, "r_g2");
  p.theta_th = need_num(s, where, "theta_th") * angle_factor(doc_);
  p.mu_st = need_num(s, where, "mu_st");
  p.tau_m_max = need_num(s, where, "tau_m_max");

  const bool has_tau = s.contains("tau_pre_max");
  const bool has_slit = s.contains("d_slit");
  if (has_tau && has_slit)
    throw ConfigError(where + ": give either tau_pre_max or d_slit, not both");
  if (has_tau) {
    p.tau_pre_max = need_num(s, where, "tau_pre_max");
  } else if (has_slit) {
    const json* table = find(s, "preload_calibration");
    if (!table || !table->is_array() || table->size() < 2)
      throw ConfigError(where + ": d_slit requires a preload_calibration table of >= 2 points");
    std::vector<std::pair<double, double>> cal;
    for (const auto& row : *table) {
      if (!row.is_array() || row.size() != 2)
        throw ConfigError(where + ": preload_calibration rows are [d_slit, tau_pre_max]");
      cal.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    for (size_t i = 1; i < cal.size(); ++i) {
      if (!(cal[i].first > cal[i - 1].first) || cal[i].second < cal[i - 1].second)
        throw ConfigError(where + ": preload_calibration must be strictly increasing in d_slit "
                                  "and non-decreasing in tau_pre_max");
    }
    const double d = need_num(s, where, "d_slit");
    if (d < cal.front().first || d > cal.back().first)
      throw ConfigError(where + ": d_slit outside the calibration range");
    for (size_t i = 1; i < cal.size(); ++i) {
      if (d <= cal[i].first) {
        const double t = (d - cal[i - 1].first) / (cal[i].first - cal[i - 1].first);
        p.tau_pre_max = cal[i - 1].second + t * (cal[i].second - cal[i - 1].second);
        break;
      }
    }
  } else {
    throw ConfigError(where + ": missing tau_pre_max (or d_slit with a calibration table)");
  }
  p.validate();
  return p;
}

LoadModel Scenario::load_model() const {
  const json& s = need_section(doc_, origin_name_, "load");
  const std::string where = origin_name_ + "/load";
  const std::string kind = need_str(s, where, "kind");
  LoadModel m;
  if (kind == "free") {
    m = LoadModel::free_load();
  } else if (kind == "linear_spring") {
    m = LoadModel::linear_spring(need_num(s, where, "stiffness"), opt_num(s, where, "rest", 0.0));
  } else if (kind == "constant") {
    m = LoadModel::constant(need_num(s, where, "force"));
  } else if (kind == "hard_stop") {
    m = LoadModel::hard_stop(need_num(s, where, "position"));
  } else {
    throw ConfigError(where + ": unknown load kind '" + kind + "'");
  }
  m.validate();
  return m;
}

FingerParams Scenario::finger_params() const {
  const json& s = need_section(doc_, origin_name_, "finger");
  const std::string where = origin_name_ + "/finger";
  FingerParams p;
  p.n = opt_int(s, where, "n", 0);
  p.l_L = need_num(s, where, "l_L");
  p.d_L = need_num(s, where, "d_L");
  p.k_FS = need_num(s, where, "k_FS") * stiffness_factor(doc_);
  const json* ksp = find(s, "k_sp");
  if (!ksp || !ksp->is_array()) throw ConfigError(where + ": 'k_sp' must be an array");
  for (const auto& v : *ksp) p.k_sp.push_back(v.get<double>() * stiffness_factor(doc_));
  if (p.n == 0) p.n = static_cast<int>(p.k_sp.size());
  p.validate();
  return p;
}

LockParams Scenario::lock_params() const {
  const json& s = need_section(doc_, origin_name_, "lock");
  const std::string where = origin_name_ + "/lock";
  LockParams p;
  p.protrusion_pitch = opt_num(s, where, "protrusion_pitch", 4.0);
  p.protrusion_count = opt_int(s, where, "protrusion_count", 30);
  p.unlock_roll_angle = opt_num(s, where, "unlock_roll_angle", kPi / 2.0 / angle_factor(doc_)) *
                        angle_factor(doc_);
  p.roll_tolerance = opt_num(s, where, "roll_tolerance", 0.1 / angle_factor(doc_)) *
                     angle_factor(doc_);
  if (const json* pw = find(s, "pawl_positions")) {
    if (!pw->is_array()) throw ConfigError(where + ": 'pawl_positions' must be an array");
    for (const auto& v : *pw) p.pawl_positions.push_back(v.get<double>());
  } else {
    const FingerParams finger = finger_params();
    p.pawl_positions = default_pawl_positions(finger.n, finger.l_L, p.protrusion_pitch,
                                              opt_num(s, where, "pawl_offset", 1.0));
  }
  p.validate();
  return p;
}

std::optional<CircularObject> Scenario::object() const {
  const json* s = find(doc_, "object");
  if (!s) return std::nullopt;
  const std::string where = origin_name_ + "/object";
  const double diameter = need_num(*s, where, "diameter");
  CircularObject obj;
  if (const json* c = find(*s, "center")) {
    if (!c->is_array() || c->size() != 2) throw ConfigError(where + ": 'center' must be [x, y]");
    obj.center = {(*c)[0].get<double>(), (*c)[1].get<double>()};
    obj.diameter = diameter;
  } else {
    obj = default_object_placement(finger_params(), diameter, opt_num(*s, where, "clearance", 2.0),
                                   opt_num(*s, where, "center_x", -1.0));
  }
  obj.validate();
  return obj;
}

SolveOptions Scenario::solve_options(std::uint64_t seed) const {
  SolveOptions o;
  o.seed = seed;
  const json* s = find(doc_, "solver");
  if (!s) return o;
  const std::string where = origin_name_ + "/solver";
  if (const json* obj = find(*s, "objective")) {
    const std::string v = obj->get<std::string>();
    if (v == "total-potential") {
      o.objective = ForceObjective::TotalPotential;
    } else if (v == "elastic-only") {
      o.objective = ForceObjective::ElasticEnergyOnly;
    } else {
      throw ConfigError(where + ": objective must be 'total-potential' or 'elastic-only'");
    }
  }
  o.tolerance = opt_num(*s, where, "tolerance", o.tolerance);
  o.max_iterations = opt_int(*s, where, "max_iterations", o.max_iterations);
  o.jitter_starts = opt_int(*s, where, "jitter_starts", o.jitter_starts);
  o.model.literal_frame_rotation =
      opt_bool(*s, where, "literal_frame_rotation", o.model.literal_frame_rotation);
  return o;
}

WrapOptions Scenario::wrap_options(std::uint64_t seed) const {
  WrapOptions o;
  o.solver = solve_options(seed);
  const json* s = find(doc_, "grasp");
  if (!s) return o;
  const std::string where = origin_name_ + "/grasp";
  o.force_step = opt_num(*s, where, "force_step", o.force_step);
  o.penetration_tol = opt_num(*s, where, "penetration_tol", o.penetration_tol);
  o.contact_tol = opt_num(*s, where, "contact_tol", o.contact_tol);
  o.tip_length = opt_num(*s, where, "tip_length", o.tip_length);
  return o;
}

ScrewSimOptions Scenario::screw_sim_options() const {
  ScrewSimOptions o;
  if (const json* m = find(doc_, "motor"))
    o.max_step = opt_num(*m, origin_name_ + "/motor", "step", 0.01 / angle_factor(doc_)) *
                 angle_factor(doc_);
  if (const json* t = find(doc_, "trsw"))
    o.kinetic_ratio = opt_num(*t, origin_name_ + "/trsw", "kinetic_ratio", 1.0);
  return o;
}

double Scenario::motor_sweep_angle() const {
  const json& m = need_section(doc_, origin_name_, "motor");
  return need_num(m, origin_name_ + "/motor", "sweep") * angle_factor(doc_);
}

double Scenario::tau_th() const { return need_num(doc_, origin_name_, "tau_th"); }

std::vector<double> Scenario::forces() const {
  const json* f = find(doc_, "forces");
  if (!f || !f->is_array() || f->empty())
    throw ConfigError(origin_name_ + ": 'forces' must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : *f) out.push_back(v.get<double>());
  return out;
}

HandConfig Scenario::hand_config(std::uint64_t seed) const {
  HandConfig c;
  c.trsw = trsw_params();
  c.finger = finger_params();
  c.lock = lock_params();
  c.tau_th = tau_th();
  if (const json* h = find(doc_, "hand")) {
    const std::string where = origin_name_ + "/hand";
    c.finger_count = opt_int(*h, where, "finger_count", c.finger_count);
    c.finger_strength = opt_num(*h, where, "finger_strength", c.finger_strength);
  }
  if (const json* cy = find(doc_, "cycle")) {
    c.options.motor_step = opt_num(*cy, origin_name_ + "/cycle", "motor_step",
                                   0.005 / angle_factor(doc_)) *
                           angle_factor(doc_);
  }
  c.options.screw = screw_sim_options();
  c.options.wrap = wrap_options(seed);
  c.options.solver = solve_options(seed);
  c.validate();
  return c;
}

std::vector<PostureObservation> Scenario::observations() const {
  const json* v = find(doc_, "observations_csv");
  if (!v || !v->is_string())
    throw ConfigError(origin_name_ + ": missing 'observations_csv' path");
  std::filesystem::path p = v->get<std::string>();
  if (p.is_relative()) p = origin_dir_ / p;
  return read_observations_csv(p, finger_params().n);
}

SpringObjective Scenario::design_objective() const {
  const json& d = need_section(doc_, origin_name_, "design");
  const std::string v = need_str(d, origin_name_ + "/design", "objective");
  if (v == "uniform-bend") return SpringObjective::UniformBend;
  if (v == "proximal-first") return SpringObjective::ProximalFirst;
  throw ConfigError(origin_name_ + "/design: objective must be 'uniform-bend' or 'proximal-first'");
}

double Scenario::design_reference_force() const {
  const json& d = need_section(doc_, origin_name_, "design");
  return need_num(d, origin_name_ + "/design", "f_tr_ref");
}

std::vector<PostureObservation> read_observations_csv(const std::filesystem::path& path,
                                                      int expected_pins) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open observations CSV: " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "f_tr_N,pin_index,x_mm,y_mm")
    throw ConfigError(path.string() + ": expected header 'f_tr_N,pin_index,x_mm,y_mm'");

  std::vector<PostureObservation> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 4> cols{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 4; ++c) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
      try {
        cols[static_cast<size_t>(c)] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell +
                          "'");
      }
    }
    const int pin = static_cast<int>(cols[1]);
    if (pin == 1) {
      out.emplace_back();
      out.back().f_tr = cols[0];
    }
    if (out.empty() || pin != static_cast<int>(out.back().pins.size()) + 1)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": pin_index must run 1..n per observation");
    if (cols[0] != out.back().f_tr)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": f_tr changed mid-observation");
    out.back().pins.push_back(Vec2{cols[2], cols[3]});
  }
  for (const auto& obs : out) {
    if (static_cast<int>(obs.pins.size()) != expected_pins)
      throw ConfigError(path.string() + ": observation has " + std::to_string(obs.pins.size()) +
                        " pins, expected " + std::to_string(expected_pins));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

namespace {

struct ExperimentOutput {
  json results;
  // Flat key/value pairs for sweep summary rows, fixed order per experiment.
  std::vector<std::pair<std::string, std::string>> metrics;
};

json posture_summary(const FingerParams& params, const SolveResult& s) {
  json j;
  j["objective"] = s.objective;
  j["elastic_energy_Nmm"] = elastic_energy(params, s.posture);
  j["total_bend_rad"] = s.posture.total_bend();
  const Kinematics kin = forward_kinematics(params, s.posture);
  j["tip_mm"] = json::array({kin.tip[0], kin.tip[1]});
  return j;
}

void write_posture_csv(const std::filesystem::path& file, const FingerParams& params,
                       const SolveResult& s) {
  CsvWriter csv;
  csv.cell("joint").cell("theta_L_rad").cell("f_FS_N").cell("m_L_Nmm").cell("pin_x_mm").cell(
      "pin_y_mm");
  csv.end_row();
  const Kinematics kin = forward_kinematics(params, s.posture);
  for (int i = 0; i < params.n; ++i) {
    const size_t k = static_cast<size_t>(i);
    csv.cell(i + 1)
        .cell(s.posture.theta[k])
        .cell(s.dist.f[k])
        .cell(s.loads.m_L[k])
        .cell(kin.pins[k][0])
        .cell(kin.pins[k][1]);
    csv.end_row();
  }
  csv.write(file);
}

ExperimentOutput run_trsw_sim(const Scenario& sc, const std::filesystem::path& out_dir,
                              const std::string& prefix, const RunOptions&) {
  const ScrewDriveParams params = sc.trsw_params();
  const LoadModel load = sc.load_model();
  const ScrewSimOptions opts = sc.screw_sim_options();
  const SweepResult r = sweep_motor(params, load, sc.motor_sweep_angle(), opts);

  CsvWriter csv;
  csv.cell("theta_m_rad").cell("mode").cell("x_shaft_mm").cell("theta_sh_rad").cell("f_ex_N").cell(
      "tau_m_Nmm");
  csv.end_row();
  for (const auto& row : r.trace) {
    csv.cell(row.theta_m)
        .cell(to_string(row.mode))
        .cell(row.x_shaft)
        .cell(row.theta_sh)
        .cell(row.f_ex)
        .cell(row.tau_m);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_trace.csv"));

  ExperimentOutput out;
  out.results["switched"] = r.switched;
  out.results["stalled"] = r.stalled;
  out.results["peak_f_ex_N"] = r.peak_f_ex;
  out.results["switching_threshold_N"] = switching_threshold(params);
  out.results["final_theta_m_rad"] = r.final_state.theta_m;
  out.results["final_x_shaft_mm"] = r.final_state.x_shaft;
  out.results["final_theta_sh_rad"] = r.final_state.theta_sh;
  out.metrics = {{"peak_f_ex_N", format_float(r.peak_f_ex)},
                 {"switched", r.switched ? "true" : "false"},
                 {"stalled", r.stalled ? "true" : "false"},
                 {"final_x_shaft_mm", format_float(r.final_state.x_shaft)},
                 {"final_theta_sh_rad", format_float(r.final_state.theta_sh)}};
  return out;
}

ExperimentOutput run_finger_solve(const Scenario& sc, const std::filesystem::path& out_dir,
                                  const std::string& prefix, const RunOptions& ro) {
  const FingerParams params = sc.finger_params();
  const SolveOptions opts = sc.solve_options(ro.seed);
  const std::vector<double> forces = sc.forces();

  ExperimentOutput out;
  out.results["postures"] = json::array();
  double last_bend = 0.0;
  for (size_t i = 0; i < forces.size(); ++i) {
    const SolveResult s = solve_posture(params, forces[i], opts);
    write_posture_csv(out_dir / (prefix + "_posture_" + std::to_string(i + 1) + ".csv"), params, s);
    json item = posture_summary(params, s);
    item["f_tr_N"] = forces[i];
    out.results["postures"].push_back(item);
    last_bend = s.posture.total_bend();
  }
  out.metrics = {{"n_forces", std::to_string(forces.size())},
                 {"total_bend_rad", format_float(last_bend)}};
  return out;
}

ExperimentOutput run_identify(const Scenario& sc, const std::filesystem::path& out_dir,
                              const std::string& prefix, const RunOptions& ro) {
  const FingerParams geometry = sc.finger_params();
  const std::vector<PostureObservation> obs = sc.observations();
  const KfsResult r = identify_kfs(geometry, obs, sc.solve_options(ro.seed));

  CsvWriter csv;
  csv.cell("observation").cell("f_tr_N").cell("k_fs_Nmm_per_rad").cell("residual_mm").cell(
      "identifiable");
  csv.end_row();
  for (size_t i = 0; i < r.fits.size(); ++i) {
    csv.cell(static_cast<int>(i) + 1)
        .cell(obs[i].f_tr)
        .cell(r.fits[i].k_fs)
        .cell(r.fits[i].residual)
        .cell(r.fits[i].identifiable);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_fits.csv"));

  ExperimentOutput out;
  out.results["mean_k_fs_Nmm_per_rad"] = r.mean_k_fs;
  out.results["mean_k_fs_Nmm_per_deg"] = r.mean_k_fs * kPi / 180.0;
  out.results["identifiable_count"] = r.identifiable_count;
  out.metrics = {{"mean_k_fs_Nmm_per_rad", format_float(r.mean_k_fs)},
                 {"identifiable_count", std::to_string(r.identifiable_count)}};
  return out;
}

ExperimentOutput run_design_springs(const Scenario& sc, const std::filesystem::path& out_dir,
                                    const std::string& prefix, const RunOptions& ro) {
  const FingerParams base = sc.finger_params();
  const SolveOptions opts = sc.solve_options(ro.seed);
  const SpringObjective objective = sc.design_objective();
  const double f_ref = sc.design_reference_force();
  const std::vector<double> k_sp = design_springs(base, objective, f_ref, opts);

  FingerParams designed = base;
  designed.k_sp = k_sp;
  const SolveResult s = solve_posture(designed, f_ref, opts);

  CsvWriter csv;
  csv.cell("joint").cell("k_sp_Nmm_per_rad").cell("theta_L_rad");
  csv.end_row();
  for (int i = 0; i < designed.n; ++i) {
    csv.cell(i + 1).cell(k_sp[static_cast<size_t>(i)]).cell(
        s.posture.theta[static_cast<size_t>(i)]);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_springs.csv"));
  write_posture_csv(out_dir / (prefix + "_posture.csv"), designed, s);

  const auto [mn, mx] = std::minmax_element(s.posture.theta.begin(), s.posture.theta.end());
  const double mean = s.posture.total_bend() / designed.n;
  ExperimentOutput out;
  out.results["k_sp_Nmm_per_rad"] = k_sp;
  out.results["spread_ratio"] = mean > 0.0 ? (*mx - *mn) / mean : 0.0;
  out.results["theta_first_rad"] = s.posture.theta.front();
  out.results["theta_last_rad"] = s.posture.theta.back();
  out.metrics = {{"spread_ratio", format_float(out.results["spread_ratio"].get<double>())},
                 {"k_sp_first", format_float(k_sp.front())},
                 {"k_sp_last", format_float(k_sp.back())}};
  return out;
}

ExperimentOutput run_grasp_sim(const Scenario& sc, const std::filesystem::path& out_dir,
                               const std::string& prefix, const RunOptions& ro) {
  const FingerParams finger = sc.finger_params();
  const ScrewDriveParams trsw = sc.trsw_params();
  const std::optional<CircularObject> obj = sc.object();
  if (!obj) throw ConfigError("grasp-sim requires an 'object' section");
  const WrapResult r = wrap_simulate(finger, *obj, trsw, sc.tau_th(), sc.wrap_options(ro.seed));

  CsvWriter csv;
  csv.cell("step").cell("f_tr_N").cell("frozen_count").cell("max_penetration_mm").cell(
      "sum_theta_rad");
  csv.end_row();
  for (size_t i = 0; i < r.trace.size(); ++i) {
    csv.cell(static_cast<int>(i))
        .cell(r.trace[i].f_tr)
        .cell(r.trace[i].frozen_count)
        .cell(r.trace[i].max_penetration)
        .cell(r.trace[i].sum_theta);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_wrap.csv"));

  SolveResult posture;
  posture.posture = r.posture;
  posture.dist = r.dist;
  posture.loads = equilibrium_recursion(finger, r.dist).loads;
  write_posture_csv(out_dir / (prefix + "_posture.csv"), finger, posture);

  ExperimentOutput out;
  out.results["terminated_by"] = to_string(r.terminated_by);
  out.results["contact_links"] = r.contact_links;
  out.results["contact_count"] = static_cast<int>(r.contact_links.size());
  out.results["f_tr_final_N"] = r.f_tr_final;
  out.results["object_center_mm"] = json::array({obj->center[0], obj->center[1]});
  out.results["object_diameter_mm"] = obj->diameter;
  out.metrics = {{"terminated_by", to_string(r.terminated_by)},
                 {"contact_count", std::to_string(r.contact_links.size())},
                 {"f_tr_final_N", format_float(r.f_tr_final)}};
  return out;
}

ExperimentOutput run_cycle_sim(const Scenario& sc, const std::filesystem::path& out_dir,
                               const std::string& prefix, const RunOptions& ro) {
  const HandConfig config = sc.hand_config(ro.seed);
  const std::optional<CircularObject> obj = sc.object();

  const GraspResult grasp = grasp_phase(config, obj);
  const CycleTrace release = release_phase(config, grasp.end);

  std::vector<CycleRecord> all = grasp.trace.records;
  all.insert(all.end(), release.records.begin(), release.records.end());

  CsvWriter csv;
  csv.cell("step").cell("phase").cell("theta_m_rad").cell("mode").cell("x_shaft_mm").cell(
      "theta_sh_rad").cell("f_ex_N").cell("lock_engaged").cell("sum_theta_rad");
  csv.end_row();
  int t2r = 0, r2t = 0;
  for (size_t i = 0; i < all.size(); ++i) {
    if (i > 0) {
      if (all[i - 1].mode == MotionMode::Translation && all[i].mode == MotionMode::Rotation) ++t2r;
      if (all[i - 1].mode == MotionMode::Rotation && all[i].mode == MotionMode::Translation) ++r2t;
    }
    csv.cell(static_cast<int>(i))
        .cell(to_string(all[i].phase))
        .cell(all[i].theta_m)
        .cell(to_string(all[i].mode))
        .cell(all[i].x_shaft)
        .cell(all[i].theta_sh)
        .cell(all[i].f_ex)
        .cell(all[i].lock_engaged)
        .cell(all[i].sum_theta);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_cycle.csv"));

  const FeasibilityReport feas = check_cycle_feasibility(config);
  ExperimentOutput out;
  out.results["translation_to_rotation"] = t2r;
  out.results["rotation_to_translation"] = r2t;
  out.results["final_x_shaft_mm"] = all.back().x_shaft;
  out.results["final_sum_theta_rad"] = all.back().sum_theta;
  out.results["grasp_f_tr_N"] = grasp.end.f_tr;
  if (grasp.end.wrap_termination)
    out.results["wrap_termination"] = to_string(*grasp.end.wrap_termination);
  out.results["payload_estimate_kg"] = payload_estimate(config);
  json checks = json::array();
  for (const auto& c : feas.checks) {
    json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["margin"] = c.margin;
    checks.push_back(jc);
  }
  out.results["feasibility"] = {{"pass", feas.pass}, {"checks", checks},
                                {"assumption", feas.assumption}};
  out.metrics = {{"translation_to_rotation", std::to_string(t2r)},
                 {"rotation_to_translation", std::to_string(r2t)},
                 {"final_x_shaft_mm", format_float(all.back().x_shaft)},
                 {"final_sum_theta_rad", format_float(all.back().sum_theta)},
                 {"payload_kg", format_float(out.results["payload_estimate_kg"].get<double>())}};
  return out;
}

ExperimentOutput run_validate(const Scenario& sc, const std::filesystem::path&, const std::string&,
                              const RunOptions& ro) {
  const ScrewDriveParams trsw = sc.trsw_params();
  const DesignReport report = validate_design(trsw);

  ExperimentOutput out;
  json checks = json::array();
  for (const auto& c : report.checks) {
    json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["margin"] = c.margin;
    jc["detail"] = c.detail;
    checks.push_back(jc);
  }
  out.results["design_checks"] = checks;
  out.results["f_ex_sw_N"] = report.f_ex_sw;
  bool all_pass = report.all_pass();

  if (sc.document().contains("finger") && sc.document().contains("lock") &&
      sc.document().contains("tau_th")) {
    const FeasibilityReport feas = check_cycle_feasibility(sc.hand_config(ro.seed));
    json fchecks = json::array();
    for (const auto& c : feas.checks) {
      json jc;
      jc["name"] = c.name;
      jc["pass"] = c.pass;
      jc["margin"] = c.margin;
      fchecks.push_back(jc);
    }
    out.results["cycle_feasibility"] = {{"pass", feas.pass}, {"checks", fchecks},
                                        {"assumption", feas.assumption}};
    all_pass = all_pass && feas.pass;
  }
  out.results["all_pass"] = all_pass;
  out.metrics = {{"all_pass", all_pass ? "true" : "false"},
                 {"f_ex_sw_N", format_float(report.f_ex_sw)}};
  return out;
}

ExperimentOutput dispatch(const Scenario& sc, const std::filesystem::path& out_dir,
                          const std::string& prefix, const RunOptions& options) {
  const std::string& e = sc.experiment();
  if (e == "trsw-sim") return run_trsw_sim(sc, out_dir, prefix, options);
  if (e == "finger-solve") return run_finger_solve(sc, out_dir, prefix, options);
  if (e == "identify-kfs") return run_identify(sc, out_dir, prefix, options);
  if (e == "design-springs") return run_design_springs(sc, out_dir, prefix, options);
  if (e == "grasp-sim") return run_grasp_sim(sc, out_dir, prefix, options);
  if (e == "cycle-sim") return run_cycle_sim(sc, out_dir, prefix, options);
  if (e == "validate") return run_validate(sc, out_dir, prefix, options);
  throw ConfigError("unknown experiment: " + e);
}

}  // namespace

void Scenario::run(const std::filesystem::path& out_dir, const RunOptions& options) const {
  if (has_sweep())
    throw ConfigError(origin_name_ + ": scenario declares a sweep; use the sweep command");
  std::filesystem::create_directories(out_dir);
  const std::string prefix = out_prefix();
  const ExperimentOutput out = dispatch(*this, out_dir, prefix, options);

  json summary;
  summary["scenario"] = doc_;
  summary["results"] = out.results;
  write_json(out_dir / (prefix + "_summary.json"), summary);

  if (options.strict && experiment_ == "validate" && !out.results["all_pass"].get<bool>())
    throw InfeasibleError(origin_name_ + ": validation checks failed (--strict)");
}

Scenario Scenario::with_override(const std::string& dotted_path, const json& value) const {
  json doc = doc_;
  json* node = &doc;
  std::string rest = dotted_path;
  while (true) {
    const size_t dot = rest.find('.');
    const std::string key = rest.substr(0, dot);
    if (dot == std::string::npos) {
      if (!node->is_object() || !node->contains(key))
        throw ConfigError(origin_name_ + "/sweep: unknown parameter '" + dotted_path + "'");
      (*node)[key] = value;
      break;
    }
    if (!node->is_object() || !node->contains(key))
      throw ConfigError(origin_name_ + "/sweep: unknown parameter '" + dotted_path + "'");
    node = &(*node)[key];
    rest = rest.substr(dot + 1);
  }
  Scenario sc;
  sc.doc_ = std::move(doc);
  sc.experiment_ = experiment_;
  sc.origin_dir_ = origin_dir_;
  sc.origin_name_ = origin_name_;
  return sc;
}

void Scenario::run_sweep(const std::filesystem::path& out_dir, const RunOptions& options) const {
  const json* sweep = find(doc_, "sweep");
  if (!sweep) throw ConfigError(origin_name_ + ": sweep requested but no 'sweep' section");
  const std::string parameter = (*sweep)["parameter"].get<std::string>();
  const json& values = (*sweep)["values"];

  std::filesystem::create_directories(out_dir);
  const std::string prefix = out_prefix();

  struct Point {
    json value;
    ExperimentOutput output;
    std::string error;
  };
  std::vector<Point> points(values.size());
  for (size_t i = 0; i < values.size(); ++i) points[i].value = values[i];

  const int threads = std::clamp(options.threads, 1, 64);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      Scenario point = with_override(parameter, points[i].value);
      point.doc_.erase("sweep");
      const std::string pt_prefix = prefix + "_pt" + std::to_string(i);
      try {
        points[i].output = dispatch(point, out_dir, pt_prefix, options);
      } catch (const std::exception& e) {
        points[i].error = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Summary CSV, one row per grid point in input order.
  CsvWriter csv;
  csv.cell("index").cell(parameter);
  std::vector<std::string> metric_keys;
  for (const auto& p : points) {
    if (p.error.empty()) {
      for (const auto& kv : p.output.metrics) metric_keys.push_back(kv.first);
      break;
    }
  }
  for (const auto& k : metric_keys) csv.cell(k);
  csv.cell("error");
  csv.end_row();
  for (size_t i = 0; i < points.size(); ++i) {
    csv.cell(static_cast<int>(i));
    csv.cell(points[i].value.is_number() ? format_float(points[i].value.get<double>())
                                         : points[i].value.dump());
    for (const auto& k : metric_keys) {
      std::string cell;
      for (const auto& kv : points[i].output.metrics)
        if (kv.first == k) cell = kv.second;
      csv.cell(cell);
    }
    csv.cell(points[i].error);
    csv.end_row();
  }
  csv.write(out_dir / (prefix + "_sweep.csv"));

  json summary;
  summary["scenario"] = doc_;
  json results;
  results["parameter"] = parameter;
  results["points"] = json::array();
  for (size_t i = 0; i < points.size(); ++i) {
    json p;
    p["index"] = static_cast<int>(i);
    p["value"] = points[i].value;
    if (points[i].error.empty()) {
      p["results"] = points[i].output.results;
    } else {
      p["error"] = points[i].error;
    }
    results["points"].push_back(p);
  }
  summary["results"] = results;
  write_json(out_dir / (prefix + "_summary.json"), summary);
}

}  // namespace gripsim
