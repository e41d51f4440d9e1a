#include "gripsim.h"

#include <cstring>
#include <string>

#include "gripsim/scenario.hpp"

namespace {

thread_local std::string g_last_error;

gripsim_status capture(const std::exception& e, gripsim_status code) {
  g_last_error = e.what();
  return code;
}

template <typename Fn>
gripsim_status guarded(Fn&& fn) {
  try {
    fn();
    return GRIPSIM_OK;
  } catch (const gripsim::ConfigError& e) {
    return capture(e, GRIPSIM_ERR_CONFIG);
  } catch (const gripsim::SolverError& e) {
    return capture(e, GRIPSIM_ERR_SOLVER);
  } catch (const gripsim::InfeasibleError& e) {
    return capture(e, GRIPSIM_ERR_INFEASIBLE);
  } catch (const std::exception& e) {
    return capture(e, GRIPSIM_ERR_CONFIG);
  }
}

gripsim::RunOptions to_run_options(const gripsim_run_options* options) {
  gripsim::RunOptions ro;
  if (options) {
    ro.strict = options->strict != 0;
    ro.threads = options->threads > 0 ? options->threads : 1;
    ro.seed = options->seed;
  }
  return ro;
}

}  // namespace

struct gripsim_scenario {
  gripsim::Scenario scenario;
};

extern "C" {

const char* gripsim_version(void) { return "0.1.0"; }

const char* gripsim_last_error(void) { return g_last_error.c_str(); }

gripsim_status gripsim_scenario_load(const char* path, gripsim_scenario** out) {
  if (!path || !out) {
    g_last_error = "gripsim_scenario_load: null argument";
    return GRIPSIM_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    auto* handle = new gripsim_scenario{gripsim::Scenario::load_file(path)};
    *out = handle;
  });
}

gripsim_status gripsim_scenario_parse(const char* json_text, gripsim_scenario** out) {
  if (!json_text || !out) {
    g_last_error = "gripsim_scenario_parse: null argument";
    return GRIPSIM_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    auto* handle = new gripsim_scenario{gripsim::Scenario::parse(json_text)};
    *out = handle;
  });
}

void gripsim_scenario_free(gripsim_scenario* scenario) { delete scenario; }

const char* gripsim_scenario_experiment(const gripsim_scenario* scenario) {
  return scenario ? scenario->scenario.experiment().c_str() : "";
}

int gripsim_scenario_has_sweep(const gripsim_scenario* scenario) {
  return scenario && scenario->scenario.has_sweep() ? 1 : 0;
}

gripsim_status gripsim_run(const gripsim_scenario* scenario, const char* out_dir,
                           const gripsim_run_options* options) {
  if (!scenario || !out_dir) {
    g_last_error = "gripsim_run: null argument";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] { scenario->scenario.run(out_dir, to_run_options(options)); });
}

gripsim_status gripsim_sweep(const gripsim_scenario* scenario, const char* out_dir,
                             const gripsim_run_options* options) {
  if (!scenario || !out_dir) {
    g_last_error = "gripsim_sweep: null argument";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] { scenario->scenario.run_sweep(out_dir, to_run_options(options)); });
}

gripsim_status gripsim_switching_threshold(double r_g1_mm, double theta_th_rad,
                                           double tau_pre_max_nmm, double* out_newton) {
  if (!out_newton) {
    g_last_error = "gripsim_switching_threshold: null output";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] {
    gripsim::ScrewDriveParams p;
    p.r_g1 = r_g1_mm;
    p.r_g2 = r_g1_mm;  // threshold does not involve r_g2
    p.theta_th = theta_th_rad;
    p.tau_pre_max = tau_pre_max_nmm;
    p.tau_m_max = 1.0;
    p.validate();
    *out_newton = gripsim::switching_threshold(p);
  });
}

gripsim_status gripsim_required_preload_torque(double r_g1_mm, double theta_th_rad,
                                               double f_ex_newton, double* out_nmm) {
  if (!out_nmm) {
    g_last_error = "gripsim_required_preload_torque: null output";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] {
    gripsim::ScrewDriveParams p;
    p.r_g1 = r_g1_mm;
    p.r_g2 = r_g1_mm;
    p.theta_th = theta_th_rad;
    p.tau_m_max = 1.0;
    p.validate();
    *out_nmm = gripsim::required_preload_torque(p, f_ex_newton);
  });
}

gripsim_status gripsim_payload_estimate(int finger_count, double finger_strength_newton,
                                        double* out_kg) {
  if (!out_kg) {
    g_last_error = "gripsim_payload_estimate: null output";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] { *out_kg = gripsim::payload_estimate(finger_count, finger_strength_newton); });
}

gripsim_status gripsim_solve_posture(int n, double l_l_mm, double d_l_mm, const double* k_sp,
                                     double k_fs, double f_tr_newton, double* theta_out,
                                     double* f_out) {
  if (n > 0 && !k_sp) {
    g_last_error = "gripsim_solve_posture: null k_sp";
    return GRIPSIM_ERR_CONFIG;
  }
  return guarded([&] {
    gripsim::FingerParams p;
    p.n = n;
    p.l_L = l_l_mm;
    p.d_L = d_l_mm;
    p.k_sp.assign(k_sp, k_sp + (n > 0 ? n : 0));
    p.k_FS = k_fs;
    const gripsim::SolveResult s = gripsim::solve_posture(p, f_tr_newton);
    for (int i = 0; i < n; ++i) {
      if (theta_out) theta_out[i] = s.posture.theta[static_cast<size_t>(i)];
      if (f_out) f_out[i] = s.dist.f[static_cast<size_t>(i)];
    }
  });
}

}  // extern "C"
