#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "gripsim.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gripsim_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

constexpr const char* kValidateScenario = R"({
  "experiment": "validate",
  "units": {"angle": "rad", "stiffness": "N.mm/rad"},
  "trsw": {"r_g1": 30.0, "r_g2": 15.0, "theta_th": 0.35, "mu_st": 0.2,
           "tau_pre_max": 280.0, "tau_m_max": 200.0}
})";

constexpr const char* kFailingScenario = R"({
  "experiment": "validate",
  "units": {"angle": "rad", "stiffness": "N.mm/rad"},
  "trsw": {"r_g1": 10.0, "r_g2": 20.0, "theta_th": 0.35, "mu_st": 0.2,
           "tau_pre_max": 280.0, "tau_m_max": 200.0}
})";

}  // namespace

TEST_CASE("version string is present") {
  CHECK(gripsim_version() != nullptr);
  CHECK(std::strlen(gripsim_version()) > 0);
}

TEST_CASE("direct computations") {
  double value = 0.0;
  REQUIRE(gripsim_switching_threshold(10.0, std::atan(0.05), 50.0, &value) == GRIPSIM_OK);
  CHECK(value == doctest::Approx(100.0).epsilon(1e-12));

  REQUIRE(gripsim_required_preload_torque(10.0, std::atan(0.05), 100.0, &value) == GRIPSIM_OK);
  CHECK(value == doctest::Approx(50.0).epsilon(1e-12));

  REQUIRE(gripsim_payload_estimate(3, 104.2, &value) == GRIPSIM_OK);
  CHECK(value > 30.0);
  CHECK(value < 33.0);

  CHECK(gripsim_payload_estimate(3, 104.2, nullptr) == GRIPSIM_ERR_CONFIG);
  CHECK(gripsim_switching_threshold(-5.0, 0.3, 50.0, &value) == GRIPSIM_ERR_CONFIG);
  CHECK(std::strlen(gripsim_last_error()) > 0);
}

TEST_CASE("posture solve through the C surface") {
  const double k_sp[2] = {0.0, 0.0};
  double theta[2] = {0.0, 0.0};
  double f[2] = {0.0, 0.0};
  REQUIRE(gripsim_solve_posture(2, 12.0, 13.0, k_sp, 257.831, 2.0, theta, f) == GRIPSIM_OK);
  CHECK(f[0] + f[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(theta[0] > 0.0);
  CHECK(theta[1] > 0.0);

  CHECK(gripsim_solve_posture(2, 12.0, 13.0, nullptr, 257.831, 2.0, theta, f) ==
        GRIPSIM_ERR_CONFIG);
  CHECK(gripsim_solve_posture(2, 12.0, 13.0, k_sp, 257.831, -1.0, theta, f) ==
        GRIPSIM_ERR_CONFIG);
}

TEST_CASE("scenario lifecycle and run") {
  gripsim_scenario* sc = nullptr;
  REQUIRE(gripsim_scenario_parse(kValidateScenario, &sc) == GRIPSIM_OK);
  REQUIRE(sc != nullptr);
  CHECK(std::string(gripsim_scenario_experiment(sc)) == "validate");
  CHECK(gripsim_scenario_has_sweep(sc) == 0);

  const fs::path out = fresh_dir("run");
  CHECK(gripsim_run(sc, out.string().c_str(), nullptr) == GRIPSIM_OK);
  CHECK(fs::exists(out / "validate_summary.json"));
  gripsim_scenario_free(sc);
}

TEST_CASE("strict mode turns failing validation into status 3") {
  gripsim_scenario* sc = nullptr;
  REQUIRE(gripsim_scenario_parse(kFailingScenario, &sc) == GRIPSIM_OK);
  const fs::path out = fresh_dir("strict");

  gripsim_run_options opts{};
  CHECK(gripsim_run(sc, out.string().c_str(), &opts) == GRIPSIM_OK);

  opts.strict = 1;
  CHECK(gripsim_run(sc, out.string().c_str(), &opts) == GRIPSIM_ERR_INFEASIBLE);
  CHECK(std::strlen(gripsim_last_error()) > 0);
  gripsim_scenario_free(sc);
}

TEST_CASE("error paths set the thread-local message") {
  gripsim_scenario* sc = nullptr;
  CHECK(gripsim_scenario_load("/nonexistent/file.json", &sc) == GRIPSIM_ERR_CONFIG);
  CHECK(sc == nullptr);
  CHECK(std::strlen(gripsim_last_error()) > 0);

  CHECK(gripsim_scenario_parse("{not json", &sc) == GRIPSIM_ERR_CONFIG);
  CHECK(gripsim_scenario_load(nullptr, &sc) == GRIPSIM_ERR_CONFIG);
  CHECK(gripsim_run(nullptr, "/tmp", nullptr) == GRIPSIM_ERR_CONFIG);
}
