#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gripsim/scenario.hpp"

using namespace gripsim;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) { return fs::path(GRIPSIM_FIXTURE_DIR) / name; }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gripsim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

constexpr const char* kMinimalValidate = R"({
  "experiment": "validate",
  "units": {"angle": "rad", "stiffness": "N.mm/rad"},
  "trsw": {"r_g1": 30.0, "r_g2": 15.0, "theta_th": 0.35, "mu_st": 0.2,
           "tau_pre_max": 280.0, "tau_m_max": 200.0}
})";

}  // namespace

TEST_CASE("parse: empty scenario reports the missing experiment selector") {
  try {
    Scenario::parse("{}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing experiment selector") != std::string::npos);
  }
}

TEST_CASE("parse: unknown keys are rejected everywhere") {
  std::string text = kMinimalValidate;
  text.insert(text.rfind('}'), ", \"bogus\": 1");
  CHECK_THROWS_AS(Scenario::parse(text), ConfigError);

  std::string nested = kMinimalValidate;
  nested.replace(nested.find("\"mu_st\""), 7, "\"mu_typo\"");
  CHECK_THROWS_AS(Scenario::parse(nested), ConfigError);
}

TEST_CASE("parse: malformed JSON errors carry a line number") {
  try {
    Scenario::parse("{\n  \"experiment\": \"validate\",\n  oops\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("parse: units block is mandatory and validated") {
  CHECK_THROWS_AS(Scenario::parse(R"({"experiment": "validate", "trsw": {}})"), ConfigError);
  CHECK_THROWS_AS(
      Scenario::parse(
          R"({"experiment": "validate", "units": {"angle": "furlong", "stiffness": "N.mm/rad"}})"),
      ConfigError);
}

TEST_CASE("units: degree inputs are converted at the boundary") {
  std::string text = kMinimalValidate;
  text.replace(text.find("\"angle\": \"rad\""), 14, "\"angle\": \"deg\"");
  text.replace(text.find("\"theta_th\": 0.35"), 16, "\"theta_th\": 20.0535228");
  const Scenario sc = Scenario::parse(text);
  CHECK(sc.trsw_params().theta_th == doctest::Approx(0.35).epsilon(1e-8));
}

TEST_CASE("units: stiffness in N.mm/deg is converted") {
  const Scenario sc = Scenario::load_file(fixture("fig10.scenario.json"));
  const FingerParams p = sc.finger_params();
  CHECK(p.k_FS == doctest::Approx(257.8310078088704).epsilon(1e-12));
  CHECK(p.n == 7);
}

TEST_CASE("trsw: preload from a slit-width calibration table") {
  std::string text = kMinimalValidate;
  text.replace(text.find("\"tau_pre_max\": 280.0"), 20,
               "\"d_slit\": 2.0, \"preload_calibration\": [[0.0, 0.0], [3.0, 600.0]]");
  const Scenario sc = Scenario::parse(text);
  CHECK(sc.trsw_params().tau_pre_max == doctest::Approx(400.0).epsilon(1e-12));

  std::string bad = text;
  bad.replace(bad.find("\"d_slit\": 2.0"), 13, "\"d_slit\": 9.0");
  CHECK_THROWS_AS(Scenario::parse(bad).trsw_params(), ConfigError);
}

TEST_CASE("run: fig10 fixture emits one posture CSV per force") {
  const Scenario sc = Scenario::load_file(fixture("fig10.scenario.json"));
  const fs::path out = fresh_dir("fig10");
  sc.run(out);
  CHECK(fs::exists(out / "fig10_posture_1.csv"));
  CHECK(fs::exists(out / "fig10_posture_2.csv"));
  CHECK(fs::exists(out / "fig10_posture_3.csv"));
  CHECK(fs::exists(out / "fig10_summary.json"));
}

TEST_CASE("run: outputs are byte-identical across repeated runs") {
  const Scenario sc = Scenario::load_file(fixture("fig10.scenario.json"));
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  sc.run(a);
  sc.run(b);
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
  }
}

TEST_CASE("run: summary files re-parse under the scenario reader") {
  const Scenario sc = Scenario::load_file(fixture("validate.scenario.json"));
  const fs::path out = fresh_dir("roundtrip");
  sc.run(out);
  const Scenario again = Scenario::load_file(out / "validate_summary.json");
  CHECK(again.experiment() == "validate");
  CHECK(again.trsw_params().tau_pre_max == doctest::Approx(280.0).epsilon(1e-12));
}

TEST_CASE("run: refuses a scenario that declares a sweep") {
  const Scenario sc = Scenario::load_file(fixture("fig5.scenario.json"));
  CHECK_THROWS_AS(sc.run(fresh_dir("refuse")), ConfigError);
}

TEST_CASE("sweep: fig5 fixture covers the switching regimes") {
  const Scenario sc = Scenario::load_file(fixture("fig5.scenario.json"));
  const fs::path out = fresh_dir("fig5");
  sc.run_sweep(out);
  CHECK(fs::exists(out / "fig5_sweep.csv"));
  CHECK(fs::exists(out / "fig5_summary.json"));
  for (int i = 0; i < 5; ++i)
    CHECK(fs::exists(out / ("fig5_pt" + std::to_string(i) + "_trace.csv")));

  // Peak load column is non-decreasing in the preload.
  const std::string csv = slurp(out / "fig5_sweep.csv");
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  double prev = -1.0;
  while (std::getline(ss, line)) {
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // index
    std::getline(row, cell, ',');  // value
    std::getline(row, cell, ',');  // peak_f_ex_N
    const double peak = std::stod(cell);
    CHECK(peak >= prev);
    prev = peak;
  }
}

TEST_CASE("sweep: threads do not change the outputs") {
  const Scenario sc = Scenario::load_file(fixture("fig5.scenario.json"));
  const fs::path serial = fresh_dir("fig5_serial"), parallel = fresh_dir("fig5_par");
  RunOptions one, four;
  four.threads = 4;
  sc.run_sweep(serial, one);
  sc.run_sweep(parallel, four);
  for (const auto& entry : fs::directory_iterator(serial)) {
    CHECK(slurp(entry.path()) == slurp(parallel / entry.path().filename()));
  }
}

TEST_CASE("sweep: a single grid point matches a plain run") {
  std::string text = slurp(fixture("fig5.scenario.json"));
  Scenario swept = Scenario::parse(text, fixture("fig5.scenario.json"));
  const fs::path out_sweep = fresh_dir("single_sweep");
  {
    // Restrict to one point.
    std::string single = text;
    single.replace(single.find("[0.0, 100.0, 200.0, 280.0, 2000.0]"), 34, "[280.0]");
    Scenario::parse(single).run_sweep(out_sweep);
  }
  const fs::path out_run = fresh_dir("single_run");
  {
    std::string plain = text;
    plain.replace(plain.find("\"sweep\": {\"parameter\": \"trsw.tau_pre_max\", "
                             "\"values\": [0.0, 100.0, 200.0, 280.0, 2000.0]},"),
                  91, "");
    Scenario::parse(plain).run(out_run);
  }
  CHECK(slurp(out_sweep / "fig5_pt0_trace.csv") == slurp(out_run / "fig5_trace.csv"));
}

TEST_CASE("observations CSV: format violations are reported") {
  const fs::path dir = fresh_dir("obs");
  const fs::path good = dir / "good.csv";
  {
    std::ofstream os(good);
    os << "f_tr_N,pin_index,x_mm,y_mm\n";
    for (int i = 1; i <= 3; ++i) os << "3.2," << i << "," << 12.0 * (i - 1) << ",0\n";
    for (int i = 1; i <= 3; ++i) os << "5.1," << i << "," << 11.0 * (i - 1) << ",1\n";
  }
  const auto obs = read_observations_csv(good, 3);
  CHECK(obs.size() == 2);
  CHECK(obs[0].f_tr == doctest::Approx(3.2));
  CHECK(obs[1].pins[2][0] == doctest::Approx(22.0));

  const fs::path bad_header = dir / "bad_header.csv";
  {
    std::ofstream os(bad_header);
    os << "force,pin,x,y\n3.2,1,0,0\n";
  }
  CHECK_THROWS_AS(read_observations_csv(bad_header, 3), ConfigError);

  const fs::path bad_seq = dir / "bad_seq.csv";
  {
    std::ofstream os(bad_seq);
    os << "f_tr_N,pin_index,x_mm,y_mm\n3.2,1,0,0\n3.2,3,12,0\n";
  }
  CHECK_THROWS_AS(read_observations_csv(bad_seq, 3), ConfigError);
}

TEST_CASE("scenario accessors validate semantic constraints") {
  std::string text = kMinimalValidate;
  text.replace(text.find("\"r_g1\": 30.0"), 12, "\"r_g1\": -1.0");
  CHECK_THROWS_AS(Scenario::parse(text).trsw_params(), ConfigError);
}
