#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "parctl/config.hpp"
#include "parctl/errors.hpp"
#include "parctl/experiments.hpp"

using namespace parctl;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("parctl_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_ini(const std::string& name, const std::string& body) {
  const fs::path p = scratch_dir("ini") / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream is(p);
  int n = 0;
  for (std::string line; std::getline(is, line);) ++n;
  return n;
}

const fs::path kConfigs = PARCTL_CONFIG_DIR;

}  // namespace

TEST_CASE("numbers and descriptors") {
  CHECK(parse_number("0.2pi") == doctest::Approx(0.2 * pi));
  CHECK(parse_number("pi") == doctest::Approx(pi));
  CHECK(parse_number("-pi") == doctest::Approx(-pi));
  CHECK(parse_number(" 1e-4 ") == 1e-4);
  CHECK_THROWS_AS(parse_number("abc"), ConfigError);
  CHECK_THROWS_AS(parse_number("1.5x"), ConfigError);

  CHECK(std::holds_alternative<IntervalIndicator>(parse_descriptor("interval:0.2pi,0.4pi")));
  CHECK(std::holds_alternative<L1BallIndicator>(parse_descriptor("l1ball:-0.5,-0.5,0.2")));
  const auto g = std::get<GaussianSum>(parse_descriptor("gaussian:0.5,0.5,20,1;0.6,0.1,20,1"));
  CHECK(g.bumps.size() == 2);
  CHECK(g.bumps[1].center[1] == 0.1);
  CHECK(std::holds_alternative<SampledValues>(parse_descriptor("zero")));
  CHECK_THROWS_AS(parse_descriptor("interval:1,0"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("interval:1"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("l1ball:0,0,-1"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("disk:0,0,1"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("gaussian:"), ConfigError);
}

TEST_CASE("config loading") {
  SUBCASE("defaults reproduce the isotropic example") {
    const RunConfig c;
    CHECK(c.horizon == 0.01);
    CHECK(c.alpha == 1e-4);
    CHECK(elements_for_mesh_size(c.h) == 63);
    CHECK(c.eps_fractions == std::vector<double>{0.2, 0.5, 0.9});
    CHECK(c.phi_points == 350);
  }
  SUBCASE("keys override the base") {
    const auto p = write_ini("a.ini", "[problem]\nT = 0.02\neps_fractions = 0.3, 0.6\n[mesh]\nn_el = 40\n");
    const RunConfig c = load_config(p.string());
    CHECK(c.horizon == 0.02);
    CHECK(c.eps_fractions == std::vector<double>{0.3, 0.6});
    CHECK(c.n_el == 40);
    CHECK(c.alpha == 1e-4);
    const RunConfig d = load_config(p.string(), lshape_defaults());
    CHECK(d.dimension == 2);
    CHECK(d.horizon == 0.02);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/parctl.ini"), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("b.ini", "[problem]\ngamma = 1\n").string()), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("c.ini", "[problem]\neps_fractions = 0.5, 1.5\n").string()), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("d.ini", "[problem]\nalpha = 0\n").string()), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("e.ini", "[problem]\nw = disk:0,0,1\n").string()), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("f.ini", "[mesh]\nn_el = 2.5\n").string()), ConfigError);
    CHECK_THROWS_AS(load_config(write_ini("g.ini", "[mesh]\ndiffusion_jump = -1\n").string()), ConfigError);
    try {
      load_config(write_ini("h.ini", "[problem]\ngamma = 1\n").string());
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("problem.gamma") != std::string::npos);
      CHECK(e.code() == "config_error");
    }
  }
  SUBCASE("shipped configs are valid") {
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
      if (entry.path().extension() != ".ini") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path().string()));
    }
  }
}

TEST_CASE("discontinuous example differs only through the operator") {
  const RunConfig iso = load_config((kConfigs / "example1d_isotropic.ini").string());
  const RunConfig jump = load_config((kConfigs / "example1d_discontinuous.ini").string());
  RunConfig aligned = jump;
  aligned.name = iso.name;
  aligned.output_dir = iso.output_dir;
  aligned.diffusion_jump = iso.diffusion_jump;
  aligned.interface = iso.interface;
  nlohmann::json a, b;
  // compare every remaining field through the sidecar echo
  const fs::path da = scratch_dir("audit_a"), db = scratch_dir("audit_b");
  RunConfig ia = iso, ja = aligned;
  ia.output_dir = da.string();
  ja.output_dir = db.string();
  ia.phi_points = ja.phi_points = 2;
  run_example(ia, false, true);
  run_example(ja, false, true);
  a = nlohmann::json::parse(slurp(da / "summary.csv.json"))["config"];
  b = nlohmann::json::parse(slurp(db / "summary.csv.json"))["config"];
  CHECK(a == b);
  CHECK(jump.diffusion_jump == -0.8);
  CHECK(jump.interface == 2.2);

  const DiscreteOperator op_iso = build_operator(iso), op_jump = build_operator(jump);
  const ProblemSpec p_iso = build_problem(iso, op_iso), p_jump = build_problem(jump, op_jump);
  CHECK((p_iso.ystar - p_jump.ystar).norm() == 0.0);
  CHECK((p_iso.w_of(1, op_iso.dim()) - p_jump.w_of(1, op_jump.dim())).norm() == 0.0);
  CHECK((op_iso.mass() - op_jump.mass()).norm() == 0.0);
  CHECK((op_iso.stiffness() - op_jump.stiffness()).norm() > 0.0);
}

TEST_CASE("problem construction") {
  RunConfig c;
  const DiscreteOperator op = build_operator(c);
  CHECK(op.dim() == 62);
  const ProblemSpec spec = build_problem(c, op);
  REQUIRE(spec.segments.size() == 3);
  CHECK(spec.segments[0].beta == 0.0);
  CHECK(spec.segments[1].beta == 1.0);
  CHECK(spec.segments[2].beta == 0.0);
  CHECK(spec.segments[1].begin == doctest::Approx(c.horizon / 3));
  CHECK(spec.segments[1].end == doctest::Approx(2 * c.horizon / 3));
  CHECK_FALSE(spec.has_source());
  CHECK(project_field(op, "zero").norm() == 0.0);
  CHECK(project_field(op, "constant:2").minCoeff() == 2.0);

  RunConfig two = lshape_defaults();
  two.h = 0.25;
  const DiscreteOperator op2 = build_operator(two);
  CHECK(op2.geometry().spatial_dim() == 2);
  CHECK(build_problem(two, op2).ystar.maxCoeff() > 0.5);
}

TEST_CASE("example run writes artifacts and is deterministic") {
  RunConfig c;
  c.phi_points = 20;
  c.output_dir = scratch_dir("ex1").string();
  std::ostringstream log;
  const ExampleResult r = run_example(c, true, true, &log);
  CHECK(std::abs(r.phi0 - 1.0374) <= 0.02 * 1.0374);
  CHECK(log.str().find("Phi(0)") != std::string::npos);
  REQUIRE(r.runs.size() == 3);
  CHECK(r.runs[2].rel_distance_to_umin < r.runs[0].rel_distance_to_umin);
  for (const auto& run : r.runs) {
    CHECK(std::abs(run.solution.miss - run.solution.epsilon) <= 1e-6 * r.phi0);
    CHECK(run.solution.kkt <= 1e-6);
  }
  const fs::path out = c.output_dir;
  for (const char* f : {"summary.csv", "snapshots.csv", "phi_curve.csv"}) {
    CHECK(fs::exists(out / f));
    CHECK(fs::exists(out / (std::string(f) + ".json")));
  }
  CHECK(count_lines(out / "summary.csv") == 4);
  CHECK(count_lines(out / "phi_curve.csv") == 21);
  CHECK(count_lines(out / "snapshots.csv") == 63);
  const auto meta = nlohmann::json::parse(slurp(out / "summary.csv.json"));
  CHECK(meta["timing_seconds"]["phi0"].get<double>() >= 0.0);
  CHECK(meta["config"]["problem"]["alpha"].get<double>() == 1e-4);

  RunConfig again = c;
  again.output_dir = scratch_dir("ex1_again").string();
  run_example(again, true, true);
  for (const char* f : {"summary.csv", "snapshots.csv", "phi_curve.csv"})
    CHECK(slurp(out / f) == slurp(fs::path(again.output_dir) / f));
}

TEST_CASE("phi curve study") {
  RunConfig c;
  c.phi_points = 40;
  c.phi_mu_min = 1e-8;
  c.threads = 2;
  c.output_dir = scratch_dir("phi").string();
  const PhiCurveResult r = run_phi_curve(c, true);
  REQUIRE(r.samples.size() == 40);
  CHECK(r.violations == 0);
  CHECK(std::abs(r.samples.front().second - r.phi0) <= 1e-4 * r.phi0);
  CHECK(r.samples.back().second <= 1e-3 * r.phi0);
  CHECK(count_lines(fs::path(c.output_dir) / "phi_curve.csv") == 41);
}

TEST_CASE("sensitivity and oracle studies write their tables") {
  RunConfig c;
  c.nus = {1e-2, 1e-3};
  c.channels = {"alpha", "operator"};
  c.output_dir = scratch_dir("sens").string();
  const auto rows = run_sensitivity(c, true);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.ok);
  CHECK(count_lines(fs::path(c.output_dir) / "sensitivity_alpha.csv") == 3);
  const auto meta = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "sensitivity_operator.csv.json"));
  CHECK(meta["phi0_constants"].size() == 2);

  RunConfig o;
  o.n_el = 65;
  o.output_dir = scratch_dir("oracle").string();
  const OracleCheckResult res = run_oracle_check(o, true);
  CHECK(res.u_rel <= 1e-7);
  CHECK(res.mu_rel <= 1e-8);
  CHECK(fs::exists(fs::path(o.output_dir) / "oracle_check.csv"));
}
