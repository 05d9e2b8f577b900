#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "cosymlab/catalog.hpp"
#include "cosymlab/section.hpp"
#include "doctest.h"
#include "expression.hpp"

using namespace cosymlab;
using namespace cosymlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cosymlab_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

struct Run {
  int code;
  json report;
  std::string err;
};

Run run(const std::string& command, const json& cfg, const std::string& name,
        std::optional<std::uint64_t> seed = std::nullopt) {
  const fs::path dir = scratch(name);
  std::ostringstream err;
  const int code = run_command(command, cfg, CommandOptions{dir, seed}, err);
  json report;
  if (fs::exists(dir / "report.json")) {
    std::ifstream in(dir / "report.json");
    report = json::parse(in);
  }
  return {code, report, err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double eval(const std::string& text, std::vector<std::string> vars = {}, Eigen::VectorXd x = Eigen::VectorXd()) {
  return Expression::parse(text, std::move(vars)).value(x);
}

}  // namespace

TEST_CASE("expression grammar") {
  CHECK(eval("2 + 3 * 4") == 14.0);
  CHECK(eval("(2 + 3) * 4") == 20.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("8 / 2 / 2") == 2.0);
  CHECK(eval("1.5e1 - 5") == 10.0);
  CHECK(eval("cos(pi)") == doctest::Approx(-1.0));
  CHECK(eval("atan2(1, 1)") == doctest::Approx(std::atan(1.0)));
  CHECK(eval("sqrt(2) * sqrt(2)") == doctest::Approx(2.0));
  Eigen::VectorXd x(2);
  x << 0.5, -2.0;
  CHECK(eval("0.5*(q^2 + p^2)", {"q", "p"}, x) == doctest::Approx(2.125));
  CHECK(eval("exp(log(3)) + tan(0)", {}, Eigen::VectorXd()) == doctest::Approx(3.0));
}

TEST_CASE("expression parse errors carry a position") {
  for (const char* bad : {"1 +", "foo(1)", "x y", "sin 1", "(1 + 2", "2 * * 3", "atan2(1)", "z"}) {
    INFO(bad);
    CHECK_THROWS_AS(Expression::parse(bad, {"x", "y"}), ParseError);
  }
  try {
    Expression::parse("x + $", {"x"});
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("property: expression gradients match central differences") {
  const std::vector<std::string> vars{"a", "b", "c"};
  for (const char* text : {"a*b + sin(c)", "cos(a*b)^2 - b/c", "atan2(b, a) + exp(-a^2) * sqrt(c)",
                           "0.5*(a^2 + b^2) + 0.3*a*b*c - log(c)"}) {
    const auto e = Expression::parse(text, vars);
    Eigen::VectorXd x(3);
    x << 0.7, -0.4, 1.3;
    const Eigen::VectorXd g = e.gradient(x);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      INFO(text);
      CHECK(g[i] == doctest::Approx((e.value(xp) - e.value(xm)) / 2e-6).epsilon(1e-7));
    }
  }
}

TEST_CASE("inline system agrees with the catalog oscillator") {
  const json cfg = json::parse(R"J({
    "variables": ["q1", "p1", "q2", "p2"],
    "omega": [["q1", "p1", 1], ["q2", "p2", 1]],
    "hamiltonian": "0.5*(q1^2 + p1^2) + 0.5*sqrt(2)*(q2^2 + p2^2)",
    "level": 1,
    "section": {"theta": "atan2(-p2, q2)", "free": ["q1", "p1"], "dependent": ["q2", "p2"],
                "reference": [0, 0, 1.189207115002721, 0]}
  })J");
  const CatalogSystem inl = resolve_system(cfg);
  const CatalogSystem cat = catalog_system("oscillator2");
  SampleRng rng(1);
  for (const Point& p : ambient_samples(cat, rng, 10)) {
    CHECK((hamiltonian_field(inl.system, p) - hamiltonian_field(cat.system, p)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(inl.system.hamiltonian(p) == doctest::Approx(cat.system.hamiltonian(p)));
  }
  const Point u{0.3, 0.1};
  CHECK((inl.section->chart->embed(u).coords - cat.section->chart->embed(u).coords).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("malformed configs raise ConfigError") {
  CHECK_THROWS_AS(resolve_system(json::parse(R"({"variables": ["x","y","z"], "omega": [], "hamiltonian": "x"})")),
                  ConfigError);
  CHECK_THROWS_AS(resolve_system(json::parse(R"({"variables": ["x","y"], "omega": [[0,0,1]], "hamiltonian": "x"})")),
                  ConfigError);
  CHECK_THROWS_AS(resolve_system(json::parse(R"({"variables": ["x","y"], "omega": [[0,1,1]], "hamiltonian": "x +"})")),
                  ConfigError);
  CHECK_THROWS_AS(resolve_system(json("no_such_system")), ConfigError);
  CHECK_THROWS_AS(resolve_seed(json::parse(R"({"cosym_seed": "T9"})")), ConfigError);
  CHECK_THROWS_AS(get_count(json::parse(R"({"samples": 0})"), "samples", 1), ConfigError);
  CHECK_THROWS_AS(get_tolerance(json::parse(R"({"tolerance": -1})"), "tolerance", 1), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("demo-product on the 3-torus seed") {
  const Run r = run("demo-product", json::parse(R"({"cosym_seed": "T3"})"), "demo_t3");
  CHECK(r.code == kExitPass);
  CHECK(r.report["pass"] == true);
  for (const auto& c : r.report["checks"]) CHECK(c["pass"] == true);
  CHECK(r.report["results"]["return_map_identity"]["max_distance"].get<double>() < 1e-8);
  CHECK(r.report["results"]["globality"]["passed"] == 1000);

  // every requested check appears exactly once
  std::map<std::string, int> seen;
  for (const auto& c : r.report["checks"]) ++seen[c["name"].get<std::string>()];
  for (const auto& [name, count] : seen) CHECK(count == 1);

  const fs::path dir = fs::temp_directory_path() / "cosymlab_cli_tests" / "demo_t3";
  const std::string csv = slurp(dir / "crossings.csv");
  CHECK(csv.rfind("orbit_id,t,coord_0,coord_1,margin\n", 0) == 0);
  const std::string svg = slurp(dir / "plot.svg");
  CHECK(svg.find("width=\"800\" height=\"800\"") != std::string::npos);
  CHECK(r.report["artifacts"].size() == 3);
}

TEST_CASE("demo-product on the 5-torus seed runs in dimension 6") {
  const Run r = run("demo-product", json::parse(R"({"cosym_seed": "T5", "samples": 200})"), "demo_t5");
  CHECK(r.code == kExitPass);
  CHECK(r.report["results"]["system"]["dimension"] == 6);
}

TEST_CASE("exit codes") {
  CHECK(run("demo-product", json::parse(R"({"cosym_seed": "T7"})"), "bad_seed").code == kExitUsage);
  CHECK(run("demo-product", json::parse(R"({})"), "no_seed").code == kExitUsage);
  CHECK(run("demo-product", json::parse(R"({"cosym_seed": "T3", "tolerance": 0})"), "bad_tol").code == kExitUsage);
  CHECK(run("no-such-command", json::object(), "bad_command").code == kExitUsage);
  CHECK(run("demo-product", json::parse(R"({"cosym_seed": "T3", "seed": -1})"), "neg_seed").code == kExitUsage);
  CHECK(run("demo-product", json::parse(R"({"cosym_seed": "T3", "seed": 1.5})"), "frac_seed").code == kExitUsage);
  CHECK(run("demo-product", json::parse(R"({"cosym_seed": "T5_degenerate"})"), "degenerate").code == kExitFail);
  CHECK(run("verify-cosym", json::parse(R"({"cosym_seed": "T5_degenerate"})"), "verify_bad").code == kExitFail);
  CHECK(run("verify-cosym", json::parse(R"({"cosym_seed": "T3"})"), "verify_ok").code == kExitPass);
  CHECK(run("obstruct", json::object(), "obstruct_empty").code == kExitUsage);
  CHECK(run("obstruct", json::parse(R"({"betti": {"betti": [1, 0, 1]}})"), "obstruct_malformed").code == kExitUsage);
  CHECK(run("return-map", json::parse(R"({"system": "pendulum"})"), "no_section").code == kExitUsage);
  CHECK(run("tischler", json::parse(R"({"periods": [1, "x"]})"), "bad_periods").code == kExitUsage);
}

TEST_CASE("obstruct reports the failing Betti degree") {
  const Run s3 = run("obstruct", json::parse(R"({"betti": "S3"})"), "obstruct_s3");
  CHECK(s3.code == kExitFail);
  CHECK(s3.report["results"]["betti"]["failing_degree"] == 1);
  const Run t3 = run("obstruct", json::parse(R"({"betti": "T3", "system": "cotangent_r4", "ambient": "S2xS2"})"),
                     "obstruct_t3");
  CHECK(t3.code == kExitPass);
  CHECK(t3.report["results"]["exactness_verdict"]["verdict"] == "negative");
  CHECK(t3.report["results"]["simply_connected_verdict"]["verdict"] == "negative");
}

TEST_CASE("tischler with rational periods is exact") {
  const Run r = run("tischler", json::parse(R"({"periods": [0.5, 0.25, 0.0]})"), "tischler_rational");
  CHECK(r.code == kExitPass);
  CHECK(r.report["results"]["epsilon_achieved"] == 0.0);
  CHECK(r.report["results"]["d"] == 4);
  const Run s = run("tischler", json::parse(R"({"cosym_seed": "T3_irrational", "eps": 1e-4})"), "tischler_seed");
  CHECK(s.code == kExitPass);
  CHECK(s.report["results"]["d"] == 70);
}

TEST_CASE("return map of the incommensurate oscillator stays on invariant circles") {
  const Run r = run("return-map", json::parse(R"({"system": "oscillator2", "orbits": 3, "iterates": 40})"), "rm");
  CHECK(r.code == kExitPass);
  CHECK(r.report["results"]["symplecticity"]["max_det_error"].get<double>() < 1e-6);

  std::ifstream in(fs::temp_directory_path() / "cosymlab_cli_tests" / "rm" / "crossings.csv");
  std::string line;
  std::getline(in, line);
  std::map<int, std::pair<double, double>> radius;  // min, max of q1^2 + p1^2 per orbit
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 5);
    const double r2 = v[2] * v[2] + v[3] * v[3];
    auto [it, fresh] = radius.try_emplace(static_cast<int>(v[0]), r2, r2);
    it->second.first = std::min(it->second.first, r2);
    it->second.second = std::max(it->second.second, r2);
    ++rows;
  }
  CHECK(rows == 120);
  for (const auto& [orbit, mm] : radius) CHECK(mm.second - mm.first < 1e-8);
}

TEST_CASE("identical config and seed give identical reports") {
  const json cfg = json::parse(R"({"cosym_seed": "T3_tilted", "samples": 100, "seed": 5})");
  const Run a = run("demo-product", cfg, "det_a");
  const Run b = run("demo-product", cfg, "det_b");
  CHECK(a.code == kExitPass);
  CHECK(strip_timing(a.report).dump() == strip_timing(b.report).dump());
  CHECK(a.report.contains("timing"));
  CHECK_FALSE(strip_timing(a.report).contains("timing"));
  const auto base = fs::temp_directory_path() / "cosymlab_cli_tests";
  CHECK(slurp(base / "det_a" / "crossings.csv") == slurp(base / "det_b" / "crossings.csv"));
  CHECK(slurp(base / "det_a" / "plot.svg") == slurp(base / "det_b" / "plot.svg"));

  const Run c = run("demo-product", cfg, "det_c", 6);
  CHECK(c.report["seed"] == 6);
  CHECK(strip_timing(c.report).dump() != strip_timing(a.report).dump());
}
