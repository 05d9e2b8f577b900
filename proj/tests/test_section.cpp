#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cosymlab/catalog.hpp"
#include "cosymlab/error.hpp"
#include "cosymlab/section.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cosymlab;

namespace {

CatalogSystem rotation_suspension(double rho) {
  CatalogSystem e = catalog_system("suspension");
  e.system = suspension(rho);
  e.section = suspension_section(e.system, e.level);
  return e;
}

SectionSpec angle_section(int coordinate, int dim) {
  SectionSpec sec;
  sec.theta.value = [coordinate](const Point& p) { return p[coordinate]; };
  sec.theta.gradient = [coordinate, dim](const Point&) {
    Vector g = Vector::Zero(dim);
    g[coordinate] = 1.0;
    return g;
  };
  return sec;
}

}  // namespace

TEST_CASE("first return on the product leaf is the identity after 2 pi") {
  const auto e = catalog_system("product_T3");
  SampleRng rng(1);
  for (const Point& p : section_samples(e, rng, 20)) {
    const ReturnRecord r = first_return(e.system, *e.section, p);
    CHECK(std::abs(r.return_time - kTwoPi) < 1e-9);
    CHECK(e.system.manifold.distance(r.image, p) < 1e-9);
    CHECK(r.transversality_margin == doctest::Approx(1.0));
  }
}

TEST_CASE("suspension of a rotation returns after unit time, shifted by rho") {
  const auto e = catalog_system("suspension");
  const double rho = (std::sqrt(5.0) - 1.0) / 2.0;
  SampleRng rng(2);
  for (const Point& p : section_samples(e, rng, 20)) {
    const ReturnRecord r = first_return(e.system, *e.section, p);
    CHECK(std::abs(r.return_time - 1.0) < 1e-9);
    const double shift = std::fmod(r.image[0] - p[0] + 2.0, 1.0);
    CHECK(std::abs(shift - rho) < 1e-9);
  }
}

TEST_CASE("oscillator return time matches the closed form 2 pi / ratio") {
  for (double ratio : {kSqrt2, 0.5, 1.7, 3.0}) {
    const auto sys = linear_oscillator(ratio);
    const auto sec = oscillator_section(sys, 1.0);
    // energy split between the two planes; the second plane carries the section angle
    const double h2 = 0.6;
    const Point p{std::sqrt(2.0 * 0.4), 0.0, std::sqrt(2.0 * h2 / ratio), 0.0};
    const ReturnRecord r = first_return(sys, sec, p);
    INFO(ratio);
    CHECK(std::abs(r.return_time - kTwoPi / ratio) < 1e-9);
    const double q1 = p[0] * std::cos(r.return_time), p1 = -p[0] * std::sin(r.return_time);
    CHECK(std::abs(r.image[0] - q1) < 1e-8);
    CHECK(std::abs(r.image[1] - p1) < 1e-8);
  }
}

TEST_CASE("start point must lie on the section") {
  const auto e = catalog_system("product_T3");
  try {
    first_return(e.system, *e.section, Point{0.1, 0.2, 0.5, 0.0});
    FAIL("expected not-on-section");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kNotOnSection);
  }
}

TEST_CASE("tangent section is refused") {
  // Flow along z; section function x never changes.
  const auto e = catalog_system("product_T3");
  const SectionSpec sec = angle_section(0, 4);
  try {
    first_return(e.system, sec, Point{0.0, 0.2, 0.5, 0.0});
    FAIL("expected tangency");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kTangency);
  }
}

TEST_CASE("return map Jacobians") {
  SUBCASE("translation suspension gives the identity") {
    const auto e = catalog_system("suspension");
    SampleRng rng(3);
    for (const Point& p : section_samples(e, rng, 5)) {
      const Matrix j = return_map_jacobian(e.system, *e.section, p);
      CHECK((j - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  SUBCASE("product leaf gives the identity") {
    const auto e = catalog_system("product_T5");
    SampleRng rng(4);
    for (const Point& p : section_samples(e, rng, 5)) {
      const Matrix j = return_map_jacobian(e.system, *e.section, p);
      CHECK((j - Matrix::Identity(j.rows(), j.cols())).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  SUBCASE("finite-difference step below the noise floor is refused") {
    const auto e = catalog_system("suspension");
    SampleRng rng(5);
    const Point p = section_samples(e, rng, 1).front();
    try {
      return_map_jacobian(e.system, *e.section, p, 1e-10, 1e-12);
      FAIL("expected noise floor");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::kNoiseFloor);
    }
  }
}

TEST_CASE("property: return maps of 2-dimensional sections preserve area") {
  for (const char* name : {"oscillator2", "suspension", "product_T3"}) {
    const auto e = catalog_system(name);
    SampleRng rng(6);
    double worst = 0.0;
    for (const Point& p : section_samples(e, rng, 100))
      worst = std::max(worst, std::abs(return_map_symplecticity(e.system, *e.section, p).det - 1.0));
    INFO(name);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("property: higher-dimensional return maps preserve the restricted form") {
  const auto e = catalog_system("product_T5");
  SampleRng rng(7);
  for (const Point& p : section_samples(e, rng, 20))
    CHECK(return_map_symplecticity(e.system, *e.section, p).form_residual < 1e-5);
}

TEST_CASE("verify_global") {
  SUBCASE("product leaf passes on 1000 samples") {
    const auto e = catalog_system("product_T3");
    SampleRng rng(8);
    auto pts = ambient_samples(e, rng, 1000);
    for (auto& p : pts) p.coords[3] = 0.0;
    const GlobalityReport g = verify_global(e.system, *e.section, pts);
    CHECK(g.pass());
    CHECK(g.passed == 1000);
    CHECK(std::abs(g.max_return_time - kTwoPi) < 1e-6);
  }
  SUBCASE("section the flow never reaches is reported") {
    // Flow along z; the section x = pi is never crossed from x = 1.
    const auto e = catalog_system("product_T3");
    SectionSpec sec = angle_section(0, 4);
    sec.level = kPi;
    const Point pts[] = {Point{1.0, 0.2, 0.3, 0.0}};
    const GlobalityReport g = verify_global(e.system, sec, pts, 50.0);
    CHECK_FALSE(g.pass());
    CHECK(g.failures.size() == 1);
  }
  SUBCASE("empty sample set passes vacuously with a warning") {
    const auto e = catalog_system("product_T3");
    const GlobalityReport g = verify_global(e.system, *e.section, std::span<const Point>{});
    CHECK(g.pass());
    CHECK_FALSE(g.warning.empty());
  }
}

TEST_CASE("no global section on a system with an exact form") {
  // Orbits in the first plane alone never see the second-plane angle.
  const auto e = catalog_system("oscillator2");
  const Point pts[] = {Point{std::sqrt(2.0), 0.0, 0.0, 0.0}};
  CHECK_FALSE(verify_global(e.system, *e.section, pts, 100.0).pass());
}

TEST_CASE("mapping torus chart") {
  SUBCASE("product leaf glues to the identity") {
    const auto e = catalog_system("product_T3");
    SampleRng rng(9);
    const auto grid = section_samples(e, rng, 16);
    const MappingTorusChart mt = mapping_torus_chart(e.system, *e.section, grid);
    CHECK(mt.gluing_residual < 1e-8);
    CHECK(mt.energy_ok);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(e.system.manifold.distance(mt.psi[i].front(), grid[i]) == 0.0);
  }
  SUBCASE("rational rotation cycles with period 3") {
    const auto e = rotation_suspension(1.0 / 3.0);
    SampleRng rng(10);
    for (const Point& p : section_samples(e, rng, 8)) {
      const auto recs = iterate_return_map(e.system, *e.section, p, 3);
      CHECK(e.system.manifold.distance(recs[0].image, p) > 0.1);
      CHECK(e.system.manifold.distance(recs[1].image, p) > 0.1);
      CHECK(e.system.manifold.distance(recs[2].image, p) < 1e-9);
    }
    const auto grid = section_samples(e, rng, 6);
    const MappingTorusChart mt = mapping_torus_chart(e.system, *e.section, grid);
    CHECK(mt.gluing_residual < 1e-8);
  }
}

TEST_CASE("property: energy pinning, transversality and return consistency") {
  for (const char* name : {"oscillator2", "suspension", "product_T3", "product_T5"}) {
    const auto e = catalog_system(name);
    SampleRng rng(11);
    const Point start = section_samples(e, rng, 1).front();
    const int k = 12;
    const auto seq = crossing_sequence(e.system, *e.section, start, k);
    const auto recs = iterate_return_map(e.system, *e.section, start, k);
    REQUIRE(static_cast<int>(seq.size()) == k);
    INFO(name);
    for (int i = 0; i < k; ++i) {
      const auto& c = seq[static_cast<std::size_t>(i)];
      CHECK(std::abs(e.system.hamiltonian(c.point) - e.level) < 1e-8);
      CHECK(std::abs(section_residual(*e.section, c.point)) < 1e-10);
      CHECK(c.rate > kTangencyThreshold);
      CHECK(e.system.manifold.distance(c.point, recs[static_cast<std::size_t>(i)].image) < (i + 1) * 1e-8);
    }
    for (const auto& r : recs) CHECK(r.transversality_margin > kTangencyThreshold);
  }
}

TEST_CASE("backward crossings are found") {
  const auto e = catalog_system("suspension");
  SampleRng rng(12);
  const Point p = section_samples(e, rng, 1).front();
  const Point off = flow(e.system, p, 0.3).end;
  const auto back = find_crossing(e.system, *e.section, off, -1);
  REQUIRE(back.has_value());
  CHECK(back->t == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(e.system.manifold.distance(back->point, p) < 1e-9);
  const auto fwd = find_crossing(e.system, *e.section, off, +1);
  REQUIRE(fwd.has_value());
  CHECK(fwd->t == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("crossings CSV layout") {
  std::vector<CrossingRow> rows{{0, 1.5, Vector((Vector(2) << 0.25, -1.0).finished()), 0.5},
                                {1, 2.0, Vector((Vector(2) << 0.0, 3.0).finished()), 1.0}};
  std::ostringstream out;
  write_crossings_csv(out, rows);
  std::istringstream in(out.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "orbit_id,t,coord_0,coord_1,margin");
  CHECK(first == "0,1.5,0.25,-1,0.5");
}
