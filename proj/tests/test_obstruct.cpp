#include <cmath>
#include <vector>

#include "cosymlab/catalog.hpp"
#include "cosymlab/cosym.hpp"
#include "cosymlab/error.hpp"
#include "cosymlab/obstruct.hpp"
#include "cosymlab/section.hpp"
#include "doctest.h"

using namespace cosymlab;

namespace {

// (q1, p1) circle of radius a times (q2, p2) circle of radius b.
MeshedSurface split_torus(double a, double b) {
  MeshedSurface s;
  s.name = "split torus";
  s.ambient_dim = 4;
  s.map = [a, b](double u, double v) { return Point{a * std::cos(u), a * std::sin(u), b * std::cos(v), b * std::sin(v)}; };
  s.jacobian = [a, b](double u, double v) {
    Matrix j = Matrix::Zero(4, 2);
    j(0, 0) = -a * std::sin(u);
    j(1, 0) = a * std::cos(u);
    j(2, 1) = -b * std::sin(v);
    j(3, 1) = b * std::cos(v);
    return j;
  };
  return s;
}

// x dy^dz + y dz^dx + z dx^dy; its flux through the unit sphere is 4 pi.
KForm position_flux() {
  return KForm(3, 2, [](const Point& p) {
    Vector c(3);
    c << p[2], -p[1], p[0];
    return c;
  });
}

Verdict exactness(const HamiltonianSystem& sys) {
  SampleRng rng(1);
  const auto pts = sample_box(sys.manifold, rng, 16, std::vector<double>(sys.manifold.dim, -1.0),
                              std::vector<double>(sys.manifold.dim, 1.0));
  return exactness_verdict(sys, pts);
}

}  // namespace

TEST_CASE("Stokes check on the exact cotangent model") {
  const auto sys = cotangent_r4();
  for (const MeshedSurface& s :
       {revolution_torus(4, {0, 1, 2}, 2.0, 0.5), round_sphere(4, {0, 1, 2}, 1.0), split_torus(1.0, 0.7)}) {
    const StokesResult r = stokes_exactness_check(sys, s);
    INFO(s.name);
    CHECK(r.nodes_per_axis == 256);
    CHECK(std::abs(r.integral) < 1e-8);
    CHECK(r.primitive_residual < 1e-6);
  }
}

TEST_CASE("coordinate torus of the standard 4-torus has area (2 pi)^2") {
  const auto sys = build_product_system(cosym_seed("T3").structure);
  const MeshedSurface s = coordinate_torus(sys.manifold, 0, 1, Point{0.0, 0.0, 0.3, 0.0});
  CHECK(std::abs(surface_integral(sys.omega, s, 256) - kTwoPi * kTwoPi) < 1e-8);
  CHECK(std::abs(surface_integral(sys.omega, coordinate_torus(sys.manifold, 2, 3, Point{0, 0, 0, 0}), 64) -
                 kTwoPi * kTwoPi) < 1e-8);
  try {
    stokes_exactness_check(sys, s);
    FAIL("expected missing primitive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingPrimitive);
  }
}

TEST_CASE("open surfaces are refused") {
  MeshedSurface s = revolution_torus(4, {0, 1, 2}, 2.0, 0.5);
  s.closed = false;
  try {
    stokes_exactness_check(cotangent_r4(), s);
    FAIL("expected open surface");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOpenSurface);
  }
}

TEST_CASE("property: midpoint quadrature converges at second order") {
  const KForm flux = position_flux();
  const MeshedSurface sphere = round_sphere(3, {0, 1, 2}, 1.0);
  const double reference = 2.0 * kTwoPi;
  double previous = std::abs(std::abs(surface_integral(flux, sphere, 8)) - reference);
  for (int n : {16, 32, 64}) {
    const double err = std::abs(std::abs(surface_integral(flux, sphere, n)) - reference);
    INFO(n);
    CHECK(previous / err >= 4.0);
    previous = err;
  }
}

TEST_CASE("exactness verdicts") {
  const Verdict cot = exactness(cotangent_r4());
  CHECK(cot.kind == VerdictKind::kNegative);
  CHECK_FALSE(cot.rule.empty());

  const Verdict torus = exactness(build_product_system(cosym_seed("T3").structure));
  CHECK(torus.kind == VerdictKind::kInconclusive);

  HamiltonianSystem wrong = cotangent_r4();
  wrong.primitive = KForm::basis(4, {0});
  try {
    exactness(wrong);
    FAIL("expected data error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDataError);
  }
}

TEST_CASE("Betti number condition") {
  const BettiResult s3 = betti_necessary_condition(*find_betti("S3"));
  CHECK_FALSE(s3.pass);
  REQUIRE(s3.failing_degree.has_value());
  CHECK(*s3.failing_degree == 1);
  CHECK(betti_necessary_condition(*find_betti("T3")).pass);
  const BettiResult s2s1 = betti_necessary_condition(*find_betti("S2xS1"));
  CHECK(s2s1.pass);
  CHECK_FALSE(s2s1.note.empty());

  for (const std::vector<int>& bad : {std::vector<int>{}, std::vector<int>{1, 0, 1}, std::vector<int>{0, 1, 1, 0},
                                      std::vector<int>{1, -1, -1, 1}, std::vector<int>{1, 2, 1, 1}}) {
    try {
      betti_necessary_condition({"bad", bad});
      FAIL("expected malformed profile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedProfile);
    }
  }
}

TEST_CASE("property: cosymplectic seed manifolds pass the Betti condition") {
  for (const auto& name : cosym_seed_names()) {
    const CosymSeed seed = cosym_seed(name);
    if (!seed.expected_valid) continue;
    const std::string torus = "T" + std::to_string(seed.structure.manifold.dim);
    const auto bp = find_betti(torus);
    REQUIRE(bp.has_value());
    CHECK(betti_necessary_condition(*bp).pass);
  }
}

TEST_CASE("property: catalog profiles are well formed and match Kunneth products") {
  auto product = [](const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  const std::vector<int> s1{1, 1}, s2{1, 0, 1}, s3{1, 0, 0, 1};
  for (const BettiProfile& bp : betti_catalog()) {
    INFO(bp.name);
    CHECK_NOTHROW(betti_necessary_condition(bp));
  }
  CHECK(find_betti("T3")->betti == product(product(s1, s1), s1));
  CHECK(find_betti("S2xS1")->betti == product(s2, s1));
  CHECK(find_betti("T5")->betti == product(find_betti("T3")->betti, product(s1, s1)));
  CHECK(find_betti("S3xS2")->betti == product(s3, s2));
  CHECK(find_betti("T2xS3")->betti == product(product(s1, s1), s3));
}

TEST_CASE("simply connected verdicts") {
  auto verdict_for = [](const char* name) {
    const auto entry = find_ambient(name);
    REQUIRE(entry.has_value());
    return simply_connected_verdict(entry->flags.compact, entry->flags.simply_connected);
  };
  CHECK(verdict_for("S2xS2").kind == VerdictKind::kNegative);
  CHECK(verdict_for("CP2").kind == VerdictKind::kNegative);
  CHECK(verdict_for("T4").kind == VerdictKind::kInconclusive);
  CHECK(verdict_for("R4").kind == VerdictKind::kInconclusive);
  CHECK(simply_connected_verdict(true, true, false).kind == VerdictKind::kRefused);
  CHECK(to_string(VerdictKind::kNegative) == "negative");
}

TEST_CASE("property: no global section on a system with a verified primitive") {
  for (const auto& name : catalog_system_names()) {
    const auto e = catalog_system(name);
    if (!e.system.primitive) continue;
    INFO(name);
    CHECK(exactness(e.system).kind == VerdictKind::kNegative);
    CHECK_FALSE(e.section_global);
    if (!e.section) continue;
    // A point of the energy surface whose orbit stays in the first plane.
    Vector p = Vector::Zero(e.system.manifold.dim);
    p[0] = std::sqrt(2.0 * e.level);
    const Point pts[] = {Point(p)};
    CHECK_FALSE(verify_global(e.system, *e.section, pts, 100.0).pass());
  }
}
