#include <cmath>
#include <vector>

#include "cosymlab/catalog.hpp"
#include "cosymlab/error.hpp"
#include "cosymlab/forms.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cosymlab;
using testsupport::random_point;
using testsupport::random_vector;

namespace {

Vector unit(int n, int i) {
  Vector v = Vector::Zero(n);
  v[i] = 1.0;
  return v;
}

double eval(const KForm& f, const Point& p, std::vector<Vector> vs) {
  std::vector<TangentVector> tv;
  for (auto& v : vs) tv.push_back({p, std::move(v)});
  return evaluate(f, tv);
}

// A 1-form with trigonometric coefficients and no analytic derivative.
KForm wiggly_one_form(int n, double phase) {
  return KForm(n, 1, [n, phase](const Point& p) {
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = std::sin(p[i] + phase * (i + 1)) * std::cos(p[(i + 1) % n]);
    return c;
  });
}

KForm wiggly_two_form(int n) {
  return KForm(n, 2, [n](const Point& p) {
    const auto size = static_cast<Eigen::Index>(binomial(n, 2));
    Vector c(size);
    for (Eigen::Index r = 0; r < size; ++r) c[r] = std::cos(p[static_cast<int>(r) % n] * (r + 1)) + 0.1 * r;
    return c;
  });
}

}  // namespace

TEST_CASE("evaluate on coordinate frames") {
  const Point p = random_point(4);
  const KForm dxdy = KForm::basis(4, {0, 1});
  CHECK(eval(dxdy, p, {unit(4, 0), unit(4, 1)}) == 1.0);
  CHECK(eval(dxdy, p, {unit(4, 0), unit(4, 0)}) == 0.0);
  const KForm split = KForm::basis(4, {0, 1}) + KForm::basis(4, {2, 3});
  CHECK(eval(split, p, {unit(4, 2), unit(4, 3)}) == 1.0);
}

TEST_CASE("evaluate rejects wrong arity and mixed base points") {
  const KForm dxdy = KForm::basis(3, {0, 1});
  const Point p{0.0, 0.0, 0.0};
  try {
    eval(dxdy, p, {unit(3, 0)});
    FAIL("expected arity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kArityMismatch);
  }
  std::vector<TangentVector> tv{{p, unit(3, 0)}, {Point{1.0, 0.0, 0.0}, unit(3, 1)}};
  CHECK_THROWS_AS(evaluate(dxdy, tv), Error);
}

TEST_CASE("wedge of basis forms") {
  const KForm dx = KForm::basis(4, {0}), dy = KForm::basis(4, {1});
  const KForm dz = KForm::basis(4, {2}), dt = KForm::basis(4, {3});
  const Point p = random_point(4);

  const Vector c = wedge(dx, dy).coefficients(p);
  CHECK(c[0] == 1.0);
  CHECK(c.cwiseAbs().sum() == 1.0);
  CHECK(wedge(dx, dx).coefficients(p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(wedge(dy, dx).coefficients(p)[0] == -1.0);

  const KForm four = wedge(wedge(dx, dy), wedge(dz, dt));
  CHECK(eval(four, p, {unit(4, 0), unit(4, 1), unit(4, 2), unit(4, 3)}) == 1.0);

  try {
    wedge(four, dx);
    FAIL("expected degree overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegreeOverflow);
  }
}

TEST_CASE("interior products by hand expansion") {
  const Point p = random_point(4);
  VectorField dx_field = [](const Point&) { return unit(4, 0); };
  const Vector c = interior(dx_field, KForm::basis(4, {0, 1})).coefficients(p);
  CHECK(testsupport::max_abs_diff(c, unit(4, 1)) == 0.0);

  VectorField dq = [](const Point&) { return unit(2, 0); };
  CHECK(testsupport::max_abs_diff(interior(dq, KForm::basis(2, {0, 1})).coefficients(Point{0.3, 0.4}), unit(2, 1)) ==
        0.0);

  VectorField minus_dtheta = [](const Point&) { return Vector(-unit(4, 3)); };
  const KForm split = KForm::basis(4, {0, 1}) + KForm::basis(4, {2, 3});
  CHECK(testsupport::max_abs_diff(interior(minus_dtheta, split).coefficients(p), unit(4, 2)) == 0.0);
}

TEST_CASE("exterior derivative examples") {
  SUBCASE("d sin(theta) = cos(theta) d theta, both paths") {
    auto f = [](const Point& p) { return std::sin(p[0]); };
    const KForm numeric = KForm::scalar(1, f);
    const KForm analytic = KForm::scalar(1, f, [](const Point& p) {
      Vector g(1);
      g[0] = std::cos(p[0]);
      return g;
    });
    for (double th : {0.0, 0.4, 1.7, -2.9}) {
      const Point p{th};
      CHECK(exterior_derivative(numeric).coefficients(p)[0] == doctest::Approx(std::cos(th)).epsilon(1e-9));
      CHECK(exterior_derivative(analytic).coefficients(p)[0] == std::cos(th));
    }
  }
  SUBCASE("constant 1-form is closed") {
    const KForm dx = KForm::basis(3, {0});
    CHECK(exterior_derivative(dx).coefficients(random_point(3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("d(p dq) = dp ^ dq") {
    // coordinates (q, p)
    const KForm p_dq = KForm::one_form(
        2, [](const Point& x) { return Vector((Vector(2) << x[1], 0.0).finished()); },
        [](const Point&) { return Matrix((Matrix(2, 2) << 0.0, 1.0, 0.0, 0.0).finished()); });
    const Vector expected = wedge(KForm::basis(2, {1}), KForm::basis(2, {0})).coefficients(Point{0.0, 0.0});
    CHECK(expected[0] == -1.0);
    CHECK(exterior_derivative(p_dq).coefficients(Point{0.2, -0.7})[0] == expected[0]);
  }
  SUBCASE("top degree has no derivative") {
    CHECK_THROWS_AS(exterior_derivative(KForm::basis(2, {0, 1})), Error);
  }
}

TEST_CASE("pullback examples") {
  SUBCASE("projection (x, theta) -> theta") {
    const ChartMap proj{2, 1, [](const Point& p) { return Point{p[1]}; },
                        [](const Point&) { return Matrix((Matrix(1, 2) << 0.0, 1.0).finished()); }};
    const Vector c = pullback(proj, KForm::basis(1, {0})).coefficients(Point{0.3, 2.0});
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 1.0);
  }
  SUBCASE("identity") {
    const ChartMap id{3, 3, [](const Point& p) { return p; }, [](const Point&) { return Matrix(Matrix::Identity(3, 3)); }};
    const KForm f = KForm::basis(3, {0, 1});
    const Point p = random_point(3);
    CHECK(testsupport::max_abs_diff(pullback(id, f).coefficients(p), f.coefficients(p)) == 0.0);
  }
  SUBCASE("degree-2 circle map z -> 2z") {
    const ChartMap doubling{1, 1, [](const Point& p) { return Point{2.0 * p[0]}; },
                            [](const Point&) { return Matrix(Matrix::Constant(1, 1, 2.0)); }};
    CHECK(pullback(doubling, KForm::basis(1, {0})).coefficients(Point{1.1})[0] == 2.0);
  }
}

TEST_CASE("exterior powers") {
  const KForm omega = KForm::basis(4, {0, 1}) + KForm::basis(4, {2, 3});
  const Point p = random_point(4);
  CHECK(eval(power(omega, 2), p, {unit(4, 0), unit(4, 1), unit(4, 2), unit(4, 3)}) == 2.0);
  const KForm zeroth = power(omega, 0);
  CHECK(zeroth.degree() == 0);
  CHECK(zeroth.coefficients(p)[0] == 1.0);
  CHECK(power(KForm::basis(4, {0, 1}), 2).coefficients(p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evaluate matches the Leibniz-determinant oracle") {
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= n; ++k) {
      const Vector coeffs = random_vector(static_cast<int>(binomial(n, k)));
      const KForm f = KForm::constant(n, k, coeffs);
      const Point p = random_point(n);
      Matrix frame(n, k);
      std::vector<Vector> vs;
      for (int j = 0; j < k; ++j) {
        vs.push_back(random_vector(n));
        frame.col(j) = vs.back();
      }
      const double oracle = testsupport::evaluate_oracle(n, k, coeffs, frame);
      CHECK(eval(f, p, vs) == doctest::Approx(oracle).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("property: swapping two arguments flips the sign exactly") {
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 4;
    const int k = 2 + trial % (n - 1);
    const KForm f = KForm::constant(n, k, random_vector(static_cast<int>(binomial(n, k))));
    const Point p = random_point(n);
    std::vector<Vector> vs;
    for (int j = 0; j < k; ++j) vs.push_back(random_vector(n));
    const int a = trial % k, b = (trial / 2 + 1 + a) % k;
    if (a == b) continue;
    std::vector<Vector> swapped = vs;
    std::swap(swapped[static_cast<std::size_t>(a)], swapped[static_cast<std::size_t>(b)]);
    CHECK(eval(f, p, swapped) == -eval(f, p, vs));
  }
}

TEST_CASE("property: multilinearity in each slot") {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4, k = 1 + trial % 4;
    const KForm f = KForm::constant(n, k, random_vector(static_cast<int>(binomial(n, k))));
    const Point p = random_point(n);
    std::vector<Vector> vs;
    for (int j = 0; j < k; ++j) vs.push_back(random_vector(n));
    const Vector u = random_vector(n), v = random_vector(n);
    const double a = testsupport::uniform(-2, 2), b = testsupport::uniform(-2, 2);
    const int slot = trial % k;
    auto with = [&](const Vector& w) {
      auto copy = vs;
      copy[static_cast<std::size_t>(slot)] = w;
      return eval(f, p, copy);
    };
    const double lhs = with(a * u + b * v);
    const double rhs = a * with(u) + b * with(v);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("property: d o d = 0") {
  SUBCASE("analytic path on catalog forms is exactly zero") {
    for (const auto& name : catalog_system_names()) {
      const auto e = catalog_system(name);
      const int n = e.system.manifold.dim;
      std::vector<KForm> forms;
      if (e.system.primitive) forms.push_back(*e.system.primitive);
      if (e.system.omega.degree() < n) forms.push_back(e.system.omega);
      for (const auto& f : forms) {
        if (!f.has_analytic_derivative() || f.degree() + 2 > n) continue;
        const KForm dd = exterior_derivative(exterior_derivative(f));
        for (int s = 0; s < 10; ++s) CHECK(dd.coefficients(random_point(n)).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
  SUBCASE("finite-difference path stays below 1e-6") {
    for (int n = 3; n <= 5; ++n) {
      const KForm dd1 = exterior_derivative(exterior_derivative(wiggly_one_form(n, 0.3)));
      for (int s = 0; s < 20; ++s) CHECK(dd1.coefficients(random_point(n, -3, 3)).cwiseAbs().maxCoeff() < 1e-6);
      if (n < 4) continue;
      const KForm dd2 = exterior_derivative(exterior_derivative(wiggly_two_form(n)));
      for (int s = 0; s < 20; ++s) CHECK(dd2.coefficients(random_point(n, -3, 3)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("property: Leibniz rule d(a^b) = da^b + (-1)^k a^db") {
  for (int n = 3; n <= 5; ++n) {
    const KForm a = wiggly_one_form(n, 0.7), b = wiggly_one_form(n, -1.1);
    const KForm lhs = exterior_derivative(wedge(a, b));
    const KForm rhs = wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b));
    if (n >= 4) {
      const KForm c = wiggly_two_form(n);
      const KForm lhs2 = exterior_derivative(wedge(a, c));
      const KForm rhs2 = wedge(exterior_derivative(a), c) - wedge(a, exterior_derivative(c));
      for (int s = 0; s < 10; ++s) {
        const Point p = random_point(n, -2, 2);
        CHECK(testsupport::max_abs_diff(lhs2.coefficients(p), rhs2.coefficients(p)) < 1e-6);
      }
    }
    for (int s = 0; s < 10; ++s) {
      const Point p = random_point(n, -2, 2);
      CHECK(testsupport::max_abs_diff(lhs.coefficients(p), rhs.coefficients(p)) < 1e-6);
    }
  }
}

TEST_CASE("analytic and finite-difference derivatives agree") {
  const auto sys = pendulum();
  const KForm numeric(2, 0, [&sys](const Point& p) { return Vector::Constant(1, sys.hamiltonian(p)); });
  const KForm analytic = KForm::scalar(2, sys.hamiltonian.value, sys.hamiltonian.gradient);
  for (int s = 0; s < 20; ++s) {
    const Point p = random_point(2, -3, 3);
    CHECK(testsupport::max_abs_diff(exterior_derivative(numeric).coefficients(p),
                                    exterior_derivative(analytic).coefficients(p)) < 1e-8);
  }
}
