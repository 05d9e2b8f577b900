#include "cosymlab/obstruct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cosymlab/error.hpp"

namespace cosymlab {

MeshedSurface revolution_torus(int ambient_dim, std::array<int, 3> axes, double major, double minor) {
  MeshedSurface s;
  s.name = "revolution torus";
  s.ambient_dim = ambient_dim;
  s.map = [=](double u, double v) {
    Vector x = Vector::Zero(ambient_dim);
    const double rho = major + minor * std::cos(u);
    x[axes[0]] = rho * std::cos(v);
    x[axes[1]] = rho * std::sin(v);
    x[axes[2]] = minor * std::sin(u);
    return Point(std::move(x));
  };
  s.jacobian = [=](double u, double v) {
    Matrix j = Matrix::Zero(ambient_dim, 2);
    const double rho = major + minor * std::cos(u);
    j(axes[0], 0) = -minor * std::sin(u) * std::cos(v);
    j(axes[1], 0) = -minor * std::sin(u) * std::sin(v);
    j(axes[2], 0) = minor * std::cos(u);
    j(axes[0], 1) = -rho * std::sin(v);
    j(axes[1], 1) = rho * std::cos(v);
    return j;
  };
  return s;
}

MeshedSurface round_sphere(int ambient_dim, std::array<int, 3> axes, double radius) {
  MeshedSurface s;
  s.name = "round sphere";
  s.ambient_dim = ambient_dim;
  s.u_period = kPi;  // polar angle; the parametrization closes up at the poles
  s.map = [=](double u, double v) {
    Vector x = Vector::Zero(ambient_dim);
    x[axes[0]] = radius * std::sin(u) * std::cos(v);
    x[axes[1]] = radius * std::sin(u) * std::sin(v);
    x[axes[2]] = radius * std::cos(u);
    return Point(std::move(x));
  };
  s.jacobian = [=](double u, double v) {
    Matrix j = Matrix::Zero(ambient_dim, 2);
    j(axes[0], 0) = radius * std::cos(u) * std::cos(v);
    j(axes[1], 0) = radius * std::cos(u) * std::sin(v);
    j(axes[2], 0) = -radius * std::sin(u);
    j(axes[0], 1) = -radius * std::sin(u) * std::sin(v);
    j(axes[1], 1) = radius * std::sin(u) * std::cos(v);
    return j;
  };
  return s;
}

MeshedSurface coordinate_torus(const ChartManifold& m, int i, int j, const Point& base) {
  if (i < 0 || j < 0 || i >= m.dim || j >= m.dim || i == j)
    throw Error(ErrorCode::kInvalidArgument, "coordinate torus needs two distinct chart coordinates");
  MeshedSurface s;
  s.name = "coordinate torus";
  s.ambient_dim = m.dim;
  s.closed = m.periodic[static_cast<std::size_t>(i)] && m.periodic[static_cast<std::size_t>(j)];
  s.u_period = m.periods[static_cast<std::size_t>(i)];
  s.v_period = m.periods[static_cast<std::size_t>(j)];
  const Vector b = base.coords;
  s.map = [b, i, j](double u, double v) {
    Vector x = b;
    x[i] = u;
    x[j] = v;
    return Point(std::move(x));
  };
  Matrix jac = Matrix::Zero(m.dim, 2);
  jac(i, 0) = 1.0;
  jac(j, 1) = 1.0;
  s.jacobian = [jac](double, double) { return jac; };
  return s;
}

double surface_integral(const KForm& w, const MeshedSurface& s, int nodes_per_axis) {
  if (w.degree() != 2) throw Error(ErrorCode::kInvalidArgument, "surface integral needs a 2-form");
  if (w.dim() != s.ambient_dim) throw Error(ErrorCode::kDimensionMismatch, "surface and form charts differ");
  if (nodes_per_axis < 1) throw Error(ErrorCode::kInvalidArgument, "quadrature needs at least one node");
  const double du = s.u_period / nodes_per_axis, dv = s.v_period / nodes_per_axis;
  double total = 0.0;
  for (int a = 0; a < nodes_per_axis; ++a) {
    const double u = (a + 0.5) * du;
    double row = 0.0;
    for (int b = 0; b < nodes_per_axis; ++b) {
      const double v = (b + 0.5) * dv;
      const Matrix e = s.jacobian(u, v);
      row += e.col(0).dot(two_form_matrix(w, s.map(u, v)) * e.col(1));
    }
    total += row;
  }
  return total * du * dv;
}

StokesResult stokes_exactness_check(const HamiltonianSystem& sys, const MeshedSurface& surf) {
  if (!sys.primitive) throw Error(ErrorCode::kMissingPrimitive, "Stokes check needs a primitive lambda");
  if (!surf.closed) throw Error(ErrorCode::kOpenSurface, "Stokes check needs a closed surface");
  if (surf.ambient_dim != sys.manifold.dim)
    throw Error(ErrorCode::kDimensionMismatch, "surface does not live in the system's chart");

  StokesResult out;
  out.nodes_per_axis = surf.resolution;
  const KForm residual = exterior_derivative(*sys.primitive) - sys.omega;
  std::vector<Point> probe;
  const int stride = std::max(1, surf.resolution / 8);
  for (int a = 0; a < surf.resolution; a += stride)
    for (int b = 0; b < surf.resolution; b += stride)
      probe.push_back(surf.map((a + 0.5) * surf.u_period / surf.resolution,
                               (b + 0.5) * surf.v_period / surf.resolution));
  out.primitive_residual = max_abs_coefficient(residual, probe);
  if (!(out.primitive_residual < kClosednessTolerance)) {
    std::ostringstream msg;
    msg << "supplied primitive does not satisfy d lambda = omega (residual " << out.primitive_residual << ")";
    throw Error(ErrorCode::kDataError, msg.str());
  }
  out.integral = surface_integral(sys.omega, surf, surf.resolution);
  return out;
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::kNegative: return "negative";
    case VerdictKind::kInconclusive: return "inconclusive";
    case VerdictKind::kRefused: return "refused";
  }
  return "unknown";
}

Verdict exactness_verdict(const HamiltonianSystem& sys, std::span<const Point> samples) {
  Verdict v;
  if (!sys.primitive) {
    v.rule = "exact-symplectic-obstruction";
    v.statement = "no primitive of omega supplied; exactness obstruction does not apply";
    return v;
  }
  const double residual = max_abs_coefficient(exterior_derivative(*sys.primitive) - sys.omega, samples);
  v.evidence.emplace_back("primitive_residual", residual);
  if (!(residual < kClosednessTolerance)) {
    std::ostringstream msg;
    msg << "supplied primitive does not satisfy d lambda = omega (residual " << residual << ")";
    throw Error(ErrorCode::kDataError, msg.str());
  }
  v.kind = VerdictKind::kNegative;
  if (sys.topology.cotangent_model) {
    v.rule = "cotangent-bundle-obstruction";
    v.statement =
        "canonical cotangent bundle: no compact level energy surface of any Hamiltonian admits a global "
        "transverse Poincare section";
  } else {
    v.rule = "exact-symplectic-obstruction";
    v.statement =
        "omega is exact: no compact level set of any Hamiltonian on this manifold admits a global transverse "
        "Poincare section";
  }
  return v;
}

BettiResult betti_necessary_condition(const BettiProfile& bp) {
  const auto& b = bp.betti;
  if (b.empty() || b.size() % 2 != 0)
    throw Error(ErrorCode::kMalformedProfile,
                "profile '" + bp.name + "' must list b_0..b_{2n-1} of an odd-dimensional manifold");
  if (b.front() < 1) throw Error(ErrorCode::kMalformedProfile, "profile '" + bp.name + "' has b_0 < 1");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] < 0) throw Error(ErrorCode::kMalformedProfile, "profile '" + bp.name + "' has a negative entry");
    if (b[i] != b[b.size() - 1 - i])
      throw Error(ErrorCode::kMalformedProfile, "profile '" + bp.name + "' violates Poincare duality");
  }
  BettiResult r;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0) {
      r.failing_degree = static_cast<int>(i);
      r.note = "H^" + std::to_string(i) + " vanishes: no cosymplectic structure, so no global transverse section";
      return r;
    }
  }
  r.pass = true;
  r.note = "all Betti numbers positive (necessary, not sufficient)";
  return r;
}

const std::vector<BettiProfile>& betti_catalog() {
  static const std::vector<BettiProfile> catalog{
      {"S1", {1, 1}},
      {"S3", {1, 0, 0, 1}},
      {"T3", {1, 3, 3, 1}},
      {"S2xS1", {1, 1, 1, 1}},
      {"S5", {1, 0, 0, 0, 0, 1}},
      {"T5", {1, 5, 10, 10, 5, 1}},
      {"S3xS2", {1, 0, 1, 1, 0, 1}},
      {"T2xS3", {1, 2, 1, 1, 2, 1}},
  };
  return catalog;
}

std::optional<BettiProfile> find_betti(std::string_view name) {
  for (const auto& bp : betti_catalog())
    if (bp.name == name) return bp;
  return std::nullopt;
}

Verdict simply_connected_verdict(bool compact, bool simply_connected, bool connected) {
  Verdict v;
  v.rule = "simply-connected-obstruction";
  v.evidence = {{"compact", compact ? 1.0 : 0.0},
                {"simply_connected", simply_connected ? 1.0 : 0.0},
                {"connected", connected ? 1.0 : 0.0}};
  if (compact && simply_connected && !connected) {
    v.kind = VerdictKind::kRefused;
    v.statement = "level set not declared connected; the obstruction only covers connected hypersurfaces";
  } else if (compact && simply_connected) {
    v.kind = VerdictKind::kNegative;
    v.statement =
        "compact simply connected ambient: a connected level set separates it and no level set admits a "
        "global transverse Poincare section";
  } else {
    v.statement = compact ? "ambient not simply connected; obstruction does not apply"
                          : "ambient not compact; obstruction does not apply";
  }
  return v;
}

const std::vector<AmbientEntry>& ambient_catalog() {
  static const std::vector<AmbientEntry> catalog{
      {"S2xS2", {true, true, false}, "product of spheres with the split area form"},
      {"CP2", {true, true, false}, "Fubini-Study form"},
      {"T4", {true, false, false}, "standard flat torus"},
      {"R4", {false, true, false}, "standard vector space"},
      {"T*R2", {false, true, true}, "canonical cotangent bundle"},
  };
  return catalog;
}

std::optional<AmbientEntry> find_ambient(std::string_view name) {
  for (const auto& e : ambient_catalog())
    if (e.name == name) return e;
  return std::nullopt;
}

}  // namespace cosymlab
