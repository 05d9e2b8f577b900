#pragma once

// Non-existence verdicts for global transverse sections.
//
//  * Exact ambient (omega = d lambda): every closed surface has zero symplectic
//    area by Stokes, so there is no closed symplectic submanifold, hence no
//    section on any compact level set.
//  * An energy surface carrying a cosymplectic structure has b_i >= 1 in every
//    degree.
//  * Compact, simply connected ambient with connected level set: no section.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosymlab/phase.hpp"

namespace cosymlab {

/// Closed surface parametrized over [0, u_period) x [0, v_period).
struct MeshedSurface {
  std::string name;
  int ambient_dim = 0;
  double u_period = kTwoPi;
  double v_period = kTwoPi;
  std::function<Point(double, double)> map;
  std::function<Matrix(double, double)> jacobian;  // ambient_dim x 2
  bool closed = true;
  int resolution = 256;  // nodes per parameter axis
};

MeshedSurface revolution_torus(int ambient_dim, std::array<int, 3> axes, double major, double minor);
MeshedSurface round_sphere(int ambient_dim, std::array<int, 3> axes, double radius);
/// {x_i, x_j} coordinate torus through `base` on a periodic chart.
MeshedSurface coordinate_torus(const ChartManifold& m, int i, int j, const Point& base);

/// Composite midpoint rule for the integral of i^*w over the surface.
double surface_integral(const KForm& w, const MeshedSurface& s, int nodes_per_axis);

struct StokesResult {
  double integral = 0.0;
  int nodes_per_axis = 0;
  double primitive_residual = 0.0;  // max |d lambda - omega| at quadrature nodes
};

/// Throws kMissingPrimitive, kOpenSurface, kDataError (d lambda != omega),
/// kDimensionMismatch.
StokesResult stokes_exactness_check(const HamiltonianSystem& sys, const MeshedSurface& surf);

enum class VerdictKind { kNegative, kInconclusive, kRefused };
std::string_view to_string(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::kInconclusive;
  std::string rule;        // identifier of the obstruction applied
  std::string statement;
  std::vector<std::pair<std::string, double>> evidence;
};

/// Negative when a primitive is supplied and d lambda = omega at the samples.
/// Throws kDataError when the supplied primitive is wrong.
Verdict exactness_verdict(const HamiltonianSystem& sys, std::span<const Point> samples);

struct BettiProfile {
  std::string name;
  std::vector<int> betti;  // b_0 .. b_{2n-1}
};

struct BettiResult {
  bool pass = false;
  std::optional<int> failing_degree;
  std::string note;
};

/// Throws kMalformedProfile for odd or empty length, b_0 < 1, negative
/// entries, or broken Poincare duality.
BettiResult betti_necessary_condition(const BettiProfile& bp);

const std::vector<BettiProfile>& betti_catalog();
std::optional<BettiProfile> find_betti(std::string_view name);

/// Negative for compact + simply connected ambients with a connected level
/// set; refused when the level set is not connected; else inconclusive.
Verdict simply_connected_verdict(bool compact, bool simply_connected, bool connected = true);

struct AmbientEntry {
  std::string name;
  TopologyFlags flags;
  std::string note;
};

const std::vector<AmbientEntry>& ambient_catalog();
std::optional<AmbientEntry> find_ambient(std::string_view name);

}  // namespace cosymlab
