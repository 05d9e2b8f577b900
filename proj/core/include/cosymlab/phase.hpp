#pragma once

// Chart manifolds, Hamiltonian systems and their flows.
//
// Sign convention: the Hamiltonian vector field X_H is defined by
//
//     iota_{X_H} omega = dH,   i.e.  omega(X_H, v) = dH(v) for all v.
//
// For omega = dq ^ dp this gives q' = dH/dp, p' = -dH/dq. Texts that use
// iota_{X_H} omega = -dH get the opposite orientation of every orbit.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cosymlab/forms.hpp"

namespace cosymlab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

struct ChartManifold {
  int dim = 0;
  std::vector<bool> periodic;
  std::vector<double> periods;  // meaningful where periodic[i]

  static ChartManifold euclidean(int dim);
  static ChartManifold torus(int dim, double period = kTwoPi);
  static ChartManifold with_mask(std::vector<bool> periodic, double period = kTwoPi);

  /// Throws kInvalidArgument if dim < 1, sizes disagree or a period is <= 0.
  void validate() const;
  bool all_periodic() const;
  /// Periodic coordinates reduced into [0, period).
  Point reduce(const Point& p) const;
  /// a - b with periodic components wrapped into [-period/2, period/2).
  Vector difference(const Point& a, const Point& b) const;
  double distance(const Point& a, const Point& b) const;
};

/// M x N with M's coordinates first.
ChartManifold product(const ChartManifold& m, const ChartManifold& n);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Vector(const Point&)> gradient;

  double operator()(const Point& p) const { return value(p); }
};

/// Gradient by central differences when no analytic gradient is at hand.
ScalarField with_numeric_gradient(std::function<double(const Point&)> f, int dim, double h = 1e-6);

/// Declared (not inferred) topology of a catalog chart.
struct TopologyFlags {
  bool compact = false;
  bool simply_connected = false;
  bool cotangent_model = false;
};

struct HamiltonianSystem {
  std::string name;
  ChartManifold manifold;
  KForm omega;
  ScalarField hamiltonian;
  std::optional<KForm> primitive;  // lambda with d(lambda) = omega
  TopologyFlags topology;
};

struct SystemCheck {
  double closedness = 0.0;          // max |d omega| coefficient
  double min_rcond = 0.0;           // smallest reciprocal condition of the omega matrix
  std::optional<double> primitive_residual;  // max |d lambda - omega| coefficient
  bool closed = false;
  bool nondegenerate = false;
  bool primitive_ok = true;
  bool pass() const { return closed && nondegenerate && primitive_ok; }
};

inline constexpr double kClosednessTolerance = 1e-6;
inline constexpr double kMinReciprocalCondition = 1e-10;

SystemCheck check_system(const HamiltonianSystem& sys, std::span<const Point> samples);

/// Regular level set Z = H^{-1}(c).
struct EnergySurface {
  HamiltonianSystem system;
  double level = 0.0;
};

/// min ||dH|| over samples (positive on a regular level).
double min_gradient_norm(const EnergySurface& z, std::span<const Point> samples);

// ---------------------------------------------------------------------------
// Hamiltonian vector fields and flows.

double reciprocal_condition(const Matrix& m);

/// Solves omega(X, .) = covector at p, i.e. M^T X = covector with M the omega
/// matrix. Throws kSingularForm when rcond(M) < kMinReciprocalCondition.
Vector solve_interior(const Matrix& omega_matrix, const Vector& covector);

Vector hamiltonian_field(const HamiltonianSystem& sys, const Point& p);
TangentVector hamiltonian_vector_field(const HamiltonianSystem& sys, const Point& p);

struct FlowResult {
  Point end;               // periodic coordinates reduced
  Point lifted_end;        // unreduced
  double energy_error = 0.0;  // |H(end) - H(start)|
  std::size_t steps = 0;
};

FlowResult flow(const HamiltonianSystem& sys, const Point& p0, double t, double tol = 1e-10);

/// max over `samples` equally spaced times in (0, t_max] of |H(flow) - H(p0)|.
double energy_drift(const HamiltonianSystem& sys, const Point& p0, double t_max, int samples,
                    double tol = 1e-10);

/// Central-difference divergence of X_H at p.
double divergence_check(const HamiltonianSystem& sys, const Point& p, double h = 1e-5);

/// Fixed-step implicit midpoint rule (symplectic) for long runs.
Point implicit_midpoint_flow(const HamiltonianSystem& sys, const Point& p0, double t, double h);

// ---------------------------------------------------------------------------
// Graph charts of level sets.

struct LevelConstraint {
  ScalarField field;
  double target = 0.0;
  bool circle_valued = false;  // residual wrapped into [-pi, pi)
};

/// Chart of {f_j = target_j} where the dependent coordinates are solved for
/// the free ones by Newton's method, starting from a reference point.
class GraphEmbedding {
 public:
  GraphEmbedding(ChartManifold ambient, std::vector<int> free, std::vector<int> dependent,
                 std::vector<LevelConstraint> constraints, Point reference);

  int source_dim() const { return static_cast<int>(free_.size()); }
  int ambient_dim() const { return ambient_.dim; }
  const std::vector<int>& free_coordinates() const { return free_; }
  const std::vector<int>& dependent_coordinates() const { return dependent_; }
  const ChartManifold& ambient() const { return ambient_; }
  const Point& reference() const { return reference_; }
  /// Free coordinates with their periodicity.
  ChartManifold source_manifold() const;

  Point embed(const Point& u) const;
  Point embed(const Point& u, const Point& guess) const;
  /// Moves p onto the constraint set keeping its free coordinates.
  Point correct(const Point& p) const;
  /// Free coordinates of an ambient point.
  Point project(const Point& p) const;
  /// d(embed)/du by the implicit function theorem (ambient_dim x source_dim).
  Matrix jacobian(const Point& u) const;

  ChartMap as_map() const;
  /// Ambient -> source projection that drops the dependent coordinates.
  ChartMap projection_map() const;

 private:
  ChartManifold ambient_;
  std::vector<int> free_, dependent_;
  std::vector<LevelConstraint> constraints_;
  Point reference_;
};

// ---------------------------------------------------------------------------
// Deterministic sampling.

class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed = 0) : engine_(seed) {}
  /// Uniform in [lo, hi), portable across standard libraries.
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

/// Uniform points: periodic coordinates over a full period, the others in
/// [lo[i], hi[i]).
std::vector<Point> sample_box(const ChartManifold& m, SampleRng& rng, std::size_t count,
                              const std::vector<double>& lo, const std::vector<double>& hi);

}  // namespace cosymlab
