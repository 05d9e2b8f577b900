#pragma once

// Transverse sections of Hamiltonian flows: crossing detection, first-return
// time and map, globality checks and the mapping-torus chart
//
//     Psi(p, s) = Phi^{s T(p)}(p),  s in [0, 1],  Psi(p, 1) = phi(p).
//
// A section is the level set {theta = level} of a circle-valued function.
// Only crossings where theta increases along the flow (orientation +1, or
// decreases for orientation -1) count, so each fibre is covered once.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cosymlab/phase.hpp"

namespace cosymlab {

inline constexpr double kTangencyThreshold = 1e-8;
inline constexpr double kDefaultTMax = 1e3;
inline constexpr double kCrossingResidual = 1e-12;

struct SectionSpec {
  ScalarField theta;  // circle-valued; compared modulo 2 pi
  double level = 0.0;
  int orientation = +1;
  /// Coordinates on the section inside the energy surface. Needed by
  /// return_map_jacobian and for CSV/plot output.
  std::optional<GraphEmbedding> chart;
};

/// d theta(X_H) at p.
double crossing_rate(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p);

/// Signed distance to the section, wrapped into [-pi, pi).
double section_residual(const SectionSpec& sec, const Point& p);

struct Crossing {
  double t = 0.0;       // signed time from the start point
  Point point;          // reduced
  Point lifted;         // continuous along the orbit
  double rate = 0.0;    // d theta(X_H) at the crossing
};

struct ReturnRecord {
  Point start;
  double return_time = 0.0;
  Point image;
  double transversality_margin = 0.0;  // min |d theta(X_H)| along the orbit
  int crossings_seen = 0;              // every crossing, either orientation
};

/// First positively oriented crossing after p. Requires p on the section and
/// transversality at p. Throws kNotOnSection, kTangency, kNoCrossing.
ReturnRecord first_return(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                          double t_max = kDefaultTMax, double tol = 1e-10);

/// First positively oriented crossing strictly after (direction = +1) or
/// strictly before (direction = -1) p; p need not lie on the section.
std::optional<Crossing> find_crossing(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                                      int direction, double t_max = kDefaultTMax, double tol = 1e-10,
                                      double* min_margin = nullptr, int* crossings_seen = nullptr);

/// The first `count` positively oriented crossings along one orbit.
std::vector<Crossing> crossing_sequence(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                                        int count, double t_max = kDefaultTMax, double tol = 1e-10);

/// phi^k(p) by composing first returns; element j is phi^{j+1}(p).
std::vector<ReturnRecord> iterate_return_map(const HamiltonianSystem& sys, const SectionSpec& sec,
                                             const Point& p, int k, double t_max = kDefaultTMax,
                                             double tol = 1e-10);

/// Central-difference Jacobian of phi in section chart coordinates.
/// Throws kNoiseFloor when fd_step < 1e4 * tol.
Matrix return_map_jacobian(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                           double fd_step = 1e-4, double tol = 1e-12);

/// Matrix of i*omega on the section chart frame at p.
Matrix restricted_form_matrix(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p);

struct SymplecticityCheck {
  Matrix jacobian;
  double det = 0.0;
  double form_residual = 0.0;  // max |Dphi^T J(phi p) Dphi - J(p)|
};

SymplecticityCheck return_map_symplecticity(const HamiltonianSystem& sys, const SectionSpec& sec,
                                            const Point& p, double fd_step = 1e-4, double tol = 1e-12);

struct GlobalityFailure {
  std::size_t index = 0;
  std::string reason;
};

struct GlobalityReport {
  std::size_t samples = 0;
  std::size_t passed = 0;
  std::vector<GlobalityFailure> failures;
  double min_margin = 0.0;
  double max_return_time = 0.0;
  double min_return_time = 0.0;
  std::string warning;
  bool pass() const { return failures.empty(); }
};

/// For each sample: a crossing in forward and in backward time within t_max,
/// and the first-return time from the forward crossing. Failures are report
/// entries. An empty sample set passes vacuously with a warning.
GlobalityReport verify_global(const HamiltonianSystem& sys, const SectionSpec& sec,
                              std::span<const Point> samples, double t_max = kDefaultTMax,
                              double tol = 1e-10);

struct MappingTorusChart {
  std::vector<Point> fiber;            // grid on the section
  std::vector<double> return_times;    // T(p)
  std::vector<Point> holonomy;         // phi(p)
  std::vector<double> s_samples;       // in [0, 1]
  std::vector<std::vector<Point>> psi; // psi[i][k] = Psi(fiber[i], s_samples[k])
  double gluing_residual = 0.0;        // max dist(Psi(p,1), phi(p))
  double max_energy_error = 0.0;       // max |H(Psi) - H(p)|
  bool energy_ok = false;              // max_energy_error < 1e-8
};

/// Throws kGluingViolation when the gluing residual exceeds 10 * tol.
MappingTorusChart mapping_torus_chart(const HamiltonianSystem& sys, const SectionSpec& sec,
                                      std::span<const Point> grid, int s_count = 5,
                                      double t_max = kDefaultTMax, double tol = 1e-10);

struct CrossingRow {
  int orbit_id = 0;
  double t = 0.0;
  Vector coords;
  double margin = 0.0;
};

/// Header "orbit_id,t,coord_0,...,coord_{k-1},margin", one row per crossing.
void write_crossings_csv(std::ostream& out, std::span<const CrossingRow> rows);

}  // namespace cosymlab
