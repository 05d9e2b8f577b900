#pragma once

// Named example systems, cosymplectic seeds and their sections.
//
//   harmonic            R^2, H = (q^2 + p^2) / 2
//   oscillator2         R^4, H = (q1^2 + p1^2)/2 + w (q2^2 + p2^2)/2, w = sqrt 2
//   cotangent_r4        T^*R^2 with lambda = p1 dq1 + p2 dq2, omega = d lambda
//   pendulum            T^*S^1, H = p^2/2 - cos q
//   suspension          mapping torus of the rotation x -> x + rho
//   product_<seed>      N x S^1 with omega = beta + alpha ^ d theta, H = sin theta

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosymlab/cosym.hpp"
#include "cosymlab/section.hpp"

namespace cosymlab {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

struct CosymSeed {
  CosymplecticStructure structure;
  int leaf_coordinate = -1;  // coordinate whose level sets give a section, -1 if none
  bool expected_valid = true;
};

/// "T3", "T3_tilted", "T3_irrational", "T5", "T5_degenerate".
/// Throws kInvalidArgument for unknown names.
CosymSeed cosym_seed(std::string_view name);
const std::vector<std::string>& cosym_seed_names();

HamiltonianSystem harmonic_oscillator();
HamiltonianSystem linear_oscillator(double ratio = kSqrt2);
HamiltonianSystem cotangent_r4();
HamiltonianSystem pendulum();
/// Coordinates (x, y, t, s); x and t have period 1.
HamiltonianSystem suspension(double rho);

/// theta = atan2(-p2, q2), which increases along the flow. The chart has free
/// coordinates (q1, p1) on H = level.
SectionSpec oscillator_section(const HamiltonianSystem& osc, double level);
/// theta = 2 pi t on H = level; chart (x, y).
SectionSpec suspension_section(const HamiltonianSystem& susp, double level);
/// theta = 2 pi x_leaf / L on the leaf {theta_S1 = 0} of a product system;
/// chart coordinates are the remaining coordinates of N.
SectionSpec product_leaf_section(const HamiltonianSystem& product, int leaf_coordinate);

/// Chart of H = level solving for one coordinate.
GraphEmbedding energy_surface_chart(const HamiltonianSystem& sys, double level, int dependent,
                                    const Point& reference);

struct CatalogSystem {
  std::string name;
  HamiltonianSystem system;
  double level = 0.0;
  std::optional<SectionSpec> section;
  bool section_global = false;   // section expected to pass verify_global
  std::vector<double> box_lo, box_hi;          // ambient sampling box (non-periodic coordinates)
  std::vector<double> chart_lo, chart_hi;      // section chart sampling box
};

/// "harmonic", "oscillator2", "cotangent_r4", "pendulum", "suspension",
/// "product_T3", "product_T5", "product_T3_irrational".
CatalogSystem catalog_system(std::string_view name);
const std::vector<std::string>& catalog_system_names();

/// Points on the section: uniform in the chart box, then embedded.
std::vector<Point> section_samples(const CatalogSystem& entry, SampleRng& rng, std::size_t count);
/// Points in the ambient sampling box.
std::vector<Point> ambient_samples(const CatalogSystem& entry, SampleRng& rng, std::size_t count);

}  // namespace cosymlab
