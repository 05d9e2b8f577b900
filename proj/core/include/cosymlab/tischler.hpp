#pragma once

// Rational approximation of a closed 1-form on a flat torus.
//
// A closed 1-form alpha on T^k splits into a constant part sum c_i dx_i and an
// exact part. Its normalized periods p_i = (1/2 pi) * integral of alpha over
// the i-th generator loop fix the constant part. Replacing p_i by n_i / d
// gives alpha', whose foliation ker alpha' is a fibration over the circle by
// F = (sum n_i x_i / L_i) / gcd(n) mod 1.

#include <cstdint>
#include <string>
#include <vector>

#include "cosymlab/section.hpp"

namespace cosymlab {

struct PeriodVector {
  std::vector<double> values;       // normalized by 1 / (2 pi)
  std::vector<double> error_bounds; // quadrature error estimates (normalized)
  std::vector<std::string> cycles;  // "x_i loop"
};

/// Line integrals over the coordinate generator loops through `base`
/// (origin by default). Throws kInvalidArgument when the chart is not a torus
/// and kNotClosed when d alpha exceeds tolerance.
PeriodVector periods(const KForm& alpha, const ChartManifold& torus, const Point* base = nullptr);

struct RationalApproximation {
  std::int64_t d = 1;
  std::vector<std::int64_t> n;
  double epsilon_achieved = 0.0;  // max_i |p_i - n_i / d|
};

inline constexpr std::int64_t kDefaultDenominatorCap = 10'000;

/// Smallest common denominator d <= d_cap with max_i |p_i - n_i/d| <= eps,
/// by exhaustive scan. Throws kCapExhausted.
RationalApproximation rationalize(const PeriodVector& pv, double eps,
                                  std::int64_t d_cap = kDefaultDenominatorCap);

struct Approximation {
  KForm alpha_prime;
  Vector shift;            // constant coefficient change alpha' - alpha
  double distance = 0.0;   // sup-norm coefficient distance |alpha - alpha'|
};

/// alpha' = alpha + sum_i (2 pi / L_i)(n_i/d - p_i) dx_i: periods become
/// n_i/d, the exact part is kept.
Approximation build_approximation(const KForm& alpha, const ChartManifold& torus, const PeriodVector& pv,
                                  const RationalApproximation& ra);

struct TransversalityReport {
  std::size_t samples = 0;
  double margin_original = 0.0;     // min |alpha(X_H)|
  double margin_approximated = 0.0; // min |alpha'(X_H)|
  double margin_loss = 0.0;
  bool pass() const { return margin_approximated > kTangencyThreshold; }
};

/// alpha and alpha' live on the leaf chart N; `to_leaf` maps ambient points
/// of the system onto N.
TransversalityReport check_transversality_preserved(const HamiltonianSystem& sys, const ChartMap& to_leaf,
                                                    const KForm& alpha, const KForm& alpha_prime,
                                                    std::span<const Point> samples);

/// Section theta = 2 pi * (sum n_i x_i / L_i) / gcd(n) for the fibration of
/// alpha'. The torus coordinates are the first torus.dim coordinates of an
/// ambient chart of dimension `ambient_dim` (default: the torus itself).
/// Throws kDegenerateInput when every n_i is zero.
SectionSpec extract_leaf(const RationalApproximation& ra, const ChartManifold& torus, int ambient_dim = 0);

}  // namespace cosymlab
