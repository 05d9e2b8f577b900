#pragma once

// Cosymplectic structures (alpha, beta) on odd-dimensional charts and their
// correspondence with symplectic vector fields transverse to energy surfaces.
//
// For a transverse symplectic field X on Z = H^{-1}(c):
//     alpha = i^*(iota_X omega),   beta = i^*omega.
// Conversely, given (alpha, beta) on Z, X solves iota_X omega = alpha~ where
// alpha~ extends alpha off Z constantly along the collar direction.

#include <optional>
#include <string>
#include <vector>

#include "cosymlab/phase.hpp"

namespace cosymlab {

inline constexpr double kVolumeMargin = 1e-8;
inline constexpr double kSymplecticResidualTolerance = 1e-6;

struct CosymplecticStructure {
  std::string name;
  ChartManifold manifold;  // odd dimension 2n - 1
  KForm alpha;             // degree 1
  KForm beta;              // degree 2
};

struct CosymReport {
  std::size_t samples = 0;
  double alpha_closedness = 0.0;  // max |d alpha| coefficient
  double beta_closedness = 0.0;   // max |d beta| coefficient
  double volume_margin = 0.0;     // min |alpha ^ beta^{n-1}| on the frame
  std::size_t worst_sample = 0;   // where the volume margin is attained
  bool closed = false;
  bool volume = false;
  bool pass() const { return closed && volume; }
};

/// Throws kDimensionMismatch for even dimension, kInvalidArgument when
/// `samples` is empty.
CosymReport verify_cosymplectic(const CosymplecticStructure& cs, std::span<const Point> samples);

/// alpha = i^*(iota_X omega), beta = i^*omega in the coordinates of `chart`
/// (a chart of Z). Throws kTangency when |dH(X)| < kTangencyThreshold at a
/// sample, kNotSymplectic when d(iota_X omega) exceeds tolerance, and
/// kVerificationFailed when the result is not cosymplectic.
CosymplecticStructure field_to_cosym(const HamiltonianSystem& sys, const EnergySurface& z, const VectorField& x,
                                     const GraphEmbedding& chart, std::span<const Point> samples);

struct TransverseFieldReport {
  std::vector<Point> samples;
  std::vector<Vector> field;         // X at each sample
  VectorField field_fn;              // X on the ambient chart
  double min_transversality = 0.0;   // min |dH(X)|
  double symplectic_residual = 0.0;  // max |d(iota_X omega)| coefficient
  bool pass() const { return min_transversality > 1e-8 && symplectic_residual < kSymplecticResidualTolerance; }
};

/// Solves iota_X omega = alpha~ at each sample (points of Z in ambient
/// coordinates). alpha~ is the pullback of alpha by the chart projection.
/// Throws kDegenerateInput when alpha vanishes at the samples and
/// kSingularForm from the pointwise solve.
TransverseFieldReport cosym_to_field(const HamiltonianSystem& sys, const EnergySurface& z,
                                     const CosymplecticStructure& cs, const GraphEmbedding& chart,
                                     std::span<const Point> samples);

struct SubmanifoldReport {
  std::size_t samples = 0;
  double min_abs_det = 0.0;  // min |det| of the restricted form matrix
  std::size_t worst_sample = 0;
  double threshold = kVolumeMargin;
  bool pass() const { return min_abs_det > threshold; }
};

/// Nondegeneracy of i^*omega on a parametrized patch; `samples` are patch
/// parameters. Throws kDimensionMismatch for odd-dimensional patches.
SubmanifoldReport symplectic_submanifold_test(const HamiltonianSystem& sys, const ChartMap& patch,
                                              std::span<const Point> samples, double threshold = kVolumeMargin);

/// M = N x S^1, omega = pr^*beta + pr^*alpha ^ d theta, H = sin theta.
/// Throws kInvalidArgument below dimension 3 and kVerificationFailed when
/// (alpha, beta) fails verification.
HamiltonianSystem build_product_system(const CosymplecticStructure& cs);

struct CollarForm {
  ChartManifold manifold;  // N x (-epsilon, epsilon), collar coordinate last
  KForm omega;             // beta + alpha ^ dt
  double epsilon = 0.0;
};

/// epsilon = 0.1 * smallest period of N (2 pi when N has no periodic
/// coordinate). Throws kVerificationFailed when the form is not closed or
/// degenerate at sampled collar points.
CollarForm build_collar_form(const CosymplecticStructure& cs);

struct HamiltonianExtension {
  ScalarField hamiltonian;         // primitive of iota_X omega, zero at base
  double max_loop_period = 0.0;    // |integral| over periodic generators
  double max_path_dependence = 0.0;
  double gradient_residual = 0.0;  // max |grad H_X - iota_X omega| at samples
  bool simply_connected_flag = false;  // echoed from the system
  bool pass() const { return gradient_residual < 1e-6; }
};

/// Primitive of iota_X omega by Gauss-Legendre integration along straight
/// chart paths from `base`. Throws kPathDependence when a generator loop or a
/// two-leg path disagrees by more than `tol`.
HamiltonianExtension extend_to_hamiltonian_field(const HamiltonianSystem& sys, const VectorField& x,
                                                 const Point& base, std::span<const Point> samples,
                                                 double tol = 1e-6);

}  // namespace cosymlab
