#pragma once

// Pointwise exterior calculus on flat coordinate charts.
//
// A k-form on an n-dimensional chart is a function from points to its
// coefficient vector over the lexicographically ordered k-element index
// subsets {i_1 < ... < i_k}. Evaluation follows the determinant convention
//
//   (dx_{i_1} ^ ... ^ dx_{i_k})(v_1, ..., v_k) = det[ v_j^{i_m} ],
//
// so that for the standard form on R^{2n}, omega^n on the coordinate frame
// (q_1, p_1, ..., q_n, p_n) equals n!.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cosymlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Point {
  Vector coords;

  Point() = default;
  explicit Point(Vector c) : coords(std::move(c)) {}
  Point(std::initializer_list<double> c);

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
};

struct TangentVector {
  Point base;
  Vector components;
};

using VectorField = std::function<Vector(const Point&)>;

/// Smooth map between charts. `jacobian(x)` is target_dim x source_dim.
struct ChartMap {
  int source_dim = 0;
  int target_dim = 0;
  std::function<Point(const Point&)> map;
  std::function<Matrix(const Point&)> jacobian;
};

std::size_t binomial(int n, int k);

/// k-element subsets of {0..n-1} in lexicographic order (cached).
const std::vector<std::vector<int>>& subsets(int n, int k);

/// Position of a strictly increasing index set within `subsets(n, size)`.
std::size_t subset_rank(int n, std::span<const int> subset);

class KForm {
 public:
  using CoeffFn = std::function<Vector(const Point&)>;

  /// `derivative`, when given, returns the coefficients of df over the
  /// (degree+1)-subsets and makes exterior_derivative exact.
  KForm(int dim, int degree, CoeffFn coeffs, CoeffFn derivative = nullptr);

  static KForm zero(int dim, int degree);
  static KForm constant(int dim, int degree, Vector coeffs);
  /// c * dx_{i_1} ^ ... ^ dx_{i_k}; indices need not be sorted.
  static KForm basis(int dim, std::vector<int> indices, double c = 1.0);
  /// 0-form from a scalar function; `gradient` gives an analytic d.
  static KForm scalar(int dim, std::function<double(const Point&)> f,
                      std::function<Vector(const Point&)> gradient = nullptr);
  /// One-form with analytic coefficient functions and their Jacobian
  /// (jacobian(x)(i, j) = d a_i / d x_j), giving an analytic d.
  static KForm one_form(int dim, std::function<Vector(const Point&)> coeffs,
                        std::function<Matrix(const Point&)> jacobian = nullptr);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return binomial(dim_, degree_); }

  Vector coefficients(const Point& p) const;
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }
  /// Requires has_analytic_derivative().
  Vector derivative_coefficients(const Point& p) const;

  KForm operator+(const KForm& other) const;
  KForm operator-(const KForm& other) const;
  KForm operator*(double s) const;
  friend KForm operator*(double s, const KForm& f) { return f * s; }

 private:
  int dim_;
  int degree_;
  CoeffFn coeffs_;
  CoeffFn derivative_;
};

/// Alternating multilinear value of f on vs (all sharing a base point).
double evaluate(const KForm& f, std::span<const TangentVector> vs);

KForm wedge(const KForm& a, const KForm& b);

/// iota_X f: contraction in the first slot.
KForm interior(VectorField x, const KForm& f);

inline constexpr double kDefaultDerivativeStep = 1e-5;

/// Exact when f carries analytic derivative coefficients; otherwise central
/// finite differences with step h in chart units.
KForm exterior_derivative(const KForm& f, double h = kDefaultDerivativeStep);

KForm pullback(const ChartMap& phi, const KForm& f);

/// f^m by iterated wedge; power(f, 0) is the constant 0-form 1.
KForm power(const KForm& f, int m);

/// Pointwise coefficient algebra used by the lazy constructors above.
Vector wedge_coefficients(int dim, int ka, const Vector& a, int kb, const Vector& b);
Vector pullback_coefficients(const Matrix& jacobian, int degree, const Vector& target);

/// Matrix of a 2-form on the coordinate frame, M(i, j) = w(e_i, e_j).
Matrix two_form_matrix(const KForm& w, const Point& p);

/// Largest |coefficient| of f over the sample points.
double max_abs_coefficient(const KForm& f, std::span<const Point> samples);

}  // namespace cosymlab
