#include "cosymlab/tischler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cosymlab/error.hpp"

namespace cosymlab {

PeriodVector periods(const KForm& alpha, const ChartManifold& torus, const Point* base) {
  torus.validate();
  if (!torus.all_periodic()) throw Error(ErrorCode::kInvalidArgument, "periods need a torus chart");
  if (alpha.degree() != 1 || alpha.dim() != torus.dim)
    throw Error(ErrorCode::kDimensionMismatch, "periods need a 1-form on the torus");

  SampleRng rng(0);
  const auto samples = sample_box(torus, rng, 16, std::vector<double>(torus.dim, 0.0),
                                  std::vector<double>(torus.dim, 0.0));
  const double closedness = max_abs_coefficient(exterior_derivative(alpha), samples);
  if (!(closedness < kClosednessTolerance)) {
    std::ostringstream msg;
    msg << "alpha is not closed (max |d alpha| = " << closedness << "); periods would be path dependent";
    throw Error(ErrorCode::kNotClosed, msg.str());
  }

  const Vector origin = base ? base->coords : Vector::Zero(torus.dim);
  PeriodVector out;
  for (int i = 0; i < torus.dim; ++i) {
    const double length = torus.periods[static_cast<std::size_t>(i)];
    auto integrand = [&](double s) {
      Vector x = origin;
      x[i] += s;
      return alpha.coefficients(Point(std::move(x)))[i];
    };
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, length, 15, 1e-14, &err);
    out.values.push_back(value / kTwoPi);
    out.error_bounds.push_back(err / kTwoPi);
    out.cycles.push_back("x_" + std::to_string(i) + " loop");
  }
  return out;
}

RationalApproximation rationalize(const PeriodVector& pv, double eps, std::int64_t d_cap) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rationalize needs eps > 0");
  if (d_cap < 1) throw Error(ErrorCode::kInvalidArgument, "denominator cap must be >= 1");
  for (std::int64_t d = 1; d <= d_cap; ++d) {
    RationalApproximation ra;
    ra.d = d;
    const auto dd = static_cast<double>(d);
    for (double p : pv.values) {
      const auto n = static_cast<std::int64_t>(std::llround(p * dd));
      ra.n.push_back(n);
      ra.epsilon_achieved = std::max(ra.epsilon_achieved, std::abs(p - static_cast<double>(n) / dd));
    }
    if (ra.epsilon_achieved <= eps) return ra;
  }
  std::ostringstream msg;
  msg << "no common denominator <= " << d_cap << " reaches eps = " << eps;
  throw Error(ErrorCode::kCapExhausted, msg.str());
}

Approximation build_approximation(const KForm& alpha, const ChartManifold& torus, const PeriodVector& pv,
                                  const RationalApproximation& ra) {
  const int dim = torus.dim;
  if (static_cast<int>(pv.values.size()) != dim || static_cast<int>(ra.n.size()) != dim)
    throw Error(ErrorCode::kDimensionMismatch, "period data does not match the torus");
  Vector shift(dim);
  for (int i = 0; i < dim; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double target = static_cast<double>(ra.n[ui]) / static_cast<double>(ra.d);
    shift[i] = kTwoPi * (target - pv.values[ui]) / torus.periods[ui];
  }
  Approximation out{alpha + KForm::constant(dim, 1, shift), shift, shift.cwiseAbs().maxCoeff()};
  return out;
}

TransversalityReport check_transversality_preserved(const HamiltonianSystem& sys, const ChartMap& to_leaf,
                                                    const KForm& alpha, const KForm& alpha_prime,
                                                    std::span<const Point> samples) {
  const KForm a = pullback(to_leaf, alpha);
  const KForm b = pullback(to_leaf, alpha_prime);
  TransversalityReport rep;
  rep.samples = samples.size();
  rep.margin_original = rep.margin_approximated = std::numeric_limits<double>::infinity();
  for (const Point& p : samples) {
    const Vector x = hamiltonian_field(sys, p);
    rep.margin_original = std::min(rep.margin_original, std::abs(a.coefficients(p).dot(x)));
    rep.margin_approximated = std::min(rep.margin_approximated, std::abs(b.coefficients(p).dot(x)));
  }
  if (samples.empty()) rep.margin_original = rep.margin_approximated = 0.0;
  rep.margin_loss = rep.margin_original - rep.margin_approximated;
  return rep;
}

SectionSpec extract_leaf(const RationalApproximation& ra, const ChartManifold& torus, int ambient_dim) {
  const int k = torus.dim;
  const int dim = ambient_dim > 0 ? ambient_dim : k;
  if (static_cast<int>(ra.n.size()) != k) throw Error(ErrorCode::kDimensionMismatch, "n does not match the torus");
  if (dim < k) throw Error(ErrorCode::kDimensionMismatch, "ambient chart is smaller than the torus");
  std::int64_t g = 0;
  for (auto n : ra.n) g = std::gcd(g, n);
  if (g == 0) throw Error(ErrorCode::kDegenerateInput, "all n_i are zero: alpha' defines no fibration");

  Vector grad = Vector::Zero(dim);
  for (int i = 0; i < k; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    grad[i] = kTwoPi * static_cast<double>(ra.n[ui] / g) / torus.periods[ui];
  }
  SectionSpec sec;
  sec.theta.value = [grad, k](const Point& p) {
    const double v = std::fmod(grad.head(k).dot(p.coords.head(k)), kTwoPi);
    return v < 0.0 ? v + kTwoPi : v;
  };
  sec.theta.gradient = [grad](const Point&) { return grad; };
  sec.level = 0.0;
  sec.orientation = +1;
  return sec;
}

}  // namespace cosymlab
