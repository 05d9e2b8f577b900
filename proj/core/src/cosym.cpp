#include "cosymlab/cosym.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "cosymlab/error.hpp"
#include "cosymlab/section.hpp"

namespace cosymlab {

namespace {

std::vector<Point> default_samples(const ChartManifold& m, std::size_t count = 16) {
  SampleRng rng(0);
  return sample_box(m, rng, count, std::vector<double>(static_cast<std::size_t>(m.dim), -1.0),
                    std::vector<double>(static_cast<std::size_t>(m.dim), 1.0));
}

// Projection of N x (extra coordinate) onto N.
ChartMap drop_last(int n) {
  Matrix sel = Matrix::Zero(n, n + 1);
  sel.leftCols(n).setIdentity();
  return ChartMap{n + 1, n, [n](const Point& p) { return Point(Vector(p.coords.head(n))); },
                  [sel](const Point&) { return sel; }};
}

// pr^*beta + pr^*alpha ^ dt with t the last coordinate.
KForm split_form(const CosymplecticStructure& cs) {
  const int n = cs.manifold.dim;
  const ChartMap pr = drop_last(n);
  return pullback(pr, cs.beta) + wedge(pullback(pr, cs.alpha), KForm::basis(n + 1, {n}));
}

}  // namespace

CosymReport verify_cosymplectic(const CosymplecticStructure& cs, std::span<const Point> samples) {
  const int dim = cs.manifold.dim;
  if (dim % 2 == 0)
    throw Error(ErrorCode::kDimensionMismatch, "cosymplectic structures live on odd-dimensional manifolds");
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "verify_cosymplectic needs samples");
  if (cs.alpha.dim() != dim || cs.beta.dim() != dim || cs.alpha.degree() != 1 || cs.beta.degree() != 2)
    throw Error(ErrorCode::kDimensionMismatch, "alpha must be a 1-form and beta a 2-form on the manifold");

  CosymReport rep;
  rep.samples = samples.size();
  rep.alpha_closedness = max_abs_coefficient(exterior_derivative(cs.alpha), samples);
  rep.beta_closedness = max_abs_coefficient(exterior_derivative(cs.beta), samples);
  rep.closed = rep.alpha_closedness < kClosednessTolerance && rep.beta_closedness < kClosednessTolerance;

  const KForm vol = wedge(cs.alpha, power(cs.beta, (dim - 1) / 2));
  rep.volume_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = std::abs(vol.coefficients(samples[i])[0]);
    if (v < rep.volume_margin) {
      rep.volume_margin = v;
      rep.worst_sample = i;
    }
  }
  rep.volume = rep.volume_margin > kVolumeMargin;
  return rep;
}

CosymplecticStructure field_to_cosym(const HamiltonianSystem& sys, const EnergySurface& z, const VectorField& x,
                                     const GraphEmbedding& chart, std::span<const Point> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "field_to_cosym needs samples");
  if (chart.ambient_dim() != sys.manifold.dim)
    throw Error(ErrorCode::kDimensionMismatch, "energy surface chart does not match the system");
  for (const Point& p : samples) {
    const double rate = z.system.hamiltonian.gradient(p).dot(x(p));
    if (std::abs(rate) < kTangencyThreshold) {
      std::ostringstream msg;
      msg << "field is tangent to the energy surface: |dH(X)| = " << std::abs(rate);
      throw Error(ErrorCode::kTangency, msg.str());
    }
  }
  const KForm contracted = interior(x, sys.omega);
  const double residual = max_abs_coefficient(exterior_derivative(contracted), samples);
  if (!(residual < kSymplecticResidualTolerance)) {
    std::ostringstream msg;
    msg << "field is not symplectic: max |d(iota_X omega)| = " << residual;
    throw Error(ErrorCode::kNotSymplectic, msg.str());
  }

  const ChartMap embed = chart.as_map();
  CosymplecticStructure cs{"induced", chart.source_manifold(), pullback(embed, contracted),
                           pullback(embed, sys.omega)};
  std::vector<Point> chart_samples;
  for (const Point& p : samples) chart_samples.push_back(chart.project(p));
  const CosymReport rep = verify_cosymplectic(cs, chart_samples);
  if (!rep.pass()) {
    std::ostringstream msg;
    msg << "induced pair is not cosymplectic (volume margin " << rep.volume_margin << ", closedness "
        << std::max(rep.alpha_closedness, rep.beta_closedness) << ")";
    throw Error(ErrorCode::kVerificationFailed, msg.str());
  }
  return cs;
}

TransverseFieldReport cosym_to_field(const HamiltonianSystem& sys, const EnergySurface& z,
                                     const CosymplecticStructure& cs, const GraphEmbedding& chart,
                                     std::span<const Point> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "cosym_to_field needs samples");
  const KForm extended = pullback(chart.projection_map(), cs.alpha);
  if (max_abs_coefficient(extended, samples) < 1e-12)
    throw Error(ErrorCode::kDegenerateInput, "alpha vanishes: not a cosymplectic one-form");

  const KForm omega = sys.omega;
  TransverseFieldReport rep;
  rep.field_fn = [omega, extended](const Point& p) {
    return solve_interior(two_form_matrix(omega, p), extended.coefficients(p));
  };
  rep.min_transversality = std::numeric_limits<double>::infinity();
  for (const Point& p : samples) {
    Vector v = rep.field_fn(p);
    rep.min_transversality = std::min(rep.min_transversality, std::abs(z.system.hamiltonian.gradient(p).dot(v)));
    rep.samples.push_back(p);
    rep.field.push_back(std::move(v));
  }
  rep.symplectic_residual = max_abs_coefficient(exterior_derivative(interior(rep.field_fn, omega)), samples);
  return rep;
}

SubmanifoldReport symplectic_submanifold_test(const HamiltonianSystem& sys, const ChartMap& patch,
                                              std::span<const Point> samples, double threshold) {
  if (patch.source_dim % 2 != 0)
    throw Error(ErrorCode::kDimensionMismatch, "symplectic submanifolds have even dimension");
  if (patch.target_dim != sys.manifold.dim)
    throw Error(ErrorCode::kDimensionMismatch, "patch target does not match the system");
  SubmanifoldReport rep;
  rep.samples = samples.size();
  rep.threshold = threshold;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix e = patch.jacobian(samples[i]);
    const Matrix restricted = e.transpose() * two_form_matrix(sys.omega, patch.map(samples[i])) * e;
    const double det = std::abs(restricted.determinant());
    if (det < rep.min_abs_det) {
      rep.min_abs_det = det;
      rep.worst_sample = i;
    }
  }
  if (samples.empty()) rep.min_abs_det = 0.0;
  return rep;
}

HamiltonianSystem build_product_system(const CosymplecticStructure& cs) {
  const int n = cs.manifold.dim;
  if (n < 3)
    throw Error(ErrorCode::kInvalidArgument,
                "product construction needs a cosymplectic manifold of dimension >= 3");
  const auto samples = default_samples(cs.manifold);
  const CosymReport rep = verify_cosymplectic(cs, samples);
  if (!rep.pass()) {
    std::ostringstream msg;
    msg << "seed '" << cs.name << "' is not cosymplectic (volume margin " << rep.volume_margin << ")";
    throw Error(ErrorCode::kVerificationFailed, msg.str());
  }

  HamiltonianSystem sys{"product:" + cs.name, product(cs.manifold, ChartManifold::torus(1)), split_form(cs),
                        ScalarField{}, std::nullopt, TopologyFlags{}};
  sys.hamiltonian.value = [n](const Point& p) { return std::sin(p[n]); };
  sys.hamiltonian.gradient = [n](const Point& p) {
    Vector g = Vector::Zero(n + 1);
    g[n] = std::cos(p[n]);
    return g;
  };
  sys.topology.compact = cs.manifold.all_periodic();
  return sys;
}

CollarForm build_collar_form(const CosymplecticStructure& cs) {
  const int n = cs.manifold.dim;
  const auto base_samples = default_samples(cs.manifold);
  const CosymReport rep = verify_cosymplectic(cs, base_samples);
  if (!rep.pass()) throw Error(ErrorCode::kVerificationFailed, "collar form needs a verified cosymplectic pair");

  double min_period = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (cs.manifold.periodic[static_cast<std::size_t>(i)])
      min_period = std::min(min_period, cs.manifold.periods[static_cast<std::size_t>(i)]);
  if (!std::isfinite(min_period)) min_period = kTwoPi;

  CollarForm out{product(cs.manifold, ChartManifold::euclidean(1)), split_form(cs), 0.1 * min_period};

  SampleRng rng(1);
  std::vector<double> lo(static_cast<std::size_t>(n + 1), -1.0), hi(static_cast<std::size_t>(n + 1), 1.0);
  lo.back() = -0.99 * out.epsilon;
  hi.back() = 0.99 * out.epsilon;
  const auto samples = sample_box(out.manifold, rng, 16, lo, hi);
  const double closedness = max_abs_coefficient(exterior_derivative(out.omega), samples);
  double rcond = std::numeric_limits<double>::infinity();
  for (const Point& p : samples) rcond = std::min(rcond, reciprocal_condition(two_form_matrix(out.omega, p)));
  if (!(closedness < kClosednessTolerance) || rcond < kMinReciprocalCondition)
    throw Error(ErrorCode::kVerificationFailed, "collar form is not symplectic at sampled collar points");
  return out;
}

namespace {

double line_integral(const KForm& a, const Vector& from, const Vector& delta) {
  auto integrand = [&](double s) { return a.coefficients(Point(Vector(from + s * delta))).dot(delta); };
  return boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, 1.0);
}

}  // namespace

HamiltonianExtension extend_to_hamiltonian_field(const HamiltonianSystem& sys, const VectorField& x,
                                                 const Point& base, std::span<const Point> samples, double tol) {
  const int dim = sys.manifold.dim;
  if (base.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "base point dimension != system dimension");
  const KForm a = interior(x, sys.omega);
  HamiltonianExtension out;
  out.simply_connected_flag = sys.topology.simply_connected;

  for (int i = 0; i < dim; ++i) {
    if (!sys.manifold.periodic[static_cast<std::size_t>(i)]) continue;
    Vector delta = Vector::Zero(dim);
    delta[i] = sys.manifold.periods[static_cast<std::size_t>(i)];
    const double loop = std::abs(line_integral(a, base.coords, delta));
    out.max_loop_period = std::max(out.max_loop_period, loop);
    if (loop > tol) {
      std::ostringstream msg;
      msg << "iota_X omega has period " << loop << " around generator " << i
          << ": not exact, no global Hamiltonian";
      throw Error(ErrorCode::kPathDependence, msg.str());
    }
  }

  for (const Point& p : samples) {
    const Vector delta = p.coords - base.coords;
    Vector corner = base.coords;
    for (int i = 0; i < dim / 2; ++i) corner[i] = p.coords[i];
    const double straight = line_integral(a, base.coords, delta);
    const double legs = line_integral(a, base.coords, corner - base.coords) + line_integral(a, corner, p.coords - corner);
    const double dep = std::abs(straight - legs);
    out.max_path_dependence = std::max(out.max_path_dependence, dep);
    if (dep > tol) {
      std::ostringstream msg;
      msg << "primitive of iota_X omega is path dependent (" << dep << ")";
      throw Error(ErrorCode::kPathDependence, msg.str());
    }
  }

  const Vector b = base.coords;
  out.hamiltonian.value = [a, b](const Point& p) { return line_integral(a, b, p.coords - b); };
  out.hamiltonian.gradient = [a](const Point& p) { return a.coefficients(p); };

  constexpr double h = 1e-5;
  for (const Point& p : samples) {
    const Vector target = a.coefficients(p);
    for (int i = 0; i < dim; ++i) {
      Point pp = p, pm = p;
      pp.coords[i] += h;
      pm.coords[i] -= h;
      const double g = (out.hamiltonian.value(pp) - out.hamiltonian.value(pm)) / (2.0 * h);
      out.gradient_residual = std::max(out.gradient_residual, std::abs(g - target[i]));
    }
  }
  return out;
}

}  // namespace cosymlab
