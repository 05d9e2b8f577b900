#include "cosymlab/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cosymlab/error.hpp"
#include "cosymlab/integrator.hpp"

namespace cosymlab {

ChartManifold ChartManifold::euclidean(int dim) {
  return ChartManifold{dim, std::vector<bool>(static_cast<std::size_t>(dim), false),
                       std::vector<double>(static_cast<std::size_t>(dim), kTwoPi)};
}

ChartManifold ChartManifold::torus(int dim, double period) {
  return ChartManifold{dim, std::vector<bool>(static_cast<std::size_t>(dim), true),
                       std::vector<double>(static_cast<std::size_t>(dim), period)};
}

ChartManifold ChartManifold::with_mask(std::vector<bool> periodic, double period) {
  const int dim = static_cast<int>(periodic.size());
  return ChartManifold{dim, std::move(periodic), std::vector<double>(static_cast<std::size_t>(dim), period)};
}

void ChartManifold::validate() const {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "chart dimension must be >= 1");
  if (periodic.size() != static_cast<std::size_t>(dim) || periods.size() != static_cast<std::size_t>(dim))
    throw Error(ErrorCode::kInvalidArgument, "periodicity mask / periods size != chart dimension");
  for (int i = 0; i < dim; ++i)
    if (periodic[static_cast<std::size_t>(i)] && !(periods[static_cast<std::size_t>(i)] > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "periods must be positive");
}

bool ChartManifold::all_periodic() const {
  return std::all_of(periodic.begin(), periodic.end(), [](bool b) { return b; });
}

Point ChartManifold::reduce(const Point& p) const {
  if (p.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "point dimension != chart dimension");
  Point out = p;
  for (int i = 0; i < dim; ++i) {
    if (!periodic[static_cast<std::size_t>(i)]) continue;
    const double per = periods[static_cast<std::size_t>(i)];
    double v = std::fmod(p.coords[i], per);
    if (v < 0.0) v += per;
    if (v >= per) v = 0.0;
    out.coords[i] = v;
  }
  return out;
}

Vector ChartManifold::difference(const Point& a, const Point& b) const {
  if (a.dim() != dim || b.dim() != dim)
    throw Error(ErrorCode::kDimensionMismatch, "point dimension != chart dimension");
  Vector d = a.coords - b.coords;
  for (int i = 0; i < dim; ++i) {
    if (!periodic[static_cast<std::size_t>(i)]) continue;
    const double per = periods[static_cast<std::size_t>(i)];
    d[i] -= per * std::floor(d[i] / per + 0.5);
  }
  return d;
}

double ChartManifold::distance(const Point& a, const Point& b) const {
  return difference(a, b).cwiseAbs().maxCoeff();
}

ChartManifold product(const ChartManifold& m, const ChartManifold& n) {
  ChartManifold out{m.dim + n.dim, m.periodic, m.periods};
  out.periodic.insert(out.periodic.end(), n.periodic.begin(), n.periodic.end());
  out.periods.insert(out.periods.end(), n.periods.begin(), n.periods.end());
  return out;
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - kPi;
}

ScalarField with_numeric_gradient(std::function<double(const Point&)> f, int dim, double h) {
  ScalarField out;
  out.value = f;
  out.gradient = [f, dim, h](const Point& p) {
    Vector g(dim);
    for (int i = 0; i < dim; ++i) {
      Point a = p, b = p;
      a.coords[i] += h;
      b.coords[i] -= h;
      g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
  };
  return out;
}

SystemCheck check_system(const HamiltonianSystem& sys, std::span<const Point> samples) {
  SystemCheck out;
  // A top-degree form is closed.
  if (sys.omega.degree() < sys.omega.dim())
    out.closedness = max_abs_coefficient(exterior_derivative(sys.omega), samples);
  out.closed = out.closedness < kClosednessTolerance;
  out.min_rcond = std::numeric_limits<double>::infinity();
  for (const auto& p : samples)
    out.min_rcond = std::min(out.min_rcond, reciprocal_condition(two_form_matrix(sys.omega, p)));
  out.nondegenerate = out.min_rcond >= kMinReciprocalCondition;
  if (sys.primitive) {
    out.primitive_residual = max_abs_coefficient(exterior_derivative(*sys.primitive) - sys.omega, samples);
    out.primitive_ok = *out.primitive_residual < kClosednessTolerance;
  }
  return out;
}

double min_gradient_norm(const EnergySurface& z, std::span<const Point> samples) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) best = std::min(best, z.system.hamiltonian.gradient(p).norm());
  return best;
}

// ---------------------------------------------------------------------------

double reciprocal_condition(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rc = lu.rcond();
  return std::isfinite(rc) ? rc : 0.0;
}

Vector solve_interior(const Matrix& omega_matrix, const Vector& covector) {
  if (covector.size() != omega_matrix.rows())
    throw Error(ErrorCode::kDimensionMismatch, "covector dimension != form dimension");
  const Matrix mt = omega_matrix.transpose();
  Eigen::PartialPivLU<Matrix> lu(mt);
  const double rc = lu.rcond();
  if (!(rc >= kMinReciprocalCondition)) {
    std::ostringstream msg;
    msg << "symplectic form is degenerate at this point (reciprocal condition estimate " << rc << ")";
    throw Error(ErrorCode::kSingularForm, msg.str());
  }
  return lu.solve(covector);
}

Vector hamiltonian_field(const HamiltonianSystem& sys, const Point& p) {
  return solve_interior(two_form_matrix(sys.omega, p), sys.hamiltonian.gradient(p));
}

TangentVector hamiltonian_vector_field(const HamiltonianSystem& sys, const Point& p) {
  return TangentVector{p, hamiltonian_field(sys, p)};
}

FlowResult flow(const HamiltonianSystem& sys, const Point& p0, double t, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "flow tolerance must be positive");
  FlowResult out;
  if (t == 0.0) {
    out.end = sys.manifold.reduce(p0);
    out.lifted_end = p0;
    return out;
  }
  Dop853 integrator([&sys](const Vector& y) { return hamiltonian_field(sys, Point(y)); },
                    Dop853::Options{tol, tol});
  integrator.reset(0.0, p0.coords);
  out.lifted_end = Point(integrator.integrate(t));
  out.end = sys.manifold.reduce(out.lifted_end);
  out.energy_error = std::abs(sys.hamiltonian(out.lifted_end) - sys.hamiltonian(p0));
  out.steps = integrator.accepted_steps();
  return out;
}

double energy_drift(const HamiltonianSystem& sys, const Point& p0, double t_max, int samples, double tol) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "energy_drift needs t_max > 0");
  if (samples < 1) throw Error(ErrorCode::kInvalidArgument, "energy_drift needs at least one sample");
  Dop853 integrator([&sys](const Vector& y) { return hamiltonian_field(sys, Point(y)); },
                    Dop853::Options{tol, tol});
  integrator.reset(0.0, p0.coords);
  const double h0 = sys.hamiltonian(p0);
  double worst = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const double tk = t_max * static_cast<double>(k) / static_cast<double>(samples);
    worst = std::max(worst, std::abs(sys.hamiltonian(Point(integrator.integrate(tk))) - h0));
  }
  return worst;
}

double divergence_check(const HamiltonianSystem& sys, const Point& p, double h) {
  double div = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    Point a = p, b = p;
    a.coords[i] += h;
    b.coords[i] -= h;
    div += (hamiltonian_field(sys, a)[i] - hamiltonian_field(sys, b)[i]) / (2.0 * h);
  }
  return div;
}

Point implicit_midpoint_flow(const HamiltonianSystem& sys, const Point& p0, double t, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "implicit midpoint step must be positive");
  if (t == 0.0) return sys.manifold.reduce(p0);
  const auto steps = static_cast<long>(std::ceil(std::abs(t) / h));
  const double dt = t / static_cast<double>(steps);
  Vector y = p0.coords;
  for (long s = 0; s < steps; ++s) {
    Vector y1 = y + dt * hamiltonian_field(sys, Point(y));
    for (int it = 0; it < 100; ++it) {
      const Vector next = y + dt * hamiltonian_field(sys, Point(Vector(0.5 * (y + y1))));
      const double change = (next - y1).cwiseAbs().maxCoeff();
      y1 = next;
      if (change <= 1e-15 * (1.0 + y1.cwiseAbs().maxCoeff())) break;
    }
    y = y1;
  }
  return sys.manifold.reduce(Point(y));
}

// ---------------------------------------------------------------------------

GraphEmbedding::GraphEmbedding(ChartManifold ambient, std::vector<int> free, std::vector<int> dependent,
                               std::vector<LevelConstraint> constraints, Point reference)
    : ambient_(std::move(ambient)),
      free_(std::move(free)),
      dependent_(std::move(dependent)),
      constraints_(std::move(constraints)),
      reference_(std::move(reference)) {
  ambient_.validate();
  if (dependent_.size() != constraints_.size())
    throw Error(ErrorCode::kInvalidArgument, "graph chart needs one dependent coordinate per constraint");
  if (static_cast<int>(free_.size() + dependent_.size()) != ambient_.dim)
    throw Error(ErrorCode::kDimensionMismatch, "free + dependent coordinates must cover the chart");
  std::vector<int> all = free_;
  all.insert(all.end(), dependent_.begin(), dependent_.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < ambient_.dim; ++i)
    if (all[static_cast<std::size_t>(i)] != i)
      throw Error(ErrorCode::kInvalidArgument, "graph chart coordinates must partition the chart");
  if (reference_.dim() != ambient_.dim)
    throw Error(ErrorCode::kDimensionMismatch, "reference point dimension != chart dimension");
}

ChartManifold GraphEmbedding::source_manifold() const {
  ChartManifold out;
  out.dim = source_dim();
  for (int i : free_) {
    out.periodic.push_back(ambient_.periodic[static_cast<std::size_t>(i)]);
    out.periods.push_back(ambient_.periods[static_cast<std::size_t>(i)]);
  }
  return out;
}

Point GraphEmbedding::embed(const Point& u) const { return embed(u, reference_); }

Point GraphEmbedding::embed(const Point& u, const Point& guess) const {
  if (u.dim() != source_dim()) throw Error(ErrorCode::kDimensionMismatch, "chart coordinates have wrong dimension");
  Point p = guess;
  for (std::size_t i = 0; i < free_.size(); ++i) p.coords[free_[i]] = u.coords[static_cast<Eigen::Index>(i)];
  return correct(p);
}

Point GraphEmbedding::correct(const Point& start) const {
  const auto m = static_cast<Eigen::Index>(dependent_.size());
  Point p = start;
  if (m == 0) return p;
  Vector r(m);
  Matrix a(m, m);
  for (int it = 0; it < 60; ++it) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& c = constraints_[static_cast<std::size_t>(j)];
      double res = c.field(p) - c.target;
      if (c.circle_valued) res = wrap_angle(res);
      r[j] = res;
      const Vector g = c.field.gradient(p);
      for (Eigen::Index k = 0; k < m; ++k) a(j, k) = g[dependent_[static_cast<std::size_t>(k)]];
    }
    if (r.cwiseAbs().maxCoeff() <= 1e-14) return p;
    Eigen::PartialPivLU<Matrix> lu(a);
    if (!(lu.rcond() > 1e-14))
      throw Error(ErrorCode::kDegenerateInput, "graph chart: constraints are singular in the dependent coordinates");
    const Vector delta = lu.solve(r);
    for (Eigen::Index k = 0; k < m; ++k) p.coords[dependent_[static_cast<std::size_t>(k)]] -= delta[k];
    if (delta.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + p.coords.cwiseAbs().maxCoeff())) return p;
  }
  if (r.cwiseAbs().maxCoeff() <= 1e-11) return p;
  throw Error(ErrorCode::kDegenerateInput, "graph chart: Newton projection did not converge");
}

Point GraphEmbedding::project(const Point& p) const {
  if (p.dim() != ambient_.dim) throw Error(ErrorCode::kDimensionMismatch, "point dimension != chart dimension");
  Vector u(source_dim());
  for (std::size_t i = 0; i < free_.size(); ++i) u[static_cast<Eigen::Index>(i)] = p.coords[free_[i]];
  return Point(u);
}

Matrix GraphEmbedding::jacobian(const Point& u) const {
  const Point p = embed(u);
  const auto m = static_cast<Eigen::Index>(dependent_.size());
  const auto k = static_cast<Eigen::Index>(free_.size());
  Matrix out = Matrix::Zero(ambient_.dim, k);
  for (Eigen::Index i = 0; i < k; ++i) out(free_[static_cast<std::size_t>(i)], i) = 1.0;
  if (m == 0) return out;
  Matrix a(m, m), b(m, k);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector g = constraints_[static_cast<std::size_t>(j)].field.gradient(p);
    for (Eigen::Index c = 0; c < m; ++c) a(j, c) = g[dependent_[static_cast<std::size_t>(c)]];
    for (Eigen::Index c = 0; c < k; ++c) b(j, c) = g[free_[static_cast<std::size_t>(c)]];
  }
  const Matrix dep = -a.partialPivLu().solve(b);
  for (Eigen::Index j = 0; j < m; ++j) out.row(dependent_[static_cast<std::size_t>(j)]) = dep.row(j);
  return out;
}

ChartMap GraphEmbedding::as_map() const {
  auto self = std::make_shared<const GraphEmbedding>(*this);
  return ChartMap{source_dim(), ambient_.dim, [self](const Point& u) { return self->embed(u); },
                  [self](const Point& u) { return self->jacobian(u); }};
}

ChartMap GraphEmbedding::projection_map() const {
  auto self = std::make_shared<const GraphEmbedding>(*this);
  Matrix sel = Matrix::Zero(source_dim(), ambient_.dim);
  for (std::size_t i = 0; i < free_.size(); ++i) sel(static_cast<Eigen::Index>(i), free_[i]) = 1.0;
  return ChartMap{ambient_.dim, source_dim(), [self](const Point& p) { return self->project(p); },
                  [sel](const Point&) { return sel; }};
}

// ---------------------------------------------------------------------------

double SampleRng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::vector<Point> sample_box(const ChartManifold& m, SampleRng& rng, std::size_t count,
                              const std::vector<double>& lo, const std::vector<double>& hi) {
  if (lo.size() != static_cast<std::size_t>(m.dim) || hi.size() != static_cast<std::size_t>(m.dim))
    throw Error(ErrorCode::kDimensionMismatch, "sample box bounds have wrong dimension");
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Vector c(m.dim);
    for (int i = 0; i < m.dim; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      c[i] = m.periodic[ui] ? rng.uniform(0.0, m.periods[ui]) : rng.uniform(lo[ui], hi[ui]);
    }
    out.emplace_back(std::move(c));
  }
  return out;
}

}  // namespace cosymlab
