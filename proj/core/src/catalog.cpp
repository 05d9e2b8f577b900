#include "cosymlab/catalog.hpp"

#include <cmath>

#include "cosymlab/error.hpp"

namespace cosymlab {

namespace {

ScalarField quadratic(Vector weights) {
  // H = sum_i w_i x_i^2 / 2
  ScalarField f;
  f.value = [weights](const Point& p) { return 0.5 * weights.dot(p.coords.cwiseProduct(p.coords)); };
  f.gradient = [weights](const Point& p) { return Vector(weights.cwiseProduct(p.coords)); };
  return f;
}

// sum of dx_{2i} ^ dx_{2i+1}
KForm standard_form(int dim) {
  KForm w = KForm::zero(dim, 2);
  for (int i = 0; i + 1 < dim; i += 2) w = w + KForm::basis(dim, {i, i + 1});
  return w;
}

// sum_i a_i * x_{src_i} dx_{dst_i}
KForm linear_one_form(int dim, std::vector<std::array<int, 2>> terms, double scale = 1.0) {
  Matrix jac = Matrix::Zero(dim, dim);
  for (const auto& [src, dst] : terms) jac(dst, src) += scale;
  return KForm::one_form(dim, [jac](const Point& p) { return Vector(jac * p.coords); },
                         [jac](const Point&) { return jac; });
}

double reduce_angle(double a) {
  const double v = std::fmod(a, kTwoPi);
  return v < 0.0 ? v + kTwoPi : v;
}

}  // namespace

CosymSeed cosym_seed(std::string_view name) {
  if (name == "T3")
    return {{"T3", ChartManifold::torus(3), KForm::basis(3, {2}), KForm::basis(3, {0, 1})}, 2, true};
  if (name == "T3_tilted")
    return {{"T3_tilted", ChartManifold::torus(3), KForm::basis(3, {2}) + KForm::basis(3, {0}, 0.1),
             KForm::basis(3, {0, 1})},
            2,
            true};
  if (name == "T3_irrational")
    return {{"T3_irrational", ChartManifold::torus(3), KForm::basis(3, {0}) + KForm::basis(3, {1}, kSqrt2),
             KForm::basis(3, {1, 2})},
            0,
            true};
  if (name == "T5")
    return {{"T5", ChartManifold::torus(5), KForm::basis(5, {4}),
             KForm::basis(5, {0, 1}) + KForm::basis(5, {2, 3})},
            4,
            true};
  if (name == "T5_degenerate")
    return {{"T5_degenerate", ChartManifold::torus(5), KForm::basis(5, {4}), KForm::basis(5, {0, 1})}, 4, false};
  throw Error(ErrorCode::kInvalidArgument, "unknown cosymplectic seed '" + std::string(name) + "'");
}

const std::vector<std::string>& cosym_seed_names() {
  static const std::vector<std::string> names{"T3", "T3_tilted", "T3_irrational", "T5", "T5_degenerate"};
  return names;
}

HamiltonianSystem harmonic_oscillator() {
  HamiltonianSystem sys{"harmonic", ChartManifold::euclidean(2), KForm::basis(2, {0, 1}),
                        quadratic(Vector::Ones(2)), linear_one_form(2, {{0, 1}}), TopologyFlags{}};
  sys.topology.simply_connected = true;
  return sys;
}

HamiltonianSystem linear_oscillator(double ratio) {
  Vector w(4);
  w << 1.0, 1.0, ratio, ratio;
  HamiltonianSystem sys{"oscillator2", ChartManifold::euclidean(4), standard_form(4), quadratic(w),
                        linear_one_form(4, {{0, 1}, {2, 3}}), TopologyFlags{}};
  sys.topology.simply_connected = true;
  return sys;
}

HamiltonianSystem cotangent_r4() {
  // Coordinates (q1, p1, q2, p2).
  KForm lambda = linear_one_form(4, {{1, 0}, {3, 2}});
  HamiltonianSystem sys{"cotangent_r4", ChartManifold::euclidean(4), exterior_derivative(lambda),
                        quadratic(Vector::Ones(4)), lambda, TopologyFlags{}};
  sys.topology.simply_connected = true;
  sys.topology.cotangent_model = true;
  return sys;
}

HamiltonianSystem pendulum() {
  ScalarField h;
  h.value = [](const Point& p) { return 0.5 * p[1] * p[1] - std::cos(p[0]); };
  h.gradient = [](const Point& p) {
    Vector g(2);
    g << std::sin(p[0]), p[1];
    return g;
  };
  return HamiltonianSystem{"pendulum", ChartManifold::with_mask({true, false}), KForm::basis(2, {0, 1}), h,
                           std::nullopt, TopologyFlags{}};
}

HamiltonianSystem suspension(double rho) {
  ChartManifold m = ChartManifold::with_mask({true, false, true, false}, 1.0);
  ScalarField h;
  h.value = [rho](const Point& p) { return p[3] + rho * p[1]; };
  h.gradient = [rho](const Point&) {
    Vector g(4);
    g << 0.0, rho, 0.0, 1.0;
    return g;
  };
  return HamiltonianSystem{"suspension", m, standard_form(4), h, std::nullopt, TopologyFlags{}};
}

SectionSpec oscillator_section(const HamiltonianSystem& osc, double level) {
  SectionSpec sec;
  sec.theta.value = [](const Point& p) { return reduce_angle(std::atan2(-p[3], p[2])); };
  sec.theta.gradient = [](const Point& p) {
    Vector g = Vector::Zero(4);
    const double r2 = p[2] * p[2] + p[3] * p[3];
    if (r2 > 0.0) {
      g[2] = p[3] / r2;
      g[3] = -p[2] / r2;
    }
    return g;
  };
  const double w = osc.hamiltonian.gradient(Point{0.0, 0.0, 1.0, 0.0})[2];
  const Point reference{0.0, 0.0, std::sqrt(2.0 * level / w), 0.0};
  sec.chart.emplace(osc.manifold, std::vector<int>{0, 1}, std::vector<int>{2, 3},
                    std::vector<LevelConstraint>{{osc.hamiltonian, level, false}, {sec.theta, 0.0, true}},
                    reference);
  return sec;
}

SectionSpec suspension_section(const HamiltonianSystem& susp, double level) {
  SectionSpec sec;
  sec.theta.value = [](const Point& p) { return reduce_angle(kTwoPi * p[2]); };
  sec.theta.gradient = [](const Point&) {
    Vector g = Vector::Zero(4);
    g[2] = kTwoPi;
    return g;
  };
  sec.chart.emplace(susp.manifold, std::vector<int>{0, 1}, std::vector<int>{2, 3},
                    std::vector<LevelConstraint>{{susp.hamiltonian, level, false}, {sec.theta, 0.0, true}},
                    Point{0.0, 0.0, 0.0, level});
  return sec;
}

SectionSpec product_leaf_section(const HamiltonianSystem& product, int leaf_coordinate) {
  const int dim = product.manifold.dim;
  const int n = dim - 1;  // circle coordinate
  if (leaf_coordinate < 0 || leaf_coordinate >= n)
    throw Error(ErrorCode::kInvalidArgument, "leaf coordinate outside the cosymplectic factor");
  const double scale = kTwoPi / product.manifold.periods[static_cast<std::size_t>(leaf_coordinate)];
  SectionSpec sec;
  sec.theta.value = [leaf_coordinate, scale](const Point& p) { return reduce_angle(scale * p[leaf_coordinate]); };
  sec.theta.gradient = [dim, leaf_coordinate, scale](const Point&) {
    Vector g = Vector::Zero(dim);
    g[leaf_coordinate] = scale;
    return g;
  };
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (i != leaf_coordinate) free.push_back(i);
  sec.chart.emplace(product.manifold, free, std::vector<int>{leaf_coordinate, n},
                    std::vector<LevelConstraint>{{sec.theta, 0.0, true}, {product.hamiltonian, 0.0, false}},
                    Point(Vector(Vector::Zero(dim))));
  return sec;
}

GraphEmbedding energy_surface_chart(const HamiltonianSystem& sys, double level, int dependent,
                                    const Point& reference) {
  std::vector<int> free;
  for (int i = 0; i < sys.manifold.dim; ++i)
    if (i != dependent) free.push_back(i);
  return GraphEmbedding(sys.manifold, free, {dependent}, {{sys.hamiltonian, level, false}}, reference);
}

CatalogSystem catalog_system(std::string_view name) {
  auto make = [&](HamiltonianSystem sys, double level) {
    CatalogSystem e{std::string(name), std::move(sys), level, std::nullopt, false, {}, {}, {}, {}};
    const auto d = static_cast<std::size_t>(e.system.manifold.dim);
    e.box_lo.assign(d, -1.0);
    e.box_hi.assign(d, 1.0);
    return e;
  };
  if (name == "harmonic") return make(harmonic_oscillator(), 0.5);
  if (name == "cotangent_r4") return make(cotangent_r4(), 1.0);
  if (name == "pendulum") return make(pendulum(), 0.0);
  if (name == "oscillator2") {
    CatalogSystem e = make(linear_oscillator(), 1.0);
    e.section = oscillator_section(e.system, e.level);
    e.chart_lo = {-0.7, -0.7};
    e.chart_hi = {0.7, 0.7};
    return e;
  }
  if (name == "suspension") {
    CatalogSystem e = make(suspension((std::sqrt(5.0) - 1.0) / 2.0), 0.0);
    e.section = suspension_section(e.system, e.level);
    e.section_global = true;
    e.chart_lo = {0.0, -1.0};
    e.chart_hi = {1.0, 1.0};
    return e;
  }
  if (name.starts_with("product_")) {
    const CosymSeed seed = cosym_seed(name.substr(8));
    CatalogSystem e = make(build_product_system(seed.structure), 0.0);
    e.section = product_leaf_section(e.system, seed.leaf_coordinate);
    e.section_global = true;
    const auto k = static_cast<std::size_t>(seed.structure.manifold.dim - 1);
    e.chart_lo.assign(k, 0.0);
    e.chart_hi.assign(k, kTwoPi);
    return e;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown catalog system '" + std::string(name) + "'");
}

const std::vector<std::string>& catalog_system_names() {
  static const std::vector<std::string> names{"harmonic",   "oscillator2", "cotangent_r4", "pendulum",
                                              "suspension", "product_T3",  "product_T5",   "product_T3_irrational"};
  return names;
}

std::vector<Point> section_samples(const CatalogSystem& entry, SampleRng& rng, std::size_t count) {
  if (!entry.section || !entry.section->chart)
    throw Error(ErrorCode::kInvalidArgument, "catalog system '" + entry.name + "' has no section chart");
  const GraphEmbedding& chart = *entry.section->chart;
  const auto params = sample_box(chart.source_manifold(), rng, count, entry.chart_lo, entry.chart_hi);
  std::vector<Point> out;
  out.reserve(count);
  for (const Point& u : params) out.push_back(entry.system.manifold.reduce(chart.embed(u)));
  return out;
}

std::vector<Point> ambient_samples(const CatalogSystem& entry, SampleRng& rng, std::size_t count) {
  return sample_box(entry.system.manifold, rng, count, entry.box_lo, entry.box_hi);
}

}  // namespace cosymlab
