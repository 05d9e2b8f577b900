#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

#include "cosymlab/catalog.hpp"
#include "cosymlab/cosym.hpp"
#include "cosymlab/error.hpp"
#include "cosymlab/obstruct.hpp"
#include "cosymlab/section.hpp"
#include "cosymlab/tischler.hpp"
#include "svg.hpp"

namespace cosymlab::cli {

namespace {

using Clock = std::chrono::steady_clock;

class Report {
 public:
  void check(const std::string& name, bool pass, double value, double threshold, const std::string& detail = "") {
    json c{{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}};
    if (!detail.empty()) c["detail"] = detail;
    checks_.push_back(std::move(c));
    pass_ = pass_ && pass;
  }

  void fail(const std::string& name, const std::string& detail) {
    checks_.push_back({{"name", name}, {"pass", false}, {"detail", detail}});
    pass_ = false;
  }

  // Runs `body` as a timed stage; numerical errors fail the stage's check.
  void stage(const std::string& name, const std::function<void()>& body) {
    const auto t0 = Clock::now();
    try {
      body();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDataError || e.code() == ErrorCode::kMalformedProfile) throw;
      fail(name, std::string(to_string(e.code())) + ": " + e.what());
    }
    timing_[name] = std::chrono::duration<double>(Clock::now() - t0).count();
  }

  bool pass() const { return pass_; }
  json& results() { return results_; }
  void artifact(const std::string& file) { artifacts_.push_back(file); }

  json to_json(const std::string& command, const json& config, std::uint64_t seed, double total) const {
    json timing(timing_);
    timing["total_seconds"] = total;
    return json{{"command", command}, {"config", config},   {"seed", seed},     {"checks", checks_},
                {"results", results_}, {"artifacts", artifacts_}, {"pass", pass_}, {"timing", timing}};
  }

 private:
  json checks_ = json::array();
  json results_ = json::object();
  std::vector<std::string> artifacts_;
  std::map<std::string, double> timing_;
  bool pass_ = true;
};

struct Context {
  json cfg;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Points of the product's energy surface {theta = 0}.
std::vector<Point> leaf_samples(const CatalogSystem& e, SampleRng& rng, std::size_t count) {
  auto pts = ambient_samples(e, rng, count);
  for (auto& p : pts) p.coords[p.dim() - 1] = 0.0;
  return pts;
}

struct OrbitData {
  std::vector<CrossingRow> rows;
  std::vector<ScatterSeries> series;
  double max_energy_error = 0.0;
  double max_residual = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
};

OrbitData iterate_orbits(const CatalogSystem& e, std::span<const Point> starts, int iterates, double t_max,
                         double tol) {
  const GraphEmbedding& chart = *e.section->chart;
  OrbitData d;
  for (std::size_t o = 0; o < starts.size(); ++o) {
    const auto recs = iterate_return_map(e.system, *e.section, starts[o], iterates, t_max, tol);
    ScatterSeries s{"orbit " + std::to_string(o), {}};
    double t = 0.0;
    for (const auto& r : recs) {
      t += r.return_time;
      const Point u = chart.project(r.image);
      d.rows.push_back({static_cast<int>(o), t, u.coords, r.transversality_margin});
      if (u.dim() >= 2) s.points.push_back({u[0], u[1]});
      d.max_energy_error = std::max(d.max_energy_error, std::abs(e.system.hamiltonian(r.image) - e.level));
      d.max_residual = std::max(d.max_residual, std::abs(section_residual(*e.section, r.image)));
      d.min_margin = std::min(d.min_margin, r.transversality_margin);
    }
    d.series.push_back(std::move(s));
  }
  return d;
}

void write_orbit_files(const Context& ctx, Report& rep, const OrbitData& d, const std::string& title) {
  {
    std::ofstream csv(ctx.out / "crossings.csv");
    write_crossings_csv(csv, d.rows);
  }
  rep.artifact("crossings.csv");
  {
    std::ofstream svg(ctx.out / "plot.svg");
    write_scatter_svg(svg, d.series, title, "section coordinate 0", "section coordinate 1");
  }
  rep.artifact("plot.svg");
}

// Return-map symplecticity over chart samples; det for 2-dimensional sections.
void symplecticity_checks(Report& rep, const CatalogSystem& e, std::span<const Point> pts, double fd_step,
                          double tol) {
  double det_err = 0.0, form_err = 0.0;
  for (const Point& p : pts) {
    const auto sc = return_map_symplecticity(e.system, *e.section, p, fd_step, tol);
    det_err = std::max(det_err, std::abs(sc.det - 1.0));
    form_err = std::max(form_err, sc.form_residual);
  }
  rep.results()["symplecticity"] = {{"samples", pts.size()}, {"max_det_error", det_err},
                                    {"max_form_residual", form_err}};
  if (e.section->chart->source_dim() == 2) rep.check("return_map_det", det_err < 1e-6, det_err, 1e-6);
  else rep.check("return_map_form", form_err < 1e-5, form_err, 1e-5);
}

// ---------------------------------------------------------------------------

void demo_product(const Context& ctx, Report& rep) {
  const CosymSeed seed = resolve_seed(ctx.cfg);
  const std::size_t samples = get_count(ctx.cfg, "samples", 1000);
  const std::size_t jac_samples = get_count(ctx.cfg, "jacobian_samples", 20);
  const std::size_t grid = get_count(ctx.cfg, "grid", 16);
  const std::size_t orbits = get_count(ctx.cfg, "orbits", 4);
  const auto iterates = static_cast<int>(get_count(ctx.cfg, "iterates", 25));
  const double tol = get_tolerance(ctx.cfg, "tolerance", 1e-10);
  const double jac_tol = get_tolerance(ctx.cfg, "jacobian_tolerance", 1e-12);
  const double fd_step = get_tolerance(ctx.cfg, "fd_step", 1e-4);
  const double t_max = get_tolerance(ctx.cfg, "t_max", kDefaultTMax);

  rep.results()["seed"] = seed.structure.name;
  SampleRng rng(ctx.seed);

  rep.stage("cosymplectic_seed", [&] {
    const auto pts = sample_box(seed.structure.manifold, rng, 64, std::vector<double>(seed.structure.manifold.dim, -1.0),
                                std::vector<double>(seed.structure.manifold.dim, 1.0));
    const CosymReport cr = verify_cosymplectic(seed.structure, pts);
    rep.results()["cosymplectic"] = {{"alpha_closedness", cr.alpha_closedness},
                                     {"beta_closedness", cr.beta_closedness},
                                     {"volume_margin", cr.volume_margin}};
    rep.check("cosymplectic_seed", cr.pass(), cr.volume_margin, kVolumeMargin);
  });
  if (!rep.pass()) return;

  std::optional<CatalogSystem> entry;
  rep.stage("product_system", [&] {
    entry = catalog_system("product_" + seed.structure.name);
    const auto pts = ambient_samples(*entry, rng, 64);
    const SystemCheck sc = check_system(entry->system, pts);
    rep.results()["system"] = {{"name", entry->system.name},
                               {"dimension", entry->system.manifold.dim},
                               {"closedness", sc.closedness},
                               {"min_rcond", sc.min_rcond}};
    rep.check("omega_closed", sc.closed, sc.closedness, kClosednessTolerance);
    rep.check("omega_nondegenerate", sc.nondegenerate, sc.min_rcond, kMinReciprocalCondition);
  });
  if (!entry) return;
  const CatalogSystem& e = *entry;
  const double expected_t = e.system.manifold.periods[static_cast<std::size_t>(seed.leaf_coordinate)];

  rep.stage("verify_global", [&] {
    const auto pts = leaf_samples(e, rng, samples);
    const GlobalityReport g = verify_global(e.system, *e.section, pts, t_max, tol);
    rep.results()["globality"] = {{"samples", g.samples},           {"passed", g.passed},
                                  {"failures", g.failures.size()},  {"min_margin", g.min_margin},
                                  {"max_return_time", g.max_return_time}, {"min_return_time", g.min_return_time}};
    rep.check("verify_global", g.pass(), static_cast<double>(g.passed), static_cast<double>(g.samples),
              g.failures.empty() ? "" : g.failures.front().reason);
    const double dt = std::abs(g.max_return_time - expected_t);
    rep.check("max_return_time", dt < 1e-6, dt, 1e-6);
  });

  rep.stage("return_map_identity", [&] {
    const auto pts = section_samples(e, rng, samples);
    double worst = 0.0;
    for (const Point& p : pts)
      worst = std::max(worst, e.system.manifold.distance(first_return(e.system, *e.section, p, t_max, tol).image, p));
    rep.results()["return_map_identity"] = {{"samples", pts.size()}, {"max_distance", worst}};
    rep.check("return_map_identity", worst < 1e-8, worst, 1e-8);
  });

  rep.stage("symplecticity", [&] {
    const auto pts = section_samples(e, rng, jac_samples);
    symplecticity_checks(rep, e, pts, fd_step, jac_tol);
  });

  rep.stage("symplectic_submanifold", [&] {
    const auto params = sample_box(e.section->chart->source_manifold(), rng, jac_samples, e.chart_lo, e.chart_hi);
    const SubmanifoldReport sr = symplectic_submanifold_test(e.system, e.section->chart->as_map(), params, 0.5);
    rep.results()["symplectic_submanifold"] = {{"samples", sr.samples}, {"min_abs_det", sr.min_abs_det}};
    rep.check("symplectic_submanifold", sr.pass(), sr.min_abs_det, 0.5);
  });

  rep.stage("mapping_torus", [&] {
    const auto pts = section_samples(e, rng, grid);
    const MappingTorusChart mt = mapping_torus_chart(e.system, *e.section, pts, 5, t_max, tol);
    rep.results()["mapping_torus"] = {{"grid", pts.size()},
                                      {"gluing_residual", mt.gluing_residual},
                                      {"max_energy_error", mt.max_energy_error}};
    rep.check("mapping_torus_gluing", mt.gluing_residual <= 10.0 * tol, mt.gluing_residual, 10.0 * tol);
    rep.check("mapping_torus_energy", mt.energy_ok, mt.max_energy_error, 1e-8);
  });

  rep.stage("crossings", [&] {
    const auto starts = section_samples(e, rng, orbits);
    const OrbitData d = iterate_orbits(e, starts, iterates, t_max, tol);
    rep.results()["crossings"] = {{"orbits", orbits}, {"iterates", iterates}, {"rows", d.rows.size()}};
    write_orbit_files(ctx, rep, d, "return map iterates, " + e.system.name);
  });
}

void verify_cosym(const Context& ctx, Report& rep) {
  const CosymSeed seed = resolve_seed(ctx.cfg);
  const std::size_t samples = get_count(ctx.cfg, "samples", 64);
  const CosymplecticStructure& cs = seed.structure;
  const int n = cs.manifold.dim;
  SampleRng rng(ctx.seed);
  rep.results()["seed"] = cs.name;

  rep.stage("cosymplectic", [&] {
    const auto pts = sample_box(cs.manifold, rng, samples, std::vector<double>(n, -1.0), std::vector<double>(n, 1.0));
    const CosymReport cr = verify_cosymplectic(cs, pts);
    rep.results()["cosymplectic"] = {{"samples", cr.samples},
                                     {"alpha_closedness", cr.alpha_closedness},
                                     {"beta_closedness", cr.beta_closedness},
                                     {"volume_margin", cr.volume_margin},
                                     {"worst_sample", cr.worst_sample}};
    rep.check("closed", cr.closed, std::max(cr.alpha_closedness, cr.beta_closedness), kClosednessTolerance);
    rep.check("volume_form", cr.volume, cr.volume_margin, kVolumeMargin);
  });
  if (!rep.pass()) return;

  rep.stage("collar_form", [&] {
    const CollarForm collar = build_collar_form(cs);
    Matrix incl = Matrix::Zero(n + 1, n);
    incl.topRows(n).setIdentity();
    const ChartMap at_zero{n, n + 1, [n](const Point& p) {
                             Vector v = Vector::Zero(n + 1);
                             v.head(n) = p.coords;
                             return Point(std::move(v));
                           },
                           [incl](const Point&) { return incl; }};
    const KForm restricted = pullback(at_zero, collar.omega);
    VectorField dt = [n](const Point&) {
      Vector v = Vector::Zero(n + 1);
      v[n] = 1.0;
      return v;
    };
    const KForm contracted = pullback(at_zero, interior(dt, collar.omega));
    const auto pts = sample_box(cs.manifold, rng, samples, std::vector<double>(n, -1.0), std::vector<double>(n, 1.0));
    double beta_err = 0.0, alpha_err = 0.0;
    for (const Point& p : pts) {
      beta_err = std::max(beta_err, (restricted.coefficients(p) - cs.beta.coefficients(p)).cwiseAbs().maxCoeff());
      // beta + alpha ^ dt contracts with the normal direction to -alpha.
      alpha_err = std::max(alpha_err, (contracted.coefficients(p) + cs.alpha.coefficients(p)).cwiseAbs().maxCoeff());
    }
    rep.results()["collar"] = {{"epsilon", collar.epsilon}, {"beta_error", beta_err}, {"alpha_error", alpha_err}};
    rep.check("collar_restricts_to_beta", beta_err == 0.0, beta_err, 0.0);
    rep.check("collar_normal_contraction", alpha_err == 0.0, alpha_err, 0.0);
  });

  rep.stage("round_trip", [&] {
    const HamiltonianSystem sys = build_product_system(cs);
    const EnergySurface z{sys, 0.0};
    const GraphEmbedding chart = energy_surface_chart(sys, 0.0, n, Point(Vector(Vector::Zero(n + 1))));
    auto pts = sample_box(sys.manifold, rng, samples, std::vector<double>(n + 1, -1.0), std::vector<double>(n + 1, 1.0));
    for (auto& p : pts) p.coords[n] = 0.0;
    const TransverseFieldReport tf = cosym_to_field(sys, z, cs, chart, pts);
    const CosymplecticStructure back = field_to_cosym(sys, z, tf.field_fn, chart, pts);
    const TransverseFieldReport again = cosym_to_field(sys, z, back, chart, pts);
    double form_err = 0.0, field_err = 0.0, normal_err = 0.0;
    Vector minus_dtheta = Vector::Zero(n + 1);
    minus_dtheta[n] = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      normal_err = std::max(normal_err, (tf.field[i] - minus_dtheta).cwiseAbs().maxCoeff());
      const Point u = chart.project(pts[i]);
      form_err = std::max(form_err, (back.alpha.coefficients(u) - cs.alpha.coefficients(u)).cwiseAbs().maxCoeff());
      form_err = std::max(form_err, (back.beta.coefficients(u) - cs.beta.coefficients(u)).cwiseAbs().maxCoeff());
      field_err = std::max(field_err, (again.field[i] - tf.field[i]).cwiseAbs().maxCoeff());
    }
    rep.results()["round_trip"] = {{"min_transversality", tf.min_transversality},
                                   {"symplectic_residual", tf.symplectic_residual},
                                   {"form_error", form_err},
                                   {"field_error", field_err},
                                   {"normal_field_error", normal_err}};
    rep.check("transverse_field", tf.pass(), tf.min_transversality, kTangencyThreshold);
    rep.check("field_is_minus_dtheta", normal_err < 1e-8, normal_err, 1e-8);
    rep.check("round_trip_forms", form_err < 1e-8, form_err, 1e-8);
    rep.check("round_trip_field", field_err < 1e-8, field_err, 1e-8);
  });
}

void tischler(const Context& ctx, Report& rep) {
  const double eps = get_tolerance(ctx.cfg, "eps", 1e-2);
  const double cap = get_double(ctx.cfg, "d_cap", static_cast<double>(kDefaultDenominatorCap));
  if (!(cap >= 1.0)) throw ConfigError("'d_cap' must be >= 1");
  const std::size_t samples = get_count(ctx.cfg, "samples", 200);
  const double t_max = get_tolerance(ctx.cfg, "t_max", kDefaultTMax);
  SampleRng rng(ctx.seed);

  std::optional<CosymSeed> seed;
  PeriodVector pv;
  ChartManifold torus;
  std::optional<KForm> alpha;
  if (ctx.cfg.contains("cosym_seed")) {
    seed = resolve_seed(ctx.cfg);
    torus = seed->structure.manifold;
    alpha = seed->structure.alpha;
  } else if (ctx.cfg.contains("periods")) {
    const auto& pj = ctx.cfg["periods"];
    if (!pj.is_array() || pj.empty()) throw ConfigError("'periods' must be a non-empty array of numbers");
    Vector c(static_cast<Eigen::Index>(pj.size()));
    for (std::size_t i = 0; i < pj.size(); ++i) {
      if (!pj[i].is_number()) throw ConfigError("'periods' must be a non-empty array of numbers");
      c[static_cast<Eigen::Index>(i)] = pj[i].get<double>();
    }
    torus = ChartManifold::torus(static_cast<int>(c.size()));
    alpha = KForm::constant(torus.dim, 1, c);
  } else {
    throw ConfigError("tischler needs 'periods' or 'cosym_seed'");
  }

  std::optional<RationalApproximation> ra;
  std::optional<Approximation> approx;
  rep.stage("periods", [&] {
    pv = periods(*alpha, torus);
    rep.results()["periods"] = pv.values;
    rep.results()["period_error_bounds"] = pv.error_bounds;
  });
  rep.stage("rationalize", [&] {
    ra = rationalize(pv, eps, static_cast<std::int64_t>(cap));
    rep.results()["d"] = ra->d;
    rep.results()["n"] = ra->n;
    rep.results()["epsilon_achieved"] = ra->epsilon_achieved;
    rep.check("rationalize", ra->epsilon_achieved <= eps, ra->epsilon_achieved, eps);
  });
  if (!ra) return;

  rep.stage("approximation", [&] {
    approx = build_approximation(*alpha, torus, pv, *ra);
    const PeriodVector again = periods(approx->alpha_prime, torus);
    double worst = 0.0;
    for (std::size_t i = 0; i < again.values.size(); ++i)
      worst = std::max(worst, std::abs(again.values[i] - static_cast<double>(ra->n[i]) / static_cast<double>(ra->d)));
    rep.results()["approximation"] = {{"distance", approx->distance}, {"shift", vec_json(approx->shift)},
                                      {"period_reproduction_error", worst}};
    rep.check("periods_reproduced", worst < 1e-10, worst, 1e-10);
  });
  if (!seed || !approx) return;

  rep.stage("transversality", [&] {
    const CatalogSystem e = catalog_system("product_" + seed->structure.name);
    const int n = torus.dim;
    Matrix sel = Matrix::Zero(n, n + 1);
    sel.leftCols(n).setIdentity();
    const ChartMap to_leaf{n + 1, n, [n](const Point& p) { return Point(Vector(p.coords.head(n))); },
                           [sel](const Point&) { return sel; }};
    const auto pts = leaf_samples(e, rng, samples);
    const TransversalityReport tr = check_transversality_preserved(e.system, to_leaf, *alpha, approx->alpha_prime, pts);
    rep.results()["transversality"] = {{"margin_original", tr.margin_original},
                                       {"margin_approximated", tr.margin_approximated},
                                       {"margin_loss", tr.margin_loss}};
    rep.check("transversality_preserved", tr.pass(), tr.margin_approximated, kTangencyThreshold);

    const SectionSpec leaf = extract_leaf(*ra, torus, n + 1);
    const GlobalityReport g = verify_global(e.system, leaf, pts, t_max, 1e-10);
    rep.results()["leaf"] = {{"samples", g.samples}, {"passed", g.passed}, {"min_margin", g.min_margin},
                             {"max_return_time", g.max_return_time}};
    rep.check("leaf_section_global", g.pass() && g.min_margin > 0.0, g.min_margin, 0.0,
              g.failures.empty() ? "" : g.failures.front().reason);
  });
}

BettiProfile resolve_betti(const json& j) {
  if (j.is_string()) {
    if (auto bp = find_betti(j.get<std::string>())) return *bp;
    throw ConfigError("unknown Betti profile '" + j.get<std::string>() + "'");
  }
  if (j.is_object() && j.contains("betti") && j["betti"].is_array()) {
    BettiProfile bp{j.value("name", std::string("custom")), {}};
    for (const auto& b : j["betti"]) {
      if (!b.is_number_integer()) throw ConfigError("Betti numbers must be integers");
      bp.betti.push_back(b.get<int>());
    }
    return bp;
  }
  throw ConfigError("'betti' must be a catalog name or {\"name\", \"betti\": [...]}");
}

json verdict_json(const Verdict& v) {
  json ev = json::object();
  for (const auto& [k, x] : v.evidence) ev[k] = x;
  return {{"verdict", std::string(to_string(v.kind))}, {"rule", v.rule}, {"statement", v.statement}, {"evidence", ev}};
}

void obstruct(const Context& ctx, Report& rep) {
  const bool any = ctx.cfg.contains("betti") || ctx.cfg.contains("system") || ctx.cfg.contains("ambient");
  if (!any) throw ConfigError("obstruct needs at least one of 'betti', 'system', 'ambient'");

  if (ctx.cfg.contains("betti")) {
    const BettiProfile bp = resolve_betti(ctx.cfg["betti"]);
    BettiResult br;
    try {
      br = betti_necessary_condition(bp);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    rep.results()["betti"] = {{"profile", bp.name}, {"betti", bp.betti}, {"pass", br.pass}, {"note", br.note}};
    if (br.failing_degree) rep.results()["betti"]["failing_degree"] = *br.failing_degree;
    rep.check("betti_necessary_condition", br.pass, br.failing_degree ? *br.failing_degree : -1.0, 0.0, br.note);
  }

  if (ctx.cfg.contains("system")) {
    const CatalogSystem e = resolve_system(ctx.cfg["system"]);
    const int dim = e.system.manifold.dim;
    const int resolution = static_cast<int>(get_count(ctx.cfg, "resolution", 256));
    std::vector<MeshedSurface> surfaces;
    bool euclid3 = dim >= 3;
    for (int i = 0; i < 3 && i < dim; ++i) euclid3 = euclid3 && !e.system.manifold.periodic[static_cast<std::size_t>(i)];
    if (euclid3) {
      surfaces.push_back(revolution_torus(dim, {0, 1, 2}, 2.0, 0.5));
      surfaces.push_back(round_sphere(dim, {0, 1, 2}, 1.0));
    }
    for (int i = 0; i + 1 < dim; i += 2)
      if (e.system.manifold.periodic[static_cast<std::size_t>(i)] && e.system.manifold.periodic[static_cast<std::size_t>(i + 1)])
        surfaces.push_back(coordinate_torus(e.system.manifold, i, i + 1, Point(Vector(Vector::Zero(dim)))));
    for (auto& s : surfaces) s.resolution = resolution;

    json integrals = json::array();
    for (const auto& s : surfaces) {
      const std::string label = s.name;
      rep.stage("surface_integral", [&] {
        if (e.system.primitive) {
          const StokesResult sr = stokes_exactness_check(e.system, s);
          integrals.push_back({{"surface", label}, {"integral", sr.integral}, {"nodes_per_axis", sr.nodes_per_axis}});
          rep.check("stokes_" + label, std::abs(sr.integral) < 1e-8, std::abs(sr.integral), 1e-8);
        } else {
          integrals.push_back({{"surface", label}, {"integral", surface_integral(e.system.omega, s, resolution)},
                               {"nodes_per_axis", resolution}});
        }
      });
    }
    rep.results()["surfaces"] = integrals;
    SampleRng rng(ctx.seed);
    const auto pts = ambient_samples(e, rng, 32);
    try {
      rep.results()["exactness_verdict"] = verdict_json(exactness_verdict(e.system, pts));
    } catch (const Error& err) {
      throw ConfigError(err.what());
    }
  }

  if (ctx.cfg.contains("ambient")) {
    const auto entry = find_ambient(get_string(ctx.cfg, "ambient"));
    if (!entry) throw ConfigError("unknown ambient manifold '" + get_string(ctx.cfg, "ambient") + "'");
    const bool connected = ctx.cfg.value("connected", true);
    rep.results()["simply_connected_verdict"] =
        verdict_json(simply_connected_verdict(entry->flags.compact, entry->flags.simply_connected, connected));
    rep.results()["simply_connected_verdict"]["ambient"] = entry->name;
  }
}

void return_map(const Context& ctx, Report& rep) {
  if (!ctx.cfg.contains("system")) throw ConfigError("return-map needs 'system'");
  const CatalogSystem e = resolve_system(ctx.cfg["system"]);
  if (!e.section || !e.section->chart) throw ConfigError("system '" + e.name + "' has no section with a chart");
  const std::size_t orbits = get_count(ctx.cfg, "orbits", 5);
  const auto iterates = static_cast<int>(get_count(ctx.cfg, "iterates", 100));
  const std::size_t jac_samples = get_count(ctx.cfg, "jacobian_samples", 10);
  const double tol = get_tolerance(ctx.cfg, "tolerance", 1e-10);
  const double jac_tol = get_tolerance(ctx.cfg, "jacobian_tolerance", 1e-12);
  const double fd_step = get_tolerance(ctx.cfg, "fd_step", 1e-4);
  const double t_max = get_tolerance(ctx.cfg, "t_max", kDefaultTMax);
  SampleRng rng(ctx.seed);
  rep.results()["system"] = e.system.name;

  rep.stage("crossings", [&] {
    const auto starts = section_samples(e, rng, orbits);
    const OrbitData d = iterate_orbits(e, starts, iterates, t_max, tol);
    rep.results()["crossings"] = {{"orbits", orbits},
                                  {"iterates", iterates},
                                  {"rows", d.rows.size()},
                                  {"max_energy_error", d.max_energy_error},
                                  {"max_section_residual", d.max_residual},
                                  {"min_margin", d.min_margin}};
    rep.check("energy_pinning", d.max_energy_error < 1e-8, d.max_energy_error, 1e-8);
    rep.check("section_residual", d.max_residual < 1e-10, d.max_residual, 1e-10);
    rep.check("transversality", d.min_margin > kTangencyThreshold, d.min_margin, kTangencyThreshold);
    write_orbit_files(ctx, rep, d, "return map iterates, " + e.system.name);

    const int k = std::min(iterates, 10);
    const auto seq = crossing_sequence(e.system, *e.section, starts.front(), k, t_max, tol);
    const auto composed = iterate_return_map(e.system, *e.section, starts.front(), k, t_max, tol);
    const double gap = static_cast<int>(seq.size()) == k
                           ? e.system.manifold.distance(seq.back().point, composed.back().image)
                           : std::numeric_limits<double>::infinity();
    rep.check("return_consistency", gap < k * 1e-8, gap, k * 1e-8);
  });

  rep.stage("symplecticity", [&] {
    const auto pts = section_samples(e, rng, jac_samples);
    symplecticity_checks(rep, e, pts, fd_step, jac_tol);
  });
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"demo-product", "verify-cosym", "tischler", "obstruct", "return-map"};
  return names;
}

json strip_timing(json report) {
  report.erase("timing");
  return report;
}

int run_command(const std::string& command, const json& config, const CommandOptions& opts, std::ostream& err) {
  static const std::map<std::string, std::function<void(const Context&, Report&)>> table{
      {"demo-product", demo_product},
      {"verify-cosym", verify_cosym},
      {"tischler", tischler},
      {"obstruct", obstruct},
      {"return-map", return_map}};
  const auto it = table.find(command);
  if (it == table.end()) {
    err << "cosymlab: unknown command '" << command << "'\n";
    return kExitUsage;
  }

  const auto t0 = Clock::now();
  Context ctx{config, 0, opts.out_dir};
  Report rep;
  try {
    if (config.contains("seed")) {
      const json& s = config["seed"];
      if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) throw ConfigError("'seed' must be a non-negative integer");
      ctx.seed = config["seed"].get<std::uint64_t>();
    }
    if (opts.seed) ctx.seed = *opts.seed;
    std::filesystem::create_directories(ctx.out);
    it->second(ctx, rep);
  } catch (const ConfigError& e) {
    err << "cosymlab " << command << ": config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "cosymlab " << command << ": config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDataError || e.code() == ErrorCode::kMalformedProfile) {
      err << "cosymlab " << command << ": input error: " << e.what() << '\n';
      return kExitUsage;
    }
    rep.fail("aborted", std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cosymlab " << command << ": " << e.what() << '\n';
    return kExitUsage;
  }

  rep.artifact("report.json");
  const double total = std::chrono::duration<double>(Clock::now() - t0).count();
  const json report = rep.to_json(command, config, ctx.seed, total);
  std::ofstream out(ctx.out / "report.json");
  out << report.dump(2) << '\n';
  if (!out) {
    err << "cosymlab " << command << ": cannot write report to " << ctx.out.string() << '\n';
    return kExitUsage;
  }
  if (!rep.pass()) {
    for (const auto& c : report["checks"])
      if (!c["pass"].get<bool>())
        err << "cosymlab " << command << ": check failed: " << c["name"].get<std::string>()
            << (c.contains("detail") ? " (" + c["detail"].get<std::string>() + ")" : std::string()) << '\n';
  }
  return rep.pass() ? kExitPass : kExitFail;
}

}  // namespace cosymlab::cli
