#include "config.hpp"

#include <cmath>
#include <fstream>

#include "cosymlab/error.hpp"
#include "expression.hpp"

namespace cosymlab::cli {

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    return cfg;
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

double get_double(const json& cfg, const char* key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return cfg[key].get<double>();
}

std::size_t get_count(const json& cfg, const char* key, std::size_t fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number_integer() || cfg[key].get<long long>() < 1)
    throw ConfigError(std::string("'") + key + "' must be an integer >= 1");
  return cfg[key].get<std::size_t>();
}

double get_tolerance(const json& cfg, const char* key, double fallback) {
  const double v = get_double(cfg, key, fallback);
  if (!(v > 0.0)) throw ConfigError(std::string("'") + key + "' must be > 0");
  return v;
}

std::string get_string(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_string())
    throw ConfigError(std::string("missing string field '") + key + "'");
  return cfg[key].get<std::string>();
}

namespace {

std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

int coordinate_index(const json& j, const std::vector<std::string>& vars) {
  if (j.is_number_integer()) {
    const int i = j.get<int>();
    if (i < 0 || i >= static_cast<int>(vars.size())) throw ConfigError("coordinate index out of range");
    return i;
  }
  if (j.is_string()) {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == j.get<std::string>()) return static_cast<int>(i);
    throw ConfigError("unknown coordinate '" + j.get<std::string>() + "'");
  }
  throw ConfigError("coordinates are given by name or index");
}

std::vector<int> coordinate_list(const json& j, const std::vector<std::string>& vars) {
  if (!j.is_array()) throw ConfigError("coordinate lists must be arrays");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(coordinate_index(v, vars));
  return out;
}

ScalarField scalar_field(const json& j, const std::vector<std::string>& vars, const char* what) {
  if (!j.is_string()) throw ConfigError(std::string(what) + " must be an expression string");
  try {
    auto e = Expression::parse(j.get<std::string>(), vars);
    return ScalarField{[e](const Point& p) { return e.value(p.coords); },
                       [e](const Point& p) { return Vector(e.gradient(p.coords)); }};
  } catch (const ParseError& err) {
    throw ConfigError(std::string(what) + ": " + err.what());
  }
}

CatalogSystem inline_system(const json& s) {
  if (!s.contains("variables") || !s["variables"].is_array() || s["variables"].empty())
    throw ConfigError("inline system needs a non-empty 'variables' array");
  std::vector<std::string> vars;
  for (const auto& v : s["variables"]) {
    if (!v.is_string()) throw ConfigError("variable names must be strings");
    vars.push_back(v.get<std::string>());
  }
  const int dim = static_cast<int>(vars.size());
  if (dim % 2 != 0) throw ConfigError("inline system needs an even number of coordinates");

  std::vector<bool> periodic(vars.size(), false);
  if (s.contains("periodic")) {
    if (!s["periodic"].is_array() || s["periodic"].size() != vars.size())
      throw ConfigError("'periodic' must have one flag per variable");
    for (std::size_t i = 0; i < vars.size(); ++i) periodic[i] = s["periodic"][i].get<bool>();
  }
  ChartManifold m = ChartManifold::with_mask(periodic);
  if (s.contains("periods")) {
    const auto periods = number_list(s["periods"], "'periods'");
    if (periods.size() != vars.size()) throw ConfigError("'periods' must have one entry per variable");
    m.periods = periods;
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (!s.contains("omega") || !s["omega"].is_array()) throw ConfigError("inline system needs 'omega' terms");
  KForm omega = KForm::zero(dim, 2);
  for (const auto& term : s["omega"]) {
    if (!term.is_array() || term.size() != 3 || !term[2].is_number())
      throw ConfigError("omega terms are [i, j, coefficient]");
    const int i = coordinate_index(term[0], vars), j = coordinate_index(term[1], vars);
    if (i == j) throw ConfigError("omega term with repeated index");
    omega = omega + KForm::basis(dim, {i, j}, term[2].get<double>());
  }
  if (!s.contains("hamiltonian")) throw ConfigError("inline system needs a 'hamiltonian' expression");

  HamiltonianSystem sys{s.value("name", std::string("inline")), m, omega,
                        scalar_field(s["hamiltonian"], vars, "hamiltonian"), std::nullopt, TopologyFlags{}};
  if (s.contains("primitive")) {
    const auto& terms = s["primitive"];
    if (!terms.is_array() || terms.size() != vars.size())
      throw ConfigError("'primitive' needs one coefficient expression per variable");
    std::vector<ScalarField> coeffs;
    for (const auto& t : terms) coeffs.push_back(scalar_field(t, vars, "primitive"));
    sys.primitive = KForm::one_form(
        dim,
        [coeffs, dim](const Point& p) {
          Vector v(dim);
          for (int i = 0; i < dim; ++i) v[i] = coeffs[static_cast<std::size_t>(i)](p);
          return v;
        },
        [coeffs, dim](const Point& p) {
          Matrix jac(dim, dim);
          for (int i = 0; i < dim; ++i) jac.row(i) = coeffs[static_cast<std::size_t>(i)].gradient(p).transpose();
          return jac;
        });
  }
  if (s.contains("topology")) {
    const auto& t = s["topology"];
    sys.topology.compact = t.value("compact", false);
    sys.topology.simply_connected = t.value("simply_connected", false);
    sys.topology.cotangent_model = t.value("cotangent_model", false);
  }

  CatalogSystem e{sys.name, sys, get_double(s, "level", 0.0), std::nullopt, false, {}, {}, {}, {}};
  e.box_lo = s.contains("box_lo") ? number_list(s["box_lo"], "'box_lo'") : std::vector<double>(vars.size(), -1.0);
  e.box_hi = s.contains("box_hi") ? number_list(s["box_hi"], "'box_hi'") : std::vector<double>(vars.size(), 1.0);
  if (e.box_lo.size() != vars.size() || e.box_hi.size() != vars.size())
    throw ConfigError("sampling box needs one bound per variable");

  if (s.contains("section")) {
    const auto& sj = s["section"];
    SectionSpec sec;
    sec.theta = scalar_field(sj.contains("theta") ? sj["theta"] : json(), vars, "section theta");
    sec.level = get_double(sj, "level", 0.0);
    sec.orientation = sj.value("orientation", 1) >= 0 ? 1 : -1;
    if (!sj.contains("free") || !sj.contains("dependent") || !sj.contains("reference"))
      throw ConfigError("section needs 'free', 'dependent' and 'reference'");
    const auto free = coordinate_list(sj["free"], vars);
    const auto dependent = coordinate_list(sj["dependent"], vars);
    const auto reference = number_list(sj["reference"], "section 'reference'");
    if (dependent.size() != 2 || free.size() + 2 != vars.size() || reference.size() != vars.size())
      throw ConfigError("section chart needs dim - 2 free and 2 dependent coordinates");
    Vector ref(dim);
    for (int i = 0; i < dim; ++i) ref[i] = reference[static_cast<std::size_t>(i)];
    sec.chart.emplace(m, free, dependent,
                      std::vector<LevelConstraint>{{sys.hamiltonian, e.level, false}, {sec.theta, sec.level, true}},
                      Point(ref));
    e.chart_lo = sj.contains("chart_lo") ? number_list(sj["chart_lo"], "'chart_lo'")
                                         : std::vector<double>(free.size(), -1.0);
    e.chart_hi = sj.contains("chart_hi") ? number_list(sj["chart_hi"], "'chart_hi'")
                                         : std::vector<double>(free.size(), 1.0);
    if (e.chart_lo.size() != free.size() || e.chart_hi.size() != free.size())
      throw ConfigError("chart box needs one bound per free coordinate");
    e.section = std::move(sec);
    e.section_global = sj.value("global", false);
  }
  return e;
}

}  // namespace

CatalogSystem resolve_system(const json& system) {
  if (system.is_string()) {
    try {
      return catalog_system(system.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (system.is_object()) return inline_system(system);
  throw ConfigError("'system' must be a catalog name or an inline system object");
}

CosymSeed resolve_seed(const json& cfg) {
  const std::string name = get_string(cfg, "cosym_seed");
  try {
    return cosym_seed(name);
  } catch (const Error&) {
    std::string known;
    for (const auto& n : cosym_seed_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown cosymplectic seed '" + name + "' (known: " + known + ")");
  }
}

}  // namespace cosymlab::cli
