#include "cosymlab/section.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "cosymlab/error.hpp"
#include "cosymlab/integrator.hpp"

namespace cosymlab {

double crossing_rate(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p) {
  return sec.theta.gradient(p).dot(hamiltonian_field(sys, p));
}

double section_residual(const SectionSpec& sec, const Point& p) { return wrap_angle(sec.theta(p) - sec.level); }

namespace {

constexpr int kSubsteps = 8;
constexpr double kMaxAngleStep = kPi / 4.0;

// Walks one orbit and reports positively oriented crossings in order. The
// angle theta - level is unwound into a continuous lift along the orbit
// (sampled on the dense output), so a crossing is the lift passing a multiple
// of 2 pi in the oriented direction.
class CrossingScanner {
 public:
  CrossingScanner(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p, int direction,
                  double t_max, double tol)
      : sys_(sys),
        sec_(sec),
        direction_(direction >= 0 ? 1 : -1),
        sign_(sec.orientation >= 0 ? 1.0 : -1.0),
        t_max_(t_max),
        tol_(tol),
        integ_([&sys](const Vector& y) { return hamiltonian_field(sys, Point(y)); }, Dop853::Options{tol, tol}) {
    if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t_max must be positive");
    integ_.reset(0.0, p.coords);
    lift_ = section_residual(sec, p);
    if (std::abs(lift_) < kTangencyThreshold) lift_ = 0.0;  // start on the section
    theta_prev_ = sec.theta(p);
    min_margin_ = std::abs(rate_at_current());
  }

  std::optional<Crossing> next() {
    while (pending_.empty()) {
      if (std::abs(integ_.t()) >= t_max_) return std::nullopt;
      const double rate = rate_at_current();
      const double cap = std::abs(rate) > 0.0 ? kMaxAngleStep / std::abs(rate)
                                              : std::numeric_limits<double>::infinity();
      integ_.step(direction_ * t_max_, cap);
      scan_last_step();
    }
    Crossing c = pending_.front();
    pending_.pop_front();
    return c;
  }

  double min_margin() const { return min_margin_; }
  int crossings_seen() const { return seen_; }

 private:
  double rate_at_current() const { return sec_.theta.gradient(Point(integ_.y())).dot(integ_.dy()); }

  void scan_last_step() {
    const double t0 = integ_.t_prev(), t1 = integ_.t();
    double ta = t0;
    for (int j = 1; j <= kSubsteps; ++j) {
      const double tb = j == kSubsteps ? t1 : t0 + (t1 - t0) * j / kSubsteps;
      const Vector yb = j == kSubsteps ? integ_.y() : integ_.dense(tb);
      const double theta_b = sec_.theta(Point(yb));
      const double lift_b = lift_ + wrap_angle(theta_b - theta_prev_);
      examine(ta, tb, lift_, lift_b);
      lift_ = lift_b;
      theta_prev_ = theta_b;
      ta = tb;
    }
    min_margin_ = std::min(min_margin_, std::abs(rate_at_current()));
  }

  // Lift runs from la (visited first) to lb.
  void examine(double ta, double tb, double la, double lb) {
    const double a = sign_ * la, b = sign_ * lb;
    // Multiples of 2 pi crossed in either orientation.
    const double lo = std::min(a, b), hi = std::max(a, b);
    const auto first = static_cast<long>(std::ceil(lo / kTwoPi));
    const auto last = static_cast<long>(std::floor(hi / kTwoPi));
    for (long k = first; k <= last; ++k) {
      const double target = kTwoPi * static_cast<double>(k);
      if (target == a) continue;  // already reported by the previous interval
      ++seen_;
      const bool positive = direction_ > 0 ? (a < target && target <= b) : (a > target && target >= b);
      if (positive) pending_.push_back(refine(ta, tb));
    }
  }

  double g_dense(double t) const { return sign_ * wrap_angle(sec_.theta(Point(integ_.dense(t))) - sec_.level); }

  Crossing refine(double ta, double tb) {
    // Illinois iteration on the dense output.
    double ga = g_dense(ta), gb = g_dense(tb);
    double t = tb;
    if (ga == 0.0) t = ta;
    else if (gb != 0.0 && (ga < 0) != (gb < 0)) {
      int side = 0;
      for (int it = 0; it < 100; ++it) {
        t = (ta * gb - tb * ga) / (gb - ga);
        const double gt = g_dense(t);
        if (gt == 0.0 || std::abs(tb - ta) <= 1e-15 * (1.0 + std::abs(t))) break;
        if ((gt < 0) == (gb < 0)) {
          tb = t;
          gb = gt;
          if (side == -1) ga *= 0.5;
          side = -1;
        } else {
          ta = t;
          ga = gt;
          if (side == +1) gb *= 0.5;
          side = +1;
        }
      }
    }

    // Newton polish on the true flow, re-integrated from the step start.
    Dop853 sub([this](const Vector& y) { return hamiltonian_field(sys_, Point(y)); },
               Dop853::Options{tol_, tol_});
    Vector y;
    double rate = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 30; ++it) {
      sub.reset(integ_.t_prev(), integ_.y_prev());
      y = Vector(sub.integrate(t));
      residual = section_residual(sec_, Point(y));
      rate = sec_.theta.gradient(Point(y)).dot(sub.dy());
      if (std::abs(rate) < kTangencyThreshold) {
        std::ostringstream msg;
        msg << "tangency: crossing rate " << rate << " below " << kTangencyThreshold << " at t = " << t;
        throw Error(ErrorCode::kTangency, msg.str());
      }
      if (std::abs(residual) < kCrossingResidual) break;
      t -= residual / rate;
    }
    if (!(std::abs(residual) < 1e3 * kCrossingResidual))
      throw Error(ErrorCode::kNoCrossing, "crossing refinement did not converge");
    min_margin_ = std::min(min_margin_, std::abs(rate));
    Crossing c;
    c.t = t;
    c.lifted = Point(y);
    c.point = sys_.manifold.reduce(c.lifted);
    c.rate = rate;
    return c;
  }

  const HamiltonianSystem& sys_;
  const SectionSpec& sec_;
  int direction_;
  double sign_;
  double t_max_, tol_;
  Dop853 integ_;
  double lift_ = 0.0;
  double theta_prev_ = 0.0;
  double min_margin_ = 0.0;
  int seen_ = 0;
  std::deque<Crossing> pending_;
};

const GraphEmbedding& require_chart(const SectionSpec& sec) {
  if (!sec.chart) throw Error(ErrorCode::kInvalidArgument, "section has no coordinate chart");
  return *sec.chart;
}

}  // namespace

std::optional<Crossing> find_crossing(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                                      int direction, double t_max, double tol, double* min_margin,
                                      int* crossings_seen) {
  CrossingScanner scanner(sys, sec, p, direction, t_max, tol);
  auto c = scanner.next();
  if (min_margin) *min_margin = scanner.min_margin();
  if (crossings_seen) *crossings_seen = scanner.crossings_seen();
  return c;
}

ReturnRecord first_return(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p, double t_max,
                          double tol) {
  if (std::abs(section_residual(sec, p)) >= kTangencyThreshold)
    throw Error(ErrorCode::kNotOnSection, "first_return: start point is not on the section");
  const double rate0 = crossing_rate(sys, sec, p);
  if (std::abs(rate0) < kTangencyThreshold)
    throw Error(ErrorCode::kTangency, "first_return: flow is tangent to the section at the start point");

  CrossingScanner scanner(sys, sec, p, +1, t_max, tol);
  const auto c = scanner.next();
  if (!c) {
    std::ostringstream msg;
    msg << "no positively oriented crossing within t_max = " << t_max
        << " (section not global for this orbit, or t_max too small)";
    throw Error(ErrorCode::kNoCrossing, msg.str());
  }
  ReturnRecord rec;
  rec.start = p;
  rec.return_time = c->t;
  rec.image = c->point;
  rec.transversality_margin = scanner.min_margin();
  rec.crossings_seen = scanner.crossings_seen();
  return rec;
}

std::vector<Crossing> crossing_sequence(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                                        int count, double t_max, double tol) {
  CrossingScanner scanner(sys, sec, p, +1, t_max, tol);
  std::vector<Crossing> out;
  for (int i = 0; i < count; ++i) {
    auto c = scanner.next();
    if (!c) break;
    out.push_back(std::move(*c));
  }
  return out;
}

std::vector<ReturnRecord> iterate_return_map(const HamiltonianSystem& sys, const SectionSpec& sec,
                                             const Point& p, int k, double t_max, double tol) {
  std::vector<ReturnRecord> out;
  Point cur = p;
  for (int i = 0; i < k; ++i) {
    out.push_back(first_return(sys, sec, cur, t_max, tol));
    cur = out.back().image;
  }
  return out;
}

Matrix return_map_jacobian(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p, double fd_step,
                           double tol) {
  const GraphEmbedding& chart = require_chart(sec);
  if (!(fd_step >= 1e4 * tol)) {
    std::ostringstream msg;
    msg << "finite-difference step " << fd_step << " is below the noise floor 1e4 * tol = " << 1e4 * tol;
    throw Error(ErrorCode::kNoiseFloor, msg.str());
  }
  const ChartManifold fibre = chart.source_manifold();
  const Point u0 = chart.project(p);
  const int k = chart.source_dim();
  Matrix jac(k, k);
  for (int j = 0; j < k; ++j) {
    Point up = u0, um = u0;
    up.coords[j] += fd_step;
    um.coords[j] -= fd_step;
    const Point ip = chart.project(first_return(sys, sec, chart.embed(up, p), kDefaultTMax, tol).image);
    const Point im = chart.project(first_return(sys, sec, chart.embed(um, p), kDefaultTMax, tol).image);
    jac.col(j) = fibre.difference(ip, im) / (2.0 * fd_step);
  }
  return jac;
}

Matrix restricted_form_matrix(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p) {
  const GraphEmbedding& chart = require_chart(sec);
  const Matrix e = chart.jacobian(chart.project(p));
  return e.transpose() * two_form_matrix(sys.omega, p) * e;
}

SymplecticityCheck return_map_symplecticity(const HamiltonianSystem& sys, const SectionSpec& sec, const Point& p,
                                            double fd_step, double tol) {
  SymplecticityCheck out;
  out.jacobian = return_map_jacobian(sys, sec, p, fd_step, tol);
  out.det = out.jacobian.determinant();
  const Point image = first_return(sys, sec, p, kDefaultTMax, tol).image;
  const Matrix j0 = restricted_form_matrix(sys, sec, p);
  const Matrix j1 = restricted_form_matrix(sys, sec, image);
  out.form_residual = (out.jacobian.transpose() * j1 * out.jacobian - j0).cwiseAbs().maxCoeff();
  return out;
}

GlobalityReport verify_global(const HamiltonianSystem& sys, const SectionSpec& sec, std::span<const Point> samples,
                              double t_max, double tol) {
  GlobalityReport rep;
  rep.samples = samples.size();
  if (samples.empty()) {
    rep.warning = "empty sample set: globality holds vacuously";
    return rep;
  }
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_return_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      double m_fwd = 0.0, m_bwd = 0.0;
      const auto fwd = find_crossing(sys, sec, samples[i], +1, t_max, tol, &m_fwd);
      if (!fwd) {
        rep.failures.push_back({i, "no forward crossing within t_max"});
        continue;
      }
      const auto bwd = find_crossing(sys, sec, samples[i], -1, t_max, tol, &m_bwd);
      if (!bwd) {
        rep.failures.push_back({i, "no backward crossing within t_max"});
        continue;
      }
      const ReturnRecord rec = first_return(sys, sec, fwd->point, t_max, tol);
      rep.min_margin = std::min({rep.min_margin, m_fwd, m_bwd, rec.transversality_margin});
      rep.max_return_time = std::max(rep.max_return_time, rec.return_time);
      rep.min_return_time = std::min(rep.min_return_time, rec.return_time);
      ++rep.passed;
    } catch (const Error& e) {
      rep.failures.push_back({i, std::string(to_string(e.code())) + ": " + e.what()});
    }
  }
  if (rep.passed == 0) rep.min_margin = rep.min_return_time = 0.0;
  return rep;
}

MappingTorusChart mapping_torus_chart(const HamiltonianSystem& sys, const SectionSpec& sec,
                                      std::span<const Point> grid, int s_count, double t_max, double tol) {
  if (s_count < 2) throw Error(ErrorCode::kInvalidArgument, "mapping torus chart needs at least 2 s-samples");
  MappingTorusChart chart;
  for (int k = 0; k < s_count; ++k) chart.s_samples.push_back(static_cast<double>(k) / (s_count - 1));
  for (const Point& p : grid) {
    const ReturnRecord rec = first_return(sys, sec, p, t_max, tol);
    const double h0 = sys.hamiltonian(p);
    std::vector<Point> row;
    for (double s : chart.s_samples) {
      const Point q = s == 0.0 ? sys.manifold.reduce(p) : flow(sys, p, s * rec.return_time, tol).end;
      chart.max_energy_error = std::max(chart.max_energy_error, std::abs(sys.hamiltonian(q) - h0));
      row.push_back(q);
    }
    chart.max_energy_error = std::max(chart.max_energy_error, std::abs(sys.hamiltonian(rec.image) - h0));
    chart.gluing_residual = std::max(chart.gluing_residual, sys.manifold.distance(row.back(), rec.image));
    chart.fiber.push_back(p);
    chart.return_times.push_back(rec.return_time);
    chart.holonomy.push_back(rec.image);
    chart.psi.push_back(std::move(row));
  }
  chart.energy_ok = chart.max_energy_error < 1e-8;
  if (chart.gluing_residual > 10.0 * tol) {
    std::ostringstream msg;
    msg << "mapping torus gluing residual " << chart.gluing_residual << " exceeds 10 * tol";
    throw Error(ErrorCode::kGluingViolation, msg.str());
  }
  return chart;
}

void write_crossings_csv(std::ostream& out, std::span<const CrossingRow> rows) {
  const Eigen::Index k = rows.empty() ? 0 : rows.front().coords.size();
  out << "orbit_id,t";
  for (Eigen::Index i = 0; i < k; ++i) out << ",coord_" << i;
  out << ",margin\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    if (r.coords.size() != k) throw Error(ErrorCode::kDimensionMismatch, "CSV rows have different widths");
    out << r.orbit_id << ',' << r.t;
    for (Eigen::Index i = 0; i < k; ++i) out << ',' << r.coords[i];
    out << ',' << r.margin << '\n';
  }
  out.precision(old_precision);
}

}  // namespace cosymlab
