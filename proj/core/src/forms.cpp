#include "cosymlab/forms.hpp"

#include <algorithm>
#include <numeric>
#include <map>
#include <mutex>
#include <tuple>
#include <utility>

#include "cosymlab/error.hpp"

namespace cosymlab {

Point::Point(std::initializer_list<double> c) : coords(static_cast<Eigen::Index>(c.size())) {
  Eigen::Index i = 0;
  for (double v : c) coords[i++] = v;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

void enumerate(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    enumerate(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

// Entries (rank of K, rank of I, rank of J, sign) with K = I u J and sign the
// parity of the shuffle (I, J) -> K.
struct WedgeEntry {
  std::size_t k, i, j;
  double sign;
};

const std::vector<WedgeEntry>& wedge_table(int n, int ka, int kb) {
  static std::map<std::tuple<int, int, int>, std::vector<WedgeEntry>> cache;
  const auto key = std::make_tuple(n, ka, kb);
  {
    std::lock_guard lock(cache_mutex());
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto& big = subsets(n, ka + kb);
  std::vector<WedgeEntry> table;
  for (std::size_t rk = 0; rk < big.size(); ++rk) {
    const auto& kset = big[rk];
    for (const auto& local : subsets(ka + kb, ka)) {
      std::vector<int> iset, jset;
      std::vector<bool> taken(kset.size(), false);
      for (int l : local) {
        iset.push_back(kset[l]);
        taken[l] = true;
      }
      for (std::size_t l = 0; l < kset.size(); ++l)
        if (!taken[l]) jset.push_back(kset[l]);
      int inversions = 0;
      for (int a : iset)
        for (int b : jset)
          if (a > b) ++inversions;
      table.push_back({rk, subset_rank(n, iset), subset_rank(n, jset), inversions % 2 ? -1.0 : 1.0});
    }
  }
  std::lock_guard lock(cache_mutex());
  return cache.emplace(key, std::move(table)).first->second;
}

// Contraction table for degree k: for each J of size k-1 and i not in J, the
// rank of {i} u J and the sign (-1)^(position of i).
struct InteriorEntry {
  std::size_t j, full;
  int index;
  double sign;
};

const std::vector<InteriorEntry>& interior_table(int n, int k) {
  static std::map<std::pair<int, int>, std::vector<InteriorEntry>> cache;
  const auto key = std::make_pair(n, k);
  {
    std::lock_guard lock(cache_mutex());
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<InteriorEntry> table;
  const auto& small = subsets(n, k - 1);
  for (std::size_t rj = 0; rj < small.size(); ++rj) {
    const auto& jset = small[rj];
    for (int i = 0; i < n; ++i) {
      if (std::find(jset.begin(), jset.end(), i) != jset.end()) continue;
      std::vector<int> full = jset;
      full.push_back(i);
      std::sort(full.begin(), full.end());
      const auto pos = std::find(full.begin(), full.end(), i) - full.begin();
      table.push_back({rj, subset_rank(n, full), i, pos % 2 ? -1.0 : 1.0});
    }
  }
  std::lock_guard lock(cache_mutex());
  return cache.emplace(key, std::move(table)).first->second;
}

Vector zeros(std::size_t n) { return Vector::Zero(static_cast<Eigen::Index>(n)); }

}  // namespace

const std::vector<std::vector<int>>& subsets(int n, int k) {
  static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
  const auto key = std::make_pair(n, k);
  {
    std::lock_guard lock(cache_mutex());
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<std::vector<int>> out;
  if (k >= 0 && k <= n) {
    std::vector<int> cur;
    enumerate(n, k, 0, cur, out);
  }
  std::lock_guard lock(cache_mutex());
  return cache.emplace(key, std::move(out)).first->second;
}

std::size_t subset_rank(int n, std::span<const int> subset) {
  const auto& all = subsets(n, static_cast<int>(subset.size()));
  const std::vector<int> key(subset.begin(), subset.end());
  auto it = std::lower_bound(all.begin(), all.end(), key);
  if (it == all.end() || *it != key)
    throw Error(ErrorCode::kInvalidArgument, "index set is not a sorted subset of the chart");
  return static_cast<std::size_t>(it - all.begin());
}

// ---------------------------------------------------------------------------

KForm::KForm(int dim, int degree, CoeffFn coeffs, CoeffFn derivative)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)), derivative_(std::move(derivative)) {
  if (dim < 1) throw Error(ErrorCode::kDimensionMismatch, "form dimension must be >= 1");
  if (degree < 0) throw Error(ErrorCode::kDegreeUnderflow, "form degree must be >= 0");
  if (degree > dim) throw Error(ErrorCode::kDegreeOverflow, "form degree exceeds chart dimension");
  // A top-degree form is trivially closed.
  if (!derivative_ && degree == dim) derivative_ = [](const Point&) { return Vector(); };
}

KForm KForm::zero(int dim, int degree) { return constant(dim, degree, zeros(binomial(dim, degree))); }

KForm KForm::constant(int dim, int degree, Vector coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != binomial(dim, degree))
    throw Error(ErrorCode::kDimensionMismatch, "constant form: coefficient count != C(dim, degree)");
  const std::size_t dsize = binomial(dim, degree + 1);
  return KForm(
      dim, degree, [c = std::move(coeffs)](const Point&) { return c; },
      [dsize](const Point&) { return zeros(dsize); });
}

KForm KForm::basis(int dim, std::vector<int> indices, double c) {
  const int k = static_cast<int>(indices.size());
  for (int i : indices)
    if (i < 0 || i >= dim) throw Error(ErrorCode::kDimensionMismatch, "basis index outside chart");
  Vector coeffs = zeros(binomial(dim, k));
  double sign = 1.0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (indices[a] > indices[b]) sign = -sign;
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) == indices.end())
    coeffs[static_cast<Eigen::Index>(subset_rank(dim, indices))] = sign * c;
  return constant(dim, k, std::move(coeffs));
}

KForm KForm::scalar(int dim, std::function<double(const Point&)> f,
                    std::function<Vector(const Point&)> gradient) {
  CoeffFn coeffs = [f = std::move(f)](const Point& p) {
    Vector v(1);
    v[0] = f(p);
    return v;
  };
  return KForm(dim, 0, std::move(coeffs), std::move(gradient));
}

KForm KForm::one_form(int dim, std::function<Vector(const Point&)> coeffs,
                      std::function<Matrix(const Point&)> jacobian) {
  CoeffFn derivative;
  if (jacobian) {
    derivative = [dim, jac = std::move(jacobian)](const Point& p) {
      const Matrix j = jac(p);
      Vector out = zeros(binomial(dim, 2));
      Eigen::Index r = 0;
      for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) out[r++] = j(b, a) - j(a, b);
      return out;
    };
  }
  return KForm(dim, 1, std::move(coeffs), std::move(derivative));
}

Vector KForm::coefficients(const Point& p) const {
  if (p.dim() != dim_) throw Error(ErrorCode::kDimensionMismatch, "point dimension != form dimension");
  return coeffs_(p);
}

Vector KForm::derivative_coefficients(const Point& p) const {
  if (!derivative_) throw Error(ErrorCode::kInvalidArgument, "form has no analytic derivative");
  if (p.dim() != dim_) throw Error(ErrorCode::kDimensionMismatch, "point dimension != form dimension");
  return derivative_(p);
}

KForm KForm::operator+(const KForm& other) const {
  if (dim_ != other.dim_ || degree_ != other.degree_)
    throw Error(ErrorCode::kDimensionMismatch, "sum of forms with different dimension or degree");
  CoeffFn d;
  if (derivative_ && other.derivative_)
    d = [a = derivative_, b = other.derivative_](const Point& p) -> Vector { return a(p) + b(p); };
  return KForm(dim_, degree_, [a = coeffs_, b = other.coeffs_](const Point& p) -> Vector { return a(p) + b(p); },
               std::move(d));
}

KForm KForm::operator-(const KForm& other) const { return *this + other * -1.0; }

KForm KForm::operator*(double s) const {
  CoeffFn d;
  if (derivative_) d = [a = derivative_, s](const Point& p) -> Vector { return s * a(p); };
  return KForm(dim_, degree_, [a = coeffs_, s](const Point& p) -> Vector { return s * a(p); }, std::move(d));
}

// ---------------------------------------------------------------------------

namespace {

double evaluate_at(const KForm& f, const Point& p, const Matrix& frame) {
  const int k = f.degree();
  const Vector c = f.coefficients(p);
  if (k == 0) return c[0];
  const auto& sets = subsets(f.dim(), k);
  double total = 0.0;
  Matrix block(k, k);
  for (std::size_t r = 0; r < sets.size(); ++r) {
    if (c[static_cast<Eigen::Index>(r)] == 0.0) continue;
    for (int a = 0; a < k; ++a) block.row(a) = frame.row(sets[r][a]);
    total += c[static_cast<Eigen::Index>(r)] * block.determinant();
  }
  return total;
}

}  // namespace

double evaluate(const KForm& f, std::span<const TangentVector> vs) {
  if (static_cast<int>(vs.size()) != f.degree())
    throw Error(ErrorCode::kArityMismatch, "evaluate: number of vectors != form degree");
  if (vs.empty())
    throw Error(ErrorCode::kArityMismatch, "evaluate: 0-forms need a base point, not tangent vectors");
  const Point& base = vs.front().base;
  Matrix frame(f.dim(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (vs[j].components.size() != f.dim() || vs[j].base.dim() != f.dim())
      throw Error(ErrorCode::kDimensionMismatch, "evaluate: vector dimension != form dimension");
    if ((vs[j].base.coords - base.coords).cwiseAbs().maxCoeff() > 0.0)
      throw Error(ErrorCode::kInvalidArgument, "evaluate: tangent vectors have different base points");
  }
  // Columns go in lexicographic order with the permutation's sign pulled out,
  // so swapping two arguments flips the result bit for bit.
  std::vector<std::size_t> order(vs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&vs](std::size_t a, std::size_t b) {
    const Vector& u = vs[a].components;
    const Vector& v = vs[b].components;
    return std::lexicographical_compare(u.data(), u.data() + u.size(), v.data(), v.data() + v.size());
  };
  double sign = 1.0;
  for (std::size_t i = 1; i < order.size(); ++i)
    for (std::size_t j = i; j > 0 && less(order[j], order[j - 1]); --j) {
      std::swap(order[j], order[j - 1]);
      sign = -sign;
    }
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (j > 0 && vs[order[j]].components == vs[order[j - 1]].components) return 0.0;
    frame.col(static_cast<Eigen::Index>(j)) = vs[order[j]].components;
  }
  return sign * evaluate_at(f, base, frame);
}

Vector wedge_coefficients(int dim, int ka, const Vector& a, int kb, const Vector& b) {
  if (ka + kb > dim) throw Error(ErrorCode::kDegreeOverflow, "wedge degree exceeds chart dimension");
  Vector out = zeros(binomial(dim, ka + kb));
  for (const auto& e : wedge_table(dim, ka, kb))
    out[static_cast<Eigen::Index>(e.k)] += e.sign * a[static_cast<Eigen::Index>(e.i)] * b[static_cast<Eigen::Index>(e.j)];
  return out;
}

KForm wedge(const KForm& a, const KForm& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kDimensionMismatch, "wedge of forms on different charts");
  const int n = a.dim(), ka = a.degree(), kb = b.degree();
  if (ka + kb > n) throw Error(ErrorCode::kDegreeOverflow, "wedge degree exceeds chart dimension");
  KForm::CoeffFn coeffs = [a, b, n, ka, kb](const Point& p) {
    return wedge_coefficients(n, ka, a.coefficients(p), kb, b.coefficients(p));
  };
  KForm::CoeffFn derivative;
  if (a.has_analytic_derivative() && b.has_analytic_derivative()) {
    // d(a ^ b) = da ^ b + (-1)^ka a ^ db
    derivative = [a, b, n, ka, kb](const Point& p) {
      if (ka + kb + 1 > n) return Vector();
      const double sign = ka % 2 ? -1.0 : 1.0;
      return Vector(wedge_coefficients(n, ka + 1, a.derivative_coefficients(p), kb, b.coefficients(p)) +
                    sign * wedge_coefficients(n, ka, a.coefficients(p), kb + 1, b.derivative_coefficients(p)));
    };
  }
  return KForm(n, ka + kb, std::move(coeffs), std::move(derivative));
}

KForm interior(VectorField x, const KForm& f) {
  if (f.degree() < 1) throw Error(ErrorCode::kDegreeUnderflow, "interior product of a 0-form");
  const int n = f.dim(), k = f.degree();
  KForm::CoeffFn coeffs = [x = std::move(x), f, n, k](const Point& p) {
    const Vector xv = x(p);
    if (xv.size() != n) throw Error(ErrorCode::kDimensionMismatch, "vector field dimension != form dimension");
    const Vector c = f.coefficients(p);
    Vector out = zeros(binomial(n, k - 1));
    for (const auto& e : interior_table(n, k))
      out[static_cast<Eigen::Index>(e.j)] += e.sign * xv[e.index] * c[static_cast<Eigen::Index>(e.full)];
    return out;
  };
  return KForm(n, k - 1, std::move(coeffs));
}

KForm exterior_derivative(const KForm& f, double h) {
  const int n = f.dim(), k = f.degree();
  if (k >= n) throw Error(ErrorCode::kDegreeOverflow, "exterior derivative of a top-degree form");
  if (f.has_analytic_derivative()) {
    const std::size_t dd = binomial(n, k + 2);
    return KForm(
        n, k + 1, [f](const Point& p) { return f.derivative_coefficients(p); },
        [dd](const Point&) { return zeros(dd); });
  }
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
  KForm::CoeffFn coeffs = [f, n, k, h](const Point& p) {
    // partial[j] = d/dx_j of the coefficient vector
    std::vector<Vector> partial(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      Point plus = p, minus = p;
      plus.coords[j] += h;
      minus.coords[j] -= h;
      partial[static_cast<std::size_t>(j)] = (f.coefficients(plus) - f.coefficients(minus)) / (2.0 * h);
    }
    const auto& big = subsets(n, k + 1);
    Vector out = zeros(big.size());
    for (std::size_t r = 0; r < big.size(); ++r) {
      const auto& kset = big[r];
      for (int m = 0; m <= k; ++m) {
        std::vector<int> rest;
        for (int l = 0; l <= k; ++l)
          if (l != m) rest.push_back(kset[l]);
        const double sign = m % 2 ? -1.0 : 1.0;
        out[static_cast<Eigen::Index>(r)] +=
            sign * partial[static_cast<std::size_t>(kset[m])][static_cast<Eigen::Index>(subset_rank(n, rest))];
      }
    }
    return out;
  };
  return KForm(n, k + 1, std::move(coeffs));
}

Vector pullback_coefficients(const Matrix& jacobian, int degree, const Vector& target) {
  const int n = static_cast<int>(jacobian.rows());
  const int m = static_cast<int>(jacobian.cols());
  if (degree == 0) return target;
  const auto& src = subsets(m, degree);
  const auto& dst = subsets(n, degree);
  Vector out = zeros(src.size());
  Matrix block(degree, degree);
  for (std::size_t ri = 0; ri < src.size(); ++ri) {
    double acc = 0.0;
    for (std::size_t rk = 0; rk < dst.size(); ++rk) {
      const double c = target[static_cast<Eigen::Index>(rk)];
      if (c == 0.0) continue;
      for (int a = 0; a < degree; ++a)
        for (int b = 0; b < degree; ++b) block(a, b) = jacobian(dst[rk][a], src[ri][b]);
      acc += c * block.determinant();
    }
    out[static_cast<Eigen::Index>(ri)] = acc;
  }
  return out;
}

KForm pullback(const ChartMap& phi, const KForm& f) {
  if (phi.target_dim != f.dim())
    throw Error(ErrorCode::kDimensionMismatch, "pullback: map target dimension != form dimension");
  if (f.degree() > phi.source_dim)
    throw Error(ErrorCode::kDegreeOverflow, "pullback: form degree exceeds source dimension");
  const int k = f.degree();
  KForm::CoeffFn coeffs = [phi, f, k](const Point& x) {
    return pullback_coefficients(phi.jacobian(x), k, f.coefficients(phi.map(x)));
  };
  KForm::CoeffFn derivative;
  if (f.has_analytic_derivative() && k + 1 <= phi.source_dim) {
    // d commutes with pullback.
    derivative = [phi, f, k](const Point& x) {
      return pullback_coefficients(phi.jacobian(x), k + 1, f.derivative_coefficients(phi.map(x)));
    };
  }
  return KForm(phi.source_dim, k, std::move(coeffs), std::move(derivative));
}

KForm power(const KForm& f, int m) {
  if (m < 0) throw Error(ErrorCode::kInvalidArgument, "negative exterior power");
  if (static_cast<long>(m) * f.degree() > f.dim())
    throw Error(ErrorCode::kDegreeOverflow, "exterior power exceeds chart dimension");
  KForm result = KForm::constant(f.dim(), 0, Vector::Ones(1));
  for (int i = 0; i < m; ++i) result = wedge(result, f);
  return result;
}

Matrix two_form_matrix(const KForm& w, const Point& p) {
  if (w.degree() != 2) throw Error(ErrorCode::kInvalidArgument, "two_form_matrix needs a 2-form");
  const int n = w.dim();
  const Vector c = w.coefficients(p);
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      out(i, j) = c[r];
      out(j, i) = -c[r];
      ++r;
    }
  return out;
}

double max_abs_coefficient(const KForm& f, std::span<const Point> samples) {
  double worst = 0.0;
  for (const auto& p : samples) {
    const Vector c = f.coefficients(p);
    if (c.size() > 0) worst = std::max(worst, c.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace cosymlab
