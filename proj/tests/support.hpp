#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cosymlab/forms.hpp"

namespace testsupport {

using cosymlab::Matrix;
using cosymlab::Point;
using cosymlab::Vector;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20261016);
  return engine;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Vector random_vector(int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

inline Point random_point(int n, double lo = -1.0, double hi = 1.0) { return Point(random_vector(n, lo, hi)); }

// Sign of a permutation by counting inversions.
inline int permutation_sign(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return inv % 2 ? -1 : 1;
}

// Leibniz-formula determinant, independent of any factorization.
inline double leibniz_det(const Matrix& m) {
  const int k = static_cast<int>(m.rows());
  std::vector<int> p(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i;
  double total = 0.0;
  do {
    double term = permutation_sign(p);
    for (int i = 0; i < k; ++i) term *= m(i, p[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

// All increasing index tuples of length k from 0..n-1, in lexicographic order.
inline std::vector<std::vector<int>> increasing_tuples(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

// sum_I c_I det(V restricted to rows I), with coefficients given in lexicographic order.
inline double evaluate_oracle(int n, int k, const Vector& coeffs, const Matrix& frame) {
  const auto tuples = increasing_tuples(n, k);
  double total = 0.0;
  for (std::size_t r = 0; r < tuples.size(); ++r) {
    Matrix block(k, k);
    for (int a = 0; a < k; ++a) block.row(a) = frame.row(tuples[r][static_cast<std::size_t>(a)]);
    total += coeffs[static_cast<Eigen::Index>(r)] * leibniz_det(block);
  }
  return total;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testsupport
