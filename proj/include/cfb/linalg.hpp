#pragma once

// Small dense matrix kernels (row-major std::vector<double>, dimensions <= 16
// in practice). Direct Gaussian elimination / LU with partial pivoting; no
// external dependency so that tolerance semantics stay fully pinned:
// a Gram matrix counts as singular when its smallest LU pivot is
// <= 1e-12 * trace, in which case quadratic forms evaluate to +infinity.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfb::linalg {

inline constexpr double kSingularRelTol = 1e-12;

// LU factorization with partial pivoting, in place. Returns the permutation
// sign and the pivot magnitudes' minimum; `a` holds L (unit diagonal, below)
// and U (on/above diagonal), `perm` the row order.
struct LuResult {
  std::vector<double> lu;
  std::vector<int> perm;
  int sign = 1;
  double min_abs_pivot = 0.0;
};

inline LuResult lu_factor(std::vector<double> a, int n) {
  if (n <= 0 || static_cast<int>(a.size()) != n * n)
    throw std::invalid_argument("lu_factor: bad dimensions");
  LuResult r;
  r.perm.resize(n);
  for (int i = 0; i < n; ++i) r.perm[i] = i;
  r.min_abs_pivot = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(a[r.perm[k] * n + k]);
    for (int i = k + 1; i < n; ++i) {
      const double v = std::fabs(a[r.perm[i] * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      std::swap(r.perm[k], r.perm[piv]);
      r.sign = -r.sign;
    }
    const double pivot = a[r.perm[k] * n + k];
    if (std::fabs(pivot) < r.min_abs_pivot) r.min_abs_pivot = std::fabs(pivot);
    if (pivot == 0.0) continue;  // column already eliminated; stays singular
    for (int i = k + 1; i < n; ++i) {
      const double m = a[r.perm[i] * n + k] / pivot;
      a[r.perm[i] * n + k] = m;
      for (int j = k + 1; j < n; ++j) a[r.perm[i] * n + j] -= m * a[r.perm[k] * n + j];
    }
  }
  r.lu = std::move(a);
  return r;
}

inline double determinant(const std::vector<double>& a, int n) {
  LuResult f = lu_factor(a, n);
  double det = f.sign;
  for (int k = 0; k < n; ++k) det *= f.lu[f.perm[k] * n + k];
  return det;
}

inline std::vector<double> lu_solve(const LuResult& f, int n,
                                    const std::vector<double>& b) {
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[f.perm[i]];
    for (int j = 0; j < i; ++j) s -= f.lu[f.perm[i] * n + j] * y[j];
    y[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu[f.perm[i] * n + j] * x[j];
    x[i] = s / f.lu[f.perm[i] * n + i];
  }
  return x;
}

inline double trace(const std::vector<double>& a, int n) {
  double t = 0.0;
  for (int i = 0; i < n; ++i) t += a[i * n + i];
  return t;
}

// Inverse of a Gram matrix, or nullopt when singular at tolerance
// (smallest |pivot| <= 1e-12 * trace). Quadratic forms against a singular
// Gram are +infinity by convention.
inline std::optional<std::vector<double>> gram_inverse(
    const std::vector<double>& g, int n) {
  const double tol = kSingularRelTol * trace(g, n);
  LuResult f = lu_factor(g, n);
  if (!(f.min_abs_pivot > tol)) return std::nullopt;
  std::vector<double> inv(n * n);
  std::vector<double> e(n, 0.0);
  for (int c = 0; c < n; ++c) {
    e[c] = 1.0;
    std::vector<double> col = lu_solve(f, n, e);
    for (int r = 0; r < n; ++r) inv[r * n + c] = col[r];
    e[c] = 0.0;
  }
  return inv;
}

inline double quad_form(const std::vector<double>& m, int n,
                        const std::vector<double>& v) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += m[i * n + j] * v[j];
    s += v[i] * row;
  }
  return s;
}

// v' G^{-1} v with the singular-Gram => +infinity convention.
inline double quad_form_inverse(const std::vector<double>& g, int n,
                                const std::vector<double>& v) {
  auto inv = gram_inverse(g, n);
  if (!inv) return std::numeric_limits<double>::infinity();
  return quad_form(*inv, n, v);
}

// Indices (in input order) of a maximal linearly independent subset, found by
// sequential elimination against the already-accepted vectors; a vector is
// dependent when its residual drops below rel_tol times its own norm.
inline std::vector<int> independent_subset(
    const std::vector<std::vector<double>>& vecs, double rel_tol) {
  std::vector<int> picked;
  std::vector<std::vector<double>> basis;  // orthogonalized accepted vectors
  if (vecs.empty()) return picked;
  const std::size_t d = vecs[0].size();
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    if (vecs[i].size() != d)
      throw std::invalid_argument("independent_subset: mixed dimensions");
    std::vector<double> r = vecs[i];
    double norm0 = 0.0;
    for (double x : r) norm0 += x * x;
    norm0 = std::sqrt(norm0);
    for (const auto& b : basis) {
      double dot = 0.0, bb = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dot += r[j] * b[j];
        bb += b[j] * b[j];
      }
      const double c = dot / bb;
      for (std::size_t j = 0; j < d; ++j) r[j] -= c * b[j];
    }
    double resid = 0.0;
    for (double x : r) resid += x * x;
    resid = std::sqrt(resid);
    if (norm0 > 0.0 && resid > rel_tol * norm0) {
      picked.push_back(static_cast<int>(i));
      basis.push_back(std::move(r));
      if (static_cast<std::size_t>(basis.size()) == d) break;
    }
  }
  return picked;
}

inline int rank(const std::vector<std::vector<double>>& vecs, double rel_tol) {
  return static_cast<int>(independent_subset(vecs, rel_tol).size());
}

// Orthonormal basis of span{vecs} (deterministic Gram-Schmidt over the first
// independent subset in input order).
inline std::vector<std::vector<double>> orthonormal_basis(
    const std::vector<std::vector<double>>& vecs, double rel_tol) {
  std::vector<std::vector<double>> q;
  for (int idx : independent_subset(vecs, rel_tol)) {
    std::vector<double> r = vecs[idx];
    const std::size_t d = r.size();
    for (const auto& b : q) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += r[j] * b[j];
      for (std::size_t j = 0; j < d; ++j) r[j] -= dot * b[j];
    }
    double norm = 0.0;
    for (double x : r) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : r) x /= norm;
    q.push_back(std::move(r));
  }
  return q;
}

// Solves [basis] * b = a (columns = basis vectors, possibly fewer than the
// ambient dimension) by Gaussian elimination with partial pivoting on the
// augmented system; rejects when `a` lies outside the span.
inline std::vector<double> solve_in_span(
    const std::vector<std::vector<double>>& basis, const std::vector<double>& a,
    double rel_tol = 1e-9) {
  if (basis.empty()) throw std::invalid_argument("solve_in_span: empty basis");
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(basis.size());
  for (const auto& b : basis)
    if (static_cast<int>(b.size()) != rows)
      throw std::invalid_argument("solve_in_span: dimension mismatch");
  // Augmented matrix [B | a], rows x (cols+1).
  std::vector<double> m(rows * (cols + 1));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m[i * (cols + 1) + j] = basis[j][i];
    m[i * (cols + 1) + cols] = a[i];
  }
  std::vector<int> pivot_row(cols, -1);
  int prow = 0;
  for (int j = 0; j < cols && prow < rows; ++j) {
    int piv = -1;
    double best = 0.0;
    for (int i = prow; i < rows; ++i) {
      const double v = std::fabs(m[i * (cols + 1) + j]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv < 0) continue;
    for (int k = 0; k <= cols; ++k)
      std::swap(m[prow * (cols + 1) + k], m[piv * (cols + 1) + k]);
    const double p = m[prow * (cols + 1) + j];
    for (int i = prow + 1; i < rows; ++i) {
      const double f = m[i * (cols + 1) + j] / p;
      for (int k = j; k <= cols; ++k)
        m[i * (cols + 1) + k] -= f * m[prow * (cols + 1) + k];
    }
    pivot_row[j] = prow;
    ++prow;
  }
  std::vector<double> b(cols, 0.0);
  for (int j = cols - 1; j >= 0; --j) {
    if (pivot_row[j] < 0)
      throw std::invalid_argument("solve_in_span: basis is rank deficient");
    const int i = pivot_row[j];
    double s = m[i * (cols + 1) + cols];
    for (int k = j + 1; k < cols; ++k) s -= m[i * (cols + 1) + k] * b[k];
    b[j] = s / m[i * (cols + 1) + j];
  }
  // Residual check over the original system.
  double resid = 0.0, scale = 1.0;
  for (int i = 0; i < rows; ++i) {
    double s = a[i];
    for (int j = 0; j < cols; ++j) s -= basis[j][i] * b[j];
    resid = std::max(resid, std::fabs(s));
    scale = std::max(scale, std::fabs(a[i]));
  }
  if (resid > rel_tol * scale)
    throw std::invalid_argument(
        "solve_in_span: vector outside basis span (residual " +
        std::to_string(resid) + ")");
  return b;
}

}  // namespace cfb::linalg

namespace cfb {
using linalg::determinant;
using linalg::gram_inverse;
using linalg::independent_subset;
using linalg::kSingularRelTol;
using linalg::lu_factor;
using linalg::lu_solve;
using linalg::LuResult;
using linalg::orthonormal_basis;
using linalg::quad_form;
using linalg::quad_form_inverse;
using linalg::rank;
using linalg::solve_in_span;
using linalg::trace;
}  // namespace cfb
