#pragma once

// Barycentric spanner over a finite grid of vectors: a nonsingular subset
// such that every grid vector is a linear combination of the subset with
// coefficients in [-1, 1]. Found by exact determinant maximization —
// start from the first independent subset in grid order, then repeatedly
// swap in the grid vector that improves |det| by more than a factor of
// 1 + 1e-12 until no swap does. When the grid spans only a proper subspace,
// the search runs in coordinates over an orthonormal basis of that subspace.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/linalg.hpp"

namespace cfb {

inline constexpr double kSpannerImprovementFactor = 1.0 + 1e-12;
inline constexpr double kSpanRankTol = 1e-9;

struct Spanner {
  std::vector<int> indices;  // positions in the input grid, ascending
  std::vector<std::vector<double>> vectors;
  double abs_det = 0.0;
  int dim = 0;  // rank of the grid = number of members
};

namespace detail {

inline double abs_det_of_rows(const std::vector<std::vector<double>>& rows) {
  const int d = static_cast<int>(rows.size());
  std::vector<double> m(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[static_cast<std::size_t>(i) * d + j] = rows[i][j];
  return std::fabs(determinant(m, d));
}

// Determinant-improvement search assuming the coordinate vectors span R^d.
inline Spanner spanner_full_rank(const std::vector<std::vector<double>>& grid) {
  const int d = static_cast<int>(grid[0].size());
  const std::vector<int> start = independent_subset(grid, kSpanRankTol);
  if (static_cast<int>(start.size()) < d)
    throw std::invalid_argument(
        "barycentric spanner: grid has numerical rank " +
        std::to_string(start.size()) + " < dimension " + std::to_string(d));

  std::vector<int> idx = start;
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(d));
  for (int i : idx) rows.push_back(grid[static_cast<std::size_t>(i)]);
  double best = abs_det_of_rows(rows);

  bool changed = true;
  while (changed) {
    changed = false;
    for (int slot = 0; slot < d; ++slot) {
      int swap_j = -1;
      double swap_det = best * kSpannerImprovementFactor;
      const std::vector<double> kept = rows[static_cast<std::size_t>(slot)];
      for (int j = 0; j < static_cast<int>(grid.size()); ++j) {
        rows[static_cast<std::size_t>(slot)] = grid[static_cast<std::size_t>(j)];
        const double cand = abs_det_of_rows(rows);
        if (cand > swap_det) {
          swap_det = cand;
          swap_j = j;
        }
      }
      if (swap_j >= 0) {
        rows[static_cast<std::size_t>(slot)] = grid[static_cast<std::size_t>(swap_j)];
        idx[static_cast<std::size_t>(slot)] = swap_j;
        best = swap_det;
        changed = true;
      } else {
        rows[static_cast<std::size_t>(slot)] = kept;
      }
    }
  }

  Spanner out;
  out.indices = idx;
  std::sort(out.indices.begin(), out.indices.end());
  for (int i : out.indices) out.vectors.push_back(grid[static_cast<std::size_t>(i)]);
  out.abs_det = best;
  out.dim = d;
  return out;
}

}  // namespace detail

// Spanner of a grid that may live in a proper subspace: the search runs in
// coordinates over an orthonormal basis of span(grid); |det| is reported in
// those coordinates (invariant to the orthonormal basis choice).
inline Spanner barycentric_spanner(const std::vector<std::vector<double>>& grid) {
  if (grid.empty())
    throw std::invalid_argument("barycentric spanner: empty grid");
  const int ambient = static_cast<int>(grid[0].size());
  const std::vector<std::vector<double>> basis =
      orthonormal_basis(grid, kSpanRankTol);
  const int d = static_cast<int>(basis.size());
  if (d == 0)
    throw std::invalid_argument(
        "barycentric spanner: grid has numerical rank 0");

  if (d == ambient) {
    return detail::spanner_full_rank(grid);
  }
  std::vector<std::vector<double>> coords(grid.size(),
                                          std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int k = 0; k < d; ++k) {
      double s = 0.0;
      for (int j = 0; j < ambient; ++j)
        s += basis[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
             grid[i][static_cast<std::size_t>(j)];
      coords[i][static_cast<std::size_t>(k)] = s;
    }
  Spanner reduced = detail::spanner_full_rank(coords);
  Spanner out;
  out.indices = reduced.indices;
  for (int i : out.indices) out.vectors.push_back(grid[static_cast<std::size_t>(i)]);
  out.abs_det = reduced.abs_det;
  out.dim = d;
  return out;
}

// Coefficient vector b with sum_k b_k * basis[k] = a; rejects vectors
// outside the span (relative residual above 1e-9).
inline std::vector<double> coefficients_in_basis(
    const std::vector<double>& a,
    const std::vector<std::vector<double>>& basis) {
  return solve_in_span(basis, a, kSpanRankTol);
}

}  // namespace cfb
