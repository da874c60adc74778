// Copyright 2026 The gap-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Dense two-phase primal simplex for the small, highly degenerate linear
// programs arising from finite-alphabet channel optimization. Bland's rule
// throughout, so the method terminates on degenerate instances and is
// deterministic.

#ifndef GAPFORGE_SIMPLEX_LP_HPP_
#define GAPFORGE_SIMPLEX_LP_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "gapforge/errors.hpp"

namespace gapforge {

struct LpResult {
  std::vector<double> x;
  double objective = 0.0;
  long pivots = 0;
  bool optimal = false;
  bool feasible = true;
};

// Minimize c^T x subject to A x = b, x >= 0, with b >= 0 (callers negate
// rows as needed). `pivot_limit` bounds total pivots across both phases.
inline LpResult solve_lp(const std::vector<std::vector<double>>& A,
                         const std::vector<double>& b,
                         const std::vector<double>& c, long pivot_limit) {
  constexpr double kEps = 1e-9;
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  // Tableau columns: n structural + m artificial + 1 rhs.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (A[i].size() != n) throw DimensionMismatch("lp: ragged constraint matrix");
    if (b[i] < 0.0) throw Error("lp: negative rhs");
    for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
    t[i][n + i] = 1.0;
    t[i][cols - 1] = b[i];
    basis[i] = n + i;
  }

  LpResult result;
  result.x.assign(n, 0.0);

  auto pivot = [&](std::size_t row, std::size_t col) {
    const double piv = t[row][col];
    for (std::size_t j = 0; j < cols; ++j) t[row][j] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      const double factor = t[i][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= factor * t[row][j];
    }
    basis[row] = col;
    ++result.pivots;
  };

  // Runs Bland-rule simplex for the given cost vector over the first
  // `ncols` columns. Returns false on pivot-limit exhaustion.
  auto run = [&](const std::vector<double>& cost, std::size_t ncols) -> bool {
    while (true) {
      if (result.pivots >= pivot_limit) return false;
      // Reduced costs: z_j = cost_j - cost_B^T (B^-1 A_j).
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        double z = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
          const double cb = cost[basis[i]];
          if (cb != 0.0) z -= cb * t[i][j];
        }
        if (z < -kEps) {
          enter = j;
          break;  // Bland: smallest improving index.
        }
      }
      if (enter == ncols) return true;  // optimal
      std::size_t leave = m;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] > kEps) {
          const double ratio = t[i][cols - 1] / t[i][enter];
          if (leave == m || ratio < best_ratio - kEps ||
              (std::abs(ratio - best_ratio) <= kEps && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave == m) throw Error("lp: unbounded");
      pivot(leave, enter);
    }
  };

  // Phase 1: drive the artificials to zero.
  std::vector<double> phase1_cost(n + m, 0.0);
  for (std::size_t j = n; j < n + m; ++j) phase1_cost[j] = 1.0;
  if (!run(phase1_cost, n + m)) {
    result.optimal = false;
    return result;
  }
  double phase1_obj = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) phase1_obj += t[i][cols - 1];
  if (phase1_obj > 1e-7) {
    result.feasible = false;
    return result;
  }
  // Pivot any residual (zero-valued) artificials out of the basis.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(t[i][j]) > kEps) {
        col = j;
        break;
      }
    }
    if (col < n) pivot(i, col);
    // Otherwise the row is redundant; the artificial stays at value zero.
  }

  // Phase 2 over structural columns only.
  std::vector<double> phase2_cost(n + m, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = c[j];
  result.optimal = run(phase2_cost, n);

  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) result.x[basis[i]] = t[i][cols - 1];
  result.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.objective += c[j] * result.x[j];
  return result;
}

}  // namespace gapforge

#endif  // GAPFORGE_SIMPLEX_LP_HPP_
