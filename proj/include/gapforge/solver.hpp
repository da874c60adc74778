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
// Exact solvers for the distortion-constrained leakage minimization over
// mechanism tables on finite alphabets:
//   - mutual-information leakage: projected gradient descent with a growing
//     quadratic penalty on the distortion constraint (the objective is
//     convex in the channel for fixed P(Y));
//   - MAP-accuracy leakage: piecewise-linear, solved exactly as a linear
//     program (min Σ_x̂ t_x̂, t_x̂ ≥ Σ_x P(x,y) q[x][y][x̂]);
//   - a brute-force simplex-grid oracle and a tradeoff-curve sweeper.

#ifndef GAPFORGE_SOLVER_HPP_
#define GAPFORGE_SOLVER_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <vector>

#include "gapforge/adversary.hpp"
#include "gapforge/errors.hpp"
#include "gapforge/probability.hpp"
#include "gapforge/simplex_lp.hpp"

namespace gapforge {

struct SolverConfig {
  double budget = 0.0;
  long max_iters = 50000;
  double step_size = 0.5;
  double penalty_init = 10.0;
  double penalty_growth = 2.0;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct MechanismSolution {
  Mechanism mechanism;
  double leakage = 0.0;
  double achieved_distortion = 0.0;
  long iterations = 0;
  bool converged = false;
};

struct TradeoffPoint {
  double budget = 0.0;
  double leakage_zero_one = 0.0;
  double leakage_log = 0.0;  // bits
  double achieved_distortion = 0.0;
  bool converged = true;
};

// Euclidean projection onto the probability simplex (sort-based).
inline void project_to_simplex(std::span<double> v) {
  const std::size_t n = v.size();
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = std::max(0.0, v[i] - theta);
}

namespace detail {

// Precomputed shapes for a solve over q indexed [x][y][x̂] (flat).
struct Problem {
  std::size_t nx, ny, nk;
  std::vector<double> pxy;        // P(x,y), flat [x][y]
  std::vector<double> py;         // P(y)
  std::vector<double> dist_coef;  // P(x,y) * d(x̂,x), flat like q
  double budget;

  Problem(const JointDistribution& j, const DistortionMeasure& d,
          const Alphabet& xhat, double budget_in)
      : nx(j.x_alphabet().size()),
        ny(j.y_alphabet().size()),
        nk(xhat.size()),
        budget(budget_in) {
    pxy.resize(nx * ny);
    py.assign(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        pxy[x * ny + y] = j.p(x, y);
        py[y] += j.p(x, y);
      }
    dist_coef.resize(nx * ny * nk);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t k = 0; k < nk; ++k)
          dist_coef[(x * ny + y) * nk + k] =
              j.p(x, y) * d.value(xhat, j.x_alphabet(), k, x);
  }

  double distortion(std::span<const double> q) const {
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) total += dist_coef[i] * q[i];
    return total;
  }

  // Output joint p(x̂, y) for a raw (possibly off-simplex) table.
  std::vector<double> out_joint(std::span<const double> q) const {
    std::vector<double> out(nk * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = pxy[x * ny + y];
        if (p == 0.0) continue;
        const std::size_t base = (x * ny + y) * nk;
        for (std::size_t k = 0; k < nk; ++k) out[k * ny + y] += p * q[base + k];
      }
    return out;
  }
};

// I(X̂;Y) in bits of the table induced by q, evaluated directly from the
// (possibly unnormalized) output table so finite differencing of raw q
// entries is well defined.
inline double mi_objective_raw(const Problem& prob, std::span<const double> q) {
  const std::vector<double> out = prob.out_joint(q);
  std::vector<double> pk(prob.nk, 0.0), py(prob.ny, 0.0);
  for (std::size_t k = 0; k < prob.nk; ++k)
    for (std::size_t y = 0; y < prob.ny; ++y) {
      pk[k] += out[k * prob.ny + y];
      py[y] += out[k * prob.ny + y];
    }
  double bits = 0.0;
  for (std::size_t k = 0; k < prob.nk; ++k)
    for (std::size_t y = 0; y < prob.ny; ++y) {
      const double p = out[k * prob.ny + y];
      if (p > 0.0) bits += p * std::log2(p / (pk[k] * py[y]));
    }
  return bits;
}

// Closed-form partial derivatives of mi_objective_raw with respect to every
// q entry: dI/dq[x][y][x̂] = P(x,y) * (log2(p(x̂,y)/(p(x̂)p(y))) - 1/ln2).
// The constant term is shared within each (x,y) row, so it vanishes under
// simplex projection but is required to match unconstrained finite
// differences.
inline std::vector<double> mi_gradient_raw(const Problem& prob,
                                           std::span<const double> q) {
  const std::vector<double> out = prob.out_joint(q);
  std::vector<double> pk(prob.nk, 0.0), py(prob.ny, 0.0);
  for (std::size_t k = 0; k < prob.nk; ++k)
    for (std::size_t y = 0; y < prob.ny; ++y) {
      pk[k] += out[k * prob.ny + y];
      py[y] += out[k * prob.ny + y];
    }
  constexpr double kFloor = 1e-30;
  constexpr double kInvLn2 = 1.4426950408889634;
  std::vector<double> grad(q.size(), 0.0);
  for (std::size_t x = 0; x < prob.nx; ++x)
    for (std::size_t y = 0; y < prob.ny; ++y) {
      const double p = prob.pxy[x * prob.ny + y];
      if (p == 0.0) continue;
      const std::size_t base = (x * prob.ny + y) * prob.nk;
      for (std::size_t k = 0; k < prob.nk; ++k) {
        const double pky = std::max(out[k * prob.ny + y], kFloor);
        const double ratio =
            pky / (std::max(pk[k], kFloor) * std::max(py[y], kFloor));
        grad[base + k] = p * (std::log2(ratio) - kInvLn2);
      }
    }
  return grad;
}

}  // namespace detail

// Convex minimization of I(g(X,Y);Y) subject to E[d] <= budget.
// Projected gradient with backtracking line search inside a growing
// quadratic-penalty loop; uniform-channel initialization; deterministic.
inline MechanismSolution solve_mi_gap(const JointDistribution& j,
                                      const DistortionMeasure& d,
                                      const SolverConfig& cfg,
                                      const Alphabet* xhat_alphabet = nullptr) {
  const Alphabet xhat = xhat_alphabet ? *xhat_alphabet : j.x_alphabet();
  const detail::Problem prob(j, d, xhat, cfg.budget);
  const std::size_t n = prob.nx * prob.ny * prob.nk;
  std::vector<double> q(n, 1.0 / static_cast<double>(prob.nk));

  double rho = cfg.penalty_init;
  constexpr double kRhoMax = 1e13;

  auto penalized = [&](std::span<const double> qq) {
    const double viol = std::max(0.0, prob.distortion(qq) - cfg.budget);
    return detail::mi_objective_raw(prob, qq) + rho * viol * viol;
  };

  long iters = 0;
  bool converged = false;
  int stall = 0;
  double best_f = penalized(q);
  double step = cfg.step_size;
  std::vector<double> trial(n);

  while (iters < cfg.max_iters) {
    const double viol = std::max(0.0, prob.distortion(q) - cfg.budget);
    std::vector<double> grad = detail::mi_gradient_raw(prob, q);
    if (viol > 0.0)
      for (std::size_t i = 0; i < n; ++i)
        grad[i] += 2.0 * rho * viol * prob.dist_coef[i];

    const double f0 = penalized(q);
    double t = step;
    double f1 = f0;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = q[i] - t * grad[i];
      for (std::size_t r = 0; r < prob.nx * prob.ny; ++r)
        project_to_simplex(
            std::span<double>(trial.data() + r * prob.nk, prob.nk));
      f1 = penalized(trial);
      if (f1 <= f0 || t < 1e-16) break;
      t *= 0.5;
    }
    q = trial;
    step = std::min(cfg.step_size, t * 2.0);
    ++iters;

    if (best_f - f1 < cfg.tolerance) {
      if (++stall >= 50) {
        const double v = std::max(0.0, prob.distortion(q) - cfg.budget);
        if (v <= cfg.tolerance) {
          converged = true;
          break;
        }
        rho = std::min(rho * cfg.penalty_growth, kRhoMax);
        stall = 0;
        step = cfg.step_size;
        best_f = penalized(q);
      }
    } else {
      stall = 0;
      best_f = f1;
    }
  }

  // Snap tiny negatives / renormalize rows before constructing the result.
  for (std::size_t r = 0; r < prob.nx * prob.ny; ++r) {
    double total = 0.0;
    for (std::size_t k = 0; k < prob.nk; ++k) total += q[r * prob.nk + k];
    for (std::size_t k = 0; k < prob.nk; ++k) q[r * prob.nk + k] /= total;
  }
  Mechanism mech(j.x_alphabet(), j.y_alphabet(), xhat, std::move(q));
  const double achieved = expected_distortion(j, mech, d);
  const double leak = mutual_information(push_through(j, mech));
  if (!converged && achieved <= cfg.budget + cfg.tolerance && iters >= cfg.max_iters)
    converged = false;  // NotConverged: best iterate returned, flagged.
  return MechanismSolution{std::move(mech), leak, achieved, iters, converged};
}

// Exact minimization of the MAP accuracy Σ_x̂ max_y P(x̂,y) subject to the
// distortion budget, via the equivalent linear program:
//   min Σ_x̂ t_x̂
//   s.t. t_x̂ ≥ Σ_x P(x,y) q[x][y][x̂]  for all (x̂, y)
//        Σ_x̂ q[x][y][x̂] = 1, q ≥ 0, E[d] ≤ budget.
inline MechanismSolution solve_map_gap(const JointDistribution& j,
                                       const DistortionMeasure& d,
                                       const SolverConfig& cfg,
                                       const Alphabet* xhat_alphabet = nullptr) {
  const Alphabet xhat = xhat_alphabet ? *xhat_alphabet : j.x_alphabet();
  const detail::Problem prob(j, d, xhat, cfg.budget);
  const std::size_t nq = prob.nx * prob.ny * prob.nk;
  const std::size_t nt = prob.nk;
  const std::size_t n_slack_t = prob.nk * prob.ny;
  // Variables: [q | t | slack_t | slack_d]
  const std::size_t n = nq + nt + n_slack_t + 1;
  const std::size_t m = prob.nx * prob.ny + prob.nk * prob.ny + 1;
  std::vector<std::vector<double>> A(m, std::vector<double>(n, 0.0));
  std::vector<double> b(m, 0.0);
  std::vector<double> c(n, 0.0);

  std::size_t row = 0;
  for (std::size_t r = 0; r < prob.nx * prob.ny; ++r, ++row) {
    for (std::size_t k = 0; k < prob.nk; ++k) A[row][r * prob.nk + k] = 1.0;
    b[row] = 1.0;
  }
  // t_x̂ - Σ_x P(x,y) q[x][y][x̂] - s = 0  ≡  t ≥ Σ P q
  for (std::size_t k = 0; k < prob.nk; ++k)
    for (std::size_t y = 0; y < prob.ny; ++y, ++row) {
      for (std::size_t x = 0; x < prob.nx; ++x)
        A[row][(x * prob.ny + y) * prob.nk + k] = -prob.pxy[x * prob.ny + y];
      A[row][nq + k] = 1.0;
      A[row][nq + nt + k * prob.ny + y] = -1.0;
      b[row] = 0.0;
    }
  for (std::size_t i = 0; i < nq; ++i) A[row][i] = prob.dist_coef[i];
  A[row][n - 1] = 1.0;
  b[row] = cfg.budget;

  for (std::size_t k = 0; k < nt; ++k) c[nq + k] = 1.0;

  const LpResult lp = solve_lp(A, b, c, cfg.max_iters);
  if (!lp.feasible)
    throw Error("solve_map_gap: no mechanism satisfies the distortion budget");

  std::vector<double> q(lp.x.begin(), lp.x.begin() + nq);
  for (std::size_t r = 0; r < prob.nx * prob.ny; ++r) {
    double total = 0.0;
    for (std::size_t k = 0; k < prob.nk; ++k) {
      double& v = q[r * prob.nk + k];
      v = std::clamp(v, 0.0, 1.0);
      total += v;
    }
    for (std::size_t k = 0; k < prob.nk; ++k) q[r * prob.nk + k] /= total;
  }
  Mechanism mech(j.x_alphabet(), j.y_alphabet(), xhat, std::move(q));
  const double achieved = expected_distortion(j, mech, d);
  const double leak = map_accuracy(push_through(j, mech));
  return MechanismSolution{std::move(mech), leak, achieved, lp.pivots, lp.optimal};
}

struct OracleResult {
  MechanismSolution solution;
  // Upper bound on |oracle minimum - true minimum| from the grid spacing
  // (objective Lipschitz/continuity term plus feasibility restoration).
  double resolution_bound = 0.0;
};

namespace detail {

inline void enumerate_simplex_grid(std::size_t bins, std::size_t steps_left,
                                   std::vector<double>& current, double grid,
                                   std::vector<std::vector<double>>& out) {
  if (current.size() + 1 == bins) {
    current.push_back(static_cast<double>(steps_left) * grid);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (std::size_t s = 0; s <= steps_left; ++s) {
    current.push_back(static_cast<double>(s) * grid);
    enumerate_simplex_grid(bins, steps_left - s, current, grid, out);
    current.pop_back();
  }
}

inline double binary_entropy(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

}  // namespace detail

// Exhaustive search over all mechanisms whose rows lie on the simplex grid
// with the given spacing; returns the feasible leakage minimizer. Guarded
// so the enumeration count stays below 1e8.
inline OracleResult brute_force_oracle(const JointDistribution& j,
                                       const DistortionMeasure& d, double budget,
                                       double grid, LossFunction loss,
                                       const Alphabet* xhat_alphabet = nullptr) {
  const Alphabet xhat = xhat_alphabet ? *xhat_alphabet : j.x_alphabet();
  const detail::Problem prob(j, d, xhat, budget);
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid));
  if (steps == 0) throw Error("oracle: grid must be <= 1");

  // Count C(steps + nk - 1, nk - 1) grid points per row and the full product
  // over rows before allocating anything.
  const std::size_t nrows = prob.nx * prob.ny;
  double per_row = 1.0;
  for (std::size_t i = 1; i < prob.nk; ++i)
    per_row *= static_cast<double>(steps + i) / static_cast<double>(i);
  const double total = std::pow(per_row, static_cast<double>(nrows));
  if (!(total <= 1e8))
    throw TooLarge("oracle: about " + std::to_string(total) +
                   " grid mechanisms exceed the 1e8 evaluation guard");

  std::vector<std::vector<double>> points;
  {
    std::vector<double> cur;
    detail::enumerate_simplex_grid(prob.nk, steps, cur, 1.0 / steps, points);
  }

  // Per-row, per-point distortion contributions and output-joint deltas.
  std::vector<std::vector<double>> row_dist(nrows,
                                            std::vector<double>(points.size()));
  for (std::size_t r = 0; r < nrows; ++r)
    for (std::size_t p = 0; p < points.size(); ++p) {
      double s = 0.0;
      for (std::size_t k = 0; k < prob.nk; ++k)
        s += prob.dist_coef[r * prob.nk + k] * points[p][k];
      row_dist[r][p] = s;
    }

  double best_leak = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_choice;
  std::vector<std::size_t> choice(nrows, 0);
  std::vector<std::vector<double>> partial_joint(
      nrows + 1, std::vector<double>(prob.nk * prob.ny, 0.0));
  std::vector<double> partial_dist(nrows + 1, 0.0);

  auto eval_leak = [&](const std::vector<double>& out) {
    if (loss == LossFunction::kZeroOne) {
      double acc = 0.0;
      for (std::size_t k = 0; k < prob.nk; ++k) {
        double mx = 0.0;
        for (std::size_t y = 0; y < prob.ny; ++y)
          mx = std::max(mx, out[k * prob.ny + y]);
        acc += mx;
      }
      return acc;
    }
    std::vector<double> pk(prob.nk, 0.0);
    double bits = 0.0;
    for (std::size_t k = 0; k < prob.nk; ++k)
      for (std::size_t y = 0; y < prob.ny; ++y) pk[k] += out[k * prob.ny + y];
    for (std::size_t k = 0; k < prob.nk; ++k)
      for (std::size_t y = 0; y < prob.ny; ++y) {
        const double p = out[k * prob.ny + y];
        if (p > 0.0) bits += p * std::log2(p / (pk[k] * prob.py[y]));
      }
    return bits;
  };

  // Depth-first product over rows with distortion pruning.
  std::size_t depth = 0;
  while (true) {
    if (depth == nrows) {
      const double leak = eval_leak(partial_joint[nrows]);
      if (leak < best_leak - 1e-15) {
        best_leak = leak;
        best_choice = choice;
      }
      --depth;
      ++choice[depth];
    } else if (choice[depth] >= points.size()) {
      if (depth == 0) break;
      choice[depth] = 0;
      --depth;
      ++choice[depth];
    } else if (partial_dist[depth] + row_dist[depth][choice[depth]] >
               budget + 1e-12) {
      ++choice[depth];
    } else {
      const std::size_t p = choice[depth];
      const std::size_t x = depth / prob.ny;
      const std::size_t y = depth % prob.ny;
      partial_dist[depth + 1] = partial_dist[depth] + row_dist[depth][p];
      partial_joint[depth + 1] = partial_joint[depth];
      const double mass = prob.pxy[depth];
      for (std::size_t k = 0; k < prob.nk; ++k)
        partial_joint[depth + 1][k * prob.ny + y] += mass * points[p][k];
      (void)x;
      ++depth;
      if (depth < nrows) choice[depth] = 0;
    }
  }

  if (best_choice.empty())
    throw Error("oracle: no feasible grid mechanism within the budget");

  std::vector<double> q(nrows * prob.nk);
  for (std::size_t r = 0; r < nrows; ++r)
    for (std::size_t k = 0; k < prob.nk; ++k)
      q[r * prob.nk + k] = points[best_choice[r]][k];
  Mechanism mech(j.x_alphabet(), j.y_alphabet(), xhat, std::move(q));
  const double achieved = expected_distortion(j, mech, d);

  // Resolution bound: restoring feasibility of the rounded optimum shifts
  // each row by at most `per_row_l1` in L1; the objective moves by at most
  // the corresponding continuity bound.
  double max_d = 0.0;
  for (std::size_t x = 0; x < prob.nx; ++x)
    for (std::size_t k = 0; k < prob.nk; ++k)
      max_d = std::max(max_d, d.value(xhat, j.x_alphabet(), k, x));
  const double gridw = 1.0 / static_cast<double>(steps);
  const double lambda =
      budget > 0.0 ? std::min(1.0, gridw * max_d / budget) : 1.0;
  const double per_row_l1 =
      2.0 * lambda + static_cast<double>(prob.nk) * gridw;
  double bound;
  if (loss == LossFunction::kZeroOne) {
    bound = per_row_l1;
  } else {
    const double tv = std::min(0.5 * per_row_l1, 0.5);
    bound = 2.0 * (tv * std::log2(std::max<double>(2.0, prob.nk * prob.ny)) +
                   detail::binary_entropy(tv));
  }

  return OracleResult{
      MechanismSolution{std::move(mech), best_leak, achieved, 0, true}, bound};
}

// One TradeoffPoint per budget (ascending), each from both solvers. Points
// may be evaluated concurrently; each derives its seed as seed^index and the
// emitted curve is identical for any parallelism degree.
inline std::vector<TradeoffPoint> tradeoff_curve(const JointDistribution& j,
                                                 const DistortionMeasure& d,
                                                 const std::vector<double>& budgets,
                                                 const SolverConfig& cfg,
                                                 int parallelism = 1) {
  for (std::size_t i = 1; i < budgets.size(); ++i)
    if (budgets[i] < budgets[i - 1])
      throw Error("tradeoff_curve: budgets must be sorted ascending");

  auto solve_point = [&](std::size_t i) {
    SolverConfig point_cfg = cfg;
    point_cfg.budget = budgets[i];
    point_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    const MechanismSolution map = solve_map_gap(j, d, point_cfg);
    const MechanismSolution mi = solve_mi_gap(j, d, point_cfg);
    TradeoffPoint pt;
    pt.budget = budgets[i];
    pt.leakage_zero_one = map.leakage;
    pt.leakage_log = mi.leakage;
    pt.achieved_distortion = std::max(map.achieved_distortion, mi.achieved_distortion);
    pt.converged = map.converged && mi.converged;
    return pt;
  };

  std::vector<TradeoffPoint> curve(budgets.size());
  if (parallelism <= 1) {
    for (std::size_t i = 0; i < budgets.size(); ++i) curve[i] = solve_point(i);
    return curve;
  }
  std::vector<std::future<TradeoffPoint>> futures;
  futures.reserve(budgets.size());
  std::atomic<std::size_t> next{0};
  // Bounded fan-out: launch `parallelism` workers over a shared index.
  std::vector<std::future<void>> workers;
  for (int w = 0; w < parallelism; ++w)
    workers.push_back(std::async(std::launch::async, [&]() {
      for (std::size_t i = next.fetch_add(1); i < budgets.size();
           i = next.fetch_add(1))
        curve[i] = solve_point(i);
    }));
  for (auto& f : workers) f.get();
  return curve;
}

}  // namespace gapforge

#endif  // GAPFORGE_SOLVER_HPP_
