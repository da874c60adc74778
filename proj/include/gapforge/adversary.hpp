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
// Exact optimal adversaries on finite alphabets: the MAP hard-decision rule
// under 0-1 loss and the posterior soft-decision rule under log-loss, plus
// expected-loss evaluation for arbitrary strategies.

#ifndef GAPFORGE_ADVERSARY_HPP_
#define GAPFORGE_ADVERSARY_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gapforge/errors.hpp"
#include "gapforge/probability.hpp"

namespace gapforge {

enum class StrategyKind { kHard, kSoft };
enum class LossFunction { kZeroOne, kLog };

// Hard rule: one y index per x̂. Soft rule: a belief row over Y per x̂.
struct AdversaryStrategy {
  StrategyKind kind;
  std::vector<std::size_t> hard_rule;            // used when kind == kHard
  std::vector<std::vector<double>> soft_rule;    // used when kind == kSoft
};

// MAP decision rule on a joint over (X̂, Y): for every x̂ pick an
// argmax_y P(x̂, y). Ties break to the lowest y index so results are
// deterministic across runs and platforms.
inline AdversaryStrategy map_rule(const JointDistribution& out_joint) {
  const std::size_t nk = out_joint.x_alphabet().size();
  const std::size_t ny = out_joint.y_alphabet().size();
  AdversaryStrategy s{StrategyKind::kHard, {}, {}};
  s.hard_rule.resize(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    std::size_t best = 0;
    for (std::size_t y = 1; y < ny; ++y)
      if (out_joint.p(k, y) > out_joint.p(k, best)) best = y;
    s.hard_rule[k] = best;
  }
  return s;
}

// Posterior belief of Y given X̂: r[x̂][y] = P(x̂,y)/P(x̂). Zero-mass x̂ rows
// fall back to the Y-marginal, keeping the strategy valid and deterministic.
inline AdversaryStrategy posterior_rule(const JointDistribution& out_joint) {
  const std::size_t nk = out_joint.x_alphabet().size();
  const std::size_t ny = out_joint.y_alphabet().size();
  const std::vector<double> y_marginal = marginal(out_joint, Axis::Y);
  AdversaryStrategy s{StrategyKind::kSoft, {}, {}};
  s.soft_rule.assign(nk, std::vector<double>(ny, 0.0));
  for (std::size_t k = 0; k < nk; ++k) {
    double mass = 0.0;
    for (std::size_t y = 0; y < ny; ++y) mass += out_joint.p(k, y);
    if (mass > 0.0) {
      for (std::size_t y = 0; y < ny; ++y) s.soft_rule[k][y] = out_joint.p(k, y) / mass;
    } else {
      s.soft_rule[k] = y_marginal;
    }
  }
  return s;
}

// Eq.-style expected loss of a strategy against a joint over (X̂, Y).
// Zero-one: P(guess != Y). Log: E[log2 1/r(y|x̂)] in bits.
inline double expected_loss(const JointDistribution& out_joint,
                            const AdversaryStrategy& s, LossFunction loss) {
  const std::size_t nk = out_joint.x_alphabet().size();
  const std::size_t ny = out_joint.y_alphabet().size();
  if (loss == LossFunction::kZeroOne) {
    if (s.kind != StrategyKind::kHard)
      throw LossStrategyMismatch("zero-one loss applies only to hard strategies");
    if (s.hard_rule.size() != nk)
      throw DimensionMismatch("hard rule size != |Xhat|");
    double err = 0.0;
    for (std::size_t k = 0; k < nk; ++k)
      for (std::size_t y = 0; y < ny; ++y)
        if (y != s.hard_rule[k]) err += out_joint.p(k, y);
    return err;
  }
  if (s.kind != StrategyKind::kSoft)
    throw LossStrategyMismatch("log-loss applies only to soft strategies");
  if (s.soft_rule.size() != nk)
    throw DimensionMismatch("soft rule size != |Xhat|");
  double bits = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = out_joint.p(k, y);
      if (p <= 0.0) continue;
      const double r = s.soft_rule[k][y];
      if (r <= 0.0)
        throw InfiniteLoss("log-loss: zero belief on positive-mass outcome (" +
                           out_joint.x_alphabet().symbol(k) + "," +
                           out_joint.y_alphabet().symbol(y) + ")");
      bits -= p * std::log2(r);
    }
  }
  return bits;
}

// MAP correct-guess probability Σ_x̂ max_y P(x̂, y) of a joint over (X̂, Y).
inline double map_accuracy(const JointDistribution& out_joint) {
  const std::size_t nk = out_joint.x_alphabet().size();
  const std::size_t ny = out_joint.y_alphabet().size();
  double acc = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    double best = 0.0;
    for (std::size_t y = 0; y < ny; ++y) best = std::max(best, out_joint.p(k, y));
    acc += best;
  }
  return acc;
}

// Leakage of a mechanism against the optimal adversary. Zero-one loss:
// MAP accuracy of the induced (X̂, Y) joint. Log-loss: I(X̂; Y) in bits.
// Higher = worse privacy.
inline double leakage(const JointDistribution& j, const Mechanism& m,
                      LossFunction loss) {
  const JointDistribution out = push_through(j, m);
  if (loss == LossFunction::kZeroOne) return map_accuracy(out);
  return mutual_information(out);
}

}  // namespace gapforge

#endif  // GAPFORGE_ADVERSARY_HPP_
