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

#include <catch2/catch_amalgamated.hpp>

#include "gapforge/adversary.hpp"
#include "gapforge/rng.hpp"
#include "test_util.hpp"

using namespace gapforge;
using gapforge::test::canonical_joint;
using gapforge::test::copy_y_mechanism;
using gapforge::test::random_joint;
using gapforge::test::random_mechanism;

namespace {

// Exhaustive minimum expected 0-1 loss over all |Y|^|Xhat| hard rules.
double best_hard_loss_by_enumeration(const JointDistribution& out_joint) {
  const std::size_t nk = out_joint.x_alphabet().size();
  const std::size_t ny = out_joint.y_alphabet().size();
  std::size_t count = 1;
  for (std::size_t k = 0; k < nk; ++k) count *= ny;
  double best = 2.0;
  for (std::size_t code = 0; code < count; ++code) {
    AdversaryStrategy s{StrategyKind::kHard, {}, {}};
    std::size_t c = code;
    for (std::size_t k = 0; k < nk; ++k) {
      s.hard_rule.push_back(c % ny);
      c /= ny;
    }
    best = std::min(best, expected_loss(out_joint, s, LossFunction::kZeroOne));
  }
  return best;
}

}  // namespace

TEST_CASE("map_rule on the canonical joint and tie-breaks") {
  const auto j = canonical_joint();
  const auto s = map_rule(j);
  REQUIRE(s.kind == StrategyKind::kHard);
  CHECK(s.hard_rule == std::vector<std::size_t>{0, 1});

  const Alphabet bin = Alphabet::binary();
  const auto skewed = validate_joint({{0.35, 0.15}, {0.35, 0.15}}, bin, bin);
  CHECK(map_rule(skewed).hard_rule == std::vector<std::size_t>{0, 0});

  const auto uniform = validate_joint({{0.25, 0.25}, {0.25, 0.25}}, bin, bin);
  CHECK(map_rule(uniform).hard_rule == std::vector<std::size_t>{0, 0});
}

TEST_CASE("posterior_rule divides rows by their mass") {
  const auto j = canonical_joint();
  const auto s = posterior_rule(j);
  REQUIRE(s.kind == StrategyKind::kSoft);
  CHECK(s.soft_rule[0][0] == Catch::Approx(0.8).margin(1e-12));
  CHECK(s.soft_rule[0][1] == Catch::Approx(0.2).margin(1e-12));
  CHECK(s.soft_rule[1][0] == Catch::Approx(0.2).margin(1e-12));
  CHECK(s.soft_rule[1][1] == Catch::Approx(0.8).margin(1e-12));

  const Alphabet bin = Alphabet::binary();
  const auto product = validate_joint({{0.25, 0.25}, {0.25, 0.25}}, bin, bin);
  const auto sp = posterior_rule(product);
  for (const auto& row : sp.soft_rule) {
    CHECK(row[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(row[1] == Catch::Approx(0.5).margin(1e-12));
  }

  // Zero-mass x̂ rows fall back to the Y-marginal.
  const auto degenerate = validate_joint({{0.5, 0.5}, {0.0, 0.0}}, bin, bin);
  const auto sd = posterior_rule(degenerate);
  CHECK(sd.soft_rule[1][0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(sd.soft_rule[1][1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("expected loss of MAP, posterior and uniform strategies") {
  const auto j = canonical_joint();
  CHECK(expected_loss(j, map_rule(j), LossFunction::kZeroOne) ==
        Catch::Approx(0.2).margin(1e-12));

  // Posterior log-loss equals the conditional entropy H(Y|Xhat).
  const double h_cond = entropy(j.flat()) - entropy(marginal(j, Axis::X));
  CHECK(expected_loss(j, posterior_rule(j), LossFunction::kLog) ==
        Catch::Approx(h_cond).margin(1e-12));

  AdversaryStrategy uniform{StrategyKind::kSoft, {}, {{0.5, 0.5}, {0.5, 0.5}}};
  CHECK(expected_loss(j, uniform, LossFunction::kLog) ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("loss/strategy mismatches and infinite loss are reported") {
  const auto j = canonical_joint();
  CHECK_THROWS_AS(expected_loss(j, map_rule(j), LossFunction::kLog),
                  LossStrategyMismatch);
  CHECK_THROWS_AS(expected_loss(j, posterior_rule(j), LossFunction::kZeroOne),
                  LossStrategyMismatch);
  AdversaryStrategy zero_belief{StrategyKind::kSoft, {}, {{1.0, 0.0}, {0.0, 1.0}}};
  CHECK_THROWS_AS(expected_loss(j, zero_belief, LossFunction::kLog),
                  InfiniteLoss);
}

TEST_CASE("leakage of identity, constant and copy-Y mechanisms") {
  const auto j = canonical_joint();
  const Alphabet bin = Alphabet::binary();
  CHECK(leakage(j, Mechanism::identity(bin, bin), LossFunction::kZeroOne) ==
        Catch::Approx(0.8).margin(1e-12));
  const auto constant = Mechanism::constant(bin, bin, bin, 0);
  CHECK(leakage(j, constant, LossFunction::kZeroOne) ==
        Catch::Approx(0.5).margin(1e-12));
  CHECK(leakage(j, constant, LossFunction::kLog) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK(leakage(j, copy_y_mechanism(), LossFunction::kZeroOne) ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("property: MAP rule is optimal among all hard rules") {
  CounterRng rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nk = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const auto out = random_joint(rng, nk, ny);
    const double map_loss =
        expected_loss(out, map_rule(out), LossFunction::kZeroOne);
    CHECK(map_loss <= best_hard_loss_by_enumeration(out) + 1e-15);
  }
}

TEST_CASE("property: posterior rule is optimal among soft rules (Gibbs)") {
  CounterRng rng(606);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nk = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const auto out = random_joint(rng, nk, ny);
    AdversaryStrategy s{StrategyKind::kSoft, {}, {}};
    s.soft_rule.assign(nk, std::vector<double>(ny));
    for (auto& row : s.soft_rule) {
      double total = 0.0;
      for (auto& v : row) {
        v = rng.uniform() + 1e-3;
        total += v;
      }
      for (auto& v : row) v /= total;
    }
    const double posterior_loss =
        expected_loss(out, posterior_rule(out), LossFunction::kLog);
    CHECK(posterior_loss <=
          expected_loss(out, s, LossFunction::kLog) + 1e-12);
  }
}

TEST_CASE("property: leakage bounds and the Theorem-1 soft identity") {
  CounterRng rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const auto j = random_joint(rng, nx, ny);
    const auto m = random_mechanism(rng, j.x_alphabet(), j.y_alphabet(),
                                    j.x_alphabet());
    const auto py = marginal(j, Axis::Y);
    const double hy = entropy(py);
    const double prior_max = *std::max_element(py.begin(), py.end());

    const double zo = leakage(j, m, LossFunction::kZeroOne);
    CHECK(zo >= prior_max - 1e-9);
    CHECK(zo <= 1.0 + 1e-9);

    const double lg = leakage(j, m, LossFunction::kLog);
    CHECK(lg >= -1e-9);
    CHECK(lg <= hy + 1e-9);

    // leakage(log) = H(Y) - E[log-loss of the posterior rule].
    const auto out = push_through(j, m);
    const double posterior_loss =
        expected_loss(out, posterior_rule(out), LossFunction::kLog);
    CHECK(lg == Catch::Approx(hy - posterior_loss).margin(1e-9));
  }
}

TEST_CASE("scaling the joint's loss landscape does not change MAP labels") {
  // argmax invariance: scaling every P(x̂,y) row by a positive constant
  // (here via a uniform mixture weight) leaves the chosen labels unchanged.
  CounterRng rng(808);
  for (int trial = 0; trial < 50; ++trial) {
    const auto out = random_joint(rng, 3, 3);
    const auto rule = map_rule(out).hard_rule;
    // Recompute from a rescaled copy of the same table.
    std::vector<std::vector<double>> scaled(3, std::vector<double>(3));
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) scaled[a][b] = out.p(a, b);
    const JointDistribution same(out.x_alphabet(), out.y_alphabet(), scaled);
    CHECK(map_rule(same).hard_rule == rule);
  }
}
