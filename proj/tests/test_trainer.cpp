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
#include <cmath>
#include <numeric>

#include "gapforge/trainer.hpp"
#include "test_util.hpp"

using namespace gapforge;

namespace {

// Deterministic dataset with cell counts proportional to the given joint.
Dataset dataset_from_counts(std::size_t n00, std::size_t n01, std::size_t n10,
                            std::size_t n11) {
  Dataset d;
  d.x_alphabet = Alphabet::binary();
  d.y_alphabet = Alphabet::binary();
  auto add = [&](std::uint32_t x, std::uint32_t y, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) d.rows.emplace_back(x, y);
  };
  add(0, 0, n00);
  add(0, 1, n01);
  add(1, 0, n10);
  add(1, 1, n11);
  // Interleave deterministically so contiguous index splits stay balanced.
  CounterRng rng(12345);
  for (std::size_t i = d.rows.size(); i > 1; --i)
    std::swap(d.rows[i - 1], d.rows[rng.below(i)]);
  return d;
}

// Hand-built privatizer whose release logits are a scaled one-hot of a
// chosen input block (the x block or the y block), ignoring noise.
Privatizer block_copy_privatizer(bool copy_y) {
  PrivatizerArch arch;
  arch.pattern = PrivatizerPattern::kCombine;
  arch.hidden_widths = {};
  arch.noise_dim = 2;
  const Alphabet bin = Alphabet::binary();
  const std::size_t in_dim = 2 + 2 + arch.noise_dim;
  Layer l;
  l.in = in_dim;
  l.out = 2;
  l.weights.assign(l.out * l.in, 0.0);
  const std::size_t offset = copy_y ? 2 : 0;
  for (std::size_t k = 0; k < 2; ++k) l.weights[k * in_dim + offset + k] = 30.0;
  l.bias.assign(2, 0.0);
  l.activation = Activation::kIdentity;
  return Privatizer{Network({l}), arch, bin, bin, bin};
}

// Adversary that maps a one-hot release sharply to the same label.
Network sharp_identity_adversary(std::size_t dim) {
  Layer l;
  l.in = dim;
  l.out = dim;
  l.weights.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) l.weights[i * dim + i] = 40.0;
  l.bias.assign(dim, 0.0);
  l.activation = Activation::kIdentity;
  return Network({l});
}

std::vector<std::size_t> all_indices(const Dataset& d) {
  std::vector<std::size_t> idx(d.n());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_CASE("empirical_loss: perfect adversary on a revealing privatizer") {
  // The privatizer releases y; an adversary reading it off scores ~0 bits.
  const auto priv = block_copy_privatizer(/*copy_y=*/true);
  const auto adv = sharp_identity_adversary(2);
  const auto data = dataset_from_counts(40, 10, 10, 40);
  CounterRng rng(1);
  const double loss = empirical_loss(priv, adv, data, all_indices(data), rng);
  CHECK(loss < 1e-6);
}

TEST_CASE("empirical_loss: uninformed adversary pays one bit on binary Y") {
  const auto priv = block_copy_privatizer(/*copy_y=*/false);
  Layer l;
  l.in = 2;
  l.out = 2;
  l.weights.assign(4, 0.0);
  l.bias.assign(2, 0.0);
  l.activation = Activation::kIdentity;
  const Network uniform_adv({l});
  const auto data = dataset_from_counts(40, 10, 10, 40);
  CounterRng rng(1);
  const double loss =
      empirical_loss(priv, uniform_adv, data, all_indices(data), rng);
  CHECK(loss == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("empirical_loss rejects an adversary of the wrong input width") {
  const auto priv = block_copy_privatizer(true);
  const auto adv = sharp_identity_adversary(3);
  const auto data = dataset_from_counts(5, 5, 5, 5);
  CounterRng rng(1);
  CHECK_THROWS_AS(empirical_loss(priv, adv, data, all_indices(data), rng),
                  DimensionMismatch);
}

TEST_CASE("adversary_round lowers the loss on separable privatized data") {
  // Identity privatizer on strongly correlated data: releases are linearly
  // separable evidence about y, so a few Adam steps must help.
  const auto priv = block_copy_privatizer(/*copy_y=*/false);
  const auto data = dataset_from_counts(450, 50, 50, 450);
  CounterRng init(3);
  Network adv = detail::make_adversary(2, 2, {8}, init);
  AdamState state = AdamState::for_network(adv, 5e-3);
  TrainingConfig cfg;
  cfg.adversary_steps_per_round = 25;
  cfg.batch_size = 128;

  const auto pool = all_indices(data);
  CounterRng probe_a(77), probe_b(77), steps(5);
  const double before = empirical_loss(priv, adv, data, pool, probe_a);
  adversary_round(priv, adv, state, data, pool, cfg, steps);
  const double after = empirical_loss(priv, adv, data, pool, probe_b);
  CHECK(after < before);
}

TEST_CASE("privatizer_round returns the batch statistics and applies a step") {
  const auto data = dataset_from_counts(400, 100, 100, 400);
  CounterRng init(11);
  PrivatizerArch arch;
  Privatizer priv =
      make_privatizer(arch, data.x_alphabet, data.y_alphabet, init);
  const auto weights_before = priv.net.layers()[0].weights;
  Network adv = sharp_identity_adversary(2);
  AdamState state = AdamState::for_network(priv.net, 1e-3);
  TrainingConfig cfg;
  cfg.budget = 0.0;
  CounterRng rng(13);
  const auto r = privatizer_round(priv, state, adv, data, all_indices(data),
                                  cfg, 10.0, rng);
  CHECK(r.soft_distortion >= 0.0);
  CHECK(r.soft_distortion <= 1.0);
  CHECK(std::isfinite(r.adv_loss_bits));
  CHECK(priv.net.layers()[0].weights != weights_before);
}

TEST_CASE("train: validation, history shape and penalty monotonicity") {
  CHECK_THROWS_AS(train(Dataset{Alphabet::binary(), Alphabet::binary(), {}},
                        PrivatizerArch{}, TrainingConfig{}),
                  Error);
  Dataset bad{Alphabet::binary(), Alphabet::binary(), {{0, 5}}};
  CHECK_THROWS_AS(train(bad, PrivatizerArch{}, TrainingConfig{}), UnknownSymbol);

  const auto data = dataset_from_counts(800, 200, 200, 800);
  TrainingConfig cfg;
  cfg.budget = 0.1;
  cfg.rounds = 120;
  cfg.seed = 21;
  const auto result = train(data, PrivatizerArch{}, cfg);
  REQUIRE(result.history.size() == 120);
  double prev_rho = 0.0;
  for (const auto& h : result.history) {
    CHECK(std::isfinite(h.adv_loss_bits));
    CHECK(h.distortion >= 0.0);
    CHECK(h.distortion <= 1.0);
    CHECK(h.penalty >= prev_rho);
    prev_rho = h.penalty;
  }
  CHECK(result.config.budget == 0.1);
}

TEST_CASE("train is reproducible per seed and varies across seeds") {
  const auto data = dataset_from_counts(400, 100, 100, 400);
  TrainingConfig cfg;
  cfg.budget = 0.25;
  cfg.rounds = 60;
  cfg.seed = 5;
  const auto a = train(data, PrivatizerArch{}, cfg);
  const auto b = train(data, PrivatizerArch{}, cfg);
  CHECK(a.privatizer.net.layers()[0].weights ==
        b.privatizer.net.layers()[0].weights);
  CHECK(a.final_adversary.layers()[0].weights ==
        b.final_adversary.layers()[0].weights);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].adv_loss_bits == b.history[i].adv_loss_bits);
    CHECK(a.history[i].distortion == b.history[i].distortion);
  }
  cfg.seed = 6;
  const auto c = train(data, PrivatizerArch{}, cfg);
  CHECK(a.privatizer.net.layers()[0].weights !=
        c.privatizer.net.layers()[0].weights);
}

TEST_CASE("evaluate_fresh_adversary on hand-built privatizers") {
  const auto data = dataset_from_counts(800, 200, 200, 800);
  TrainingConfig cfg;
  cfg.seed = 31;
  cfg.fresh_adversary_steps = 300;

  // Releasing y verbatim: a fresh adversary recovers it almost surely, and
  // hamming distortion equals the empirical P(X != Y) = 0.2.
  const auto reveal = block_copy_privatizer(/*copy_y=*/true);
  const auto ev = evaluate_fresh_adversary(reveal, data, cfg);
  CHECK(ev.accuracy > 0.98);
  CHECK(ev.distortion == Catch::Approx(0.2).margin(0.04));

  // Releasing x verbatim: zero distortion, accuracy near P(Y = X) = 0.8.
  const auto ident = block_copy_privatizer(/*copy_y=*/false);
  const auto ev2 = evaluate_fresh_adversary(ident, data, cfg);
  CHECK(ev2.distortion == Catch::Approx(0.0).margin(1e-12));
  CHECK(ev2.accuracy == Catch::Approx(0.8).margin(0.05));
}

TEST_CASE("trained privatizer at a generous budget hides Y from fresh eyes") {
  // With budget 0.5 the constant release is feasible, so a properly trained
  // privatizer should push a fresh adversary well below the identity
  // baseline of 0.8 accuracy.
  const auto data = dataset_from_counts(1600, 400, 400, 1600);
  TrainingConfig cfg;
  cfg.budget = 0.5;
  cfg.rounds = 500;
  cfg.seed = 77;
  const auto result = train(data, PrivatizerArch{}, cfg);
  const auto ev = evaluate_fresh_adversary(result.privatizer, data, cfg);
  CHECK(ev.accuracy < 0.7);
}

TEST_CASE("empirical_mechanism recovers hand-built channels exactly") {
  const auto reveal = block_copy_privatizer(/*copy_y=*/true);
  const auto m = empirical_mechanism(reveal, 500, 9);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(m.q(x, y, k) == (k == y ? 1.0 : 0.0));

  const auto ident = block_copy_privatizer(/*copy_y=*/false);
  const auto mi = empirical_mechanism(ident, 500, 9);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      CHECK(mi.q(x, y, x) == 1.0);

  CHECK_THROWS_AS(empirical_mechanism(ident, 0, 9), Error);
}

TEST_CASE("empirical_mechanism is deterministic and order-independent") {
  const auto data = dataset_from_counts(400, 100, 100, 400);
  TrainingConfig cfg;
  cfg.budget = 0.25;
  cfg.rounds = 40;
  cfg.seed = 15;
  const auto result = train(data, PrivatizerArch{}, cfg);
  const auto m1 = empirical_mechanism(result.privatizer, 200, 4);
  const auto m2 = empirical_mechanism(result.privatizer, 200, 4);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      double total = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(m1.q(x, y, k) == m2.q(x, y, k));
        total += m1.q(x, y, k);
      }
      CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("additive pattern anchors the release at the public symbol") {
  // With a zero-weight network the additive pattern releases the public
  // symbol with probability sigmoid(anchor) = 1/(1+e^-2) and the sampled
  // channel must match that softmax probability.
  PrivatizerArch arch;
  arch.pattern = PrivatizerPattern::kAdditive;
  arch.hidden_widths = {};
  arch.noise_dim = 2;
  const Alphabet bin = Alphabet::binary();
  Layer l;
  l.in = 2 + 2 + arch.noise_dim;
  l.out = 2;
  l.weights.assign(l.out * l.in, 0.0);
  l.bias.assign(2, 0.0);
  l.activation = Activation::kIdentity;
  const Privatizer priv{Network({l}), arch, bin, bin, bin};
  const auto m = empirical_mechanism(priv, 20000, 2);
  const double keep = 1.0 / (1.0 + std::exp(-2.0));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      CHECK(m.q(x, y, x) == Catch::Approx(keep).margin(0.02));
}
