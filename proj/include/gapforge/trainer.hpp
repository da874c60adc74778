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
// Data-driven adversarial training of a privatizer network against an
// adversary classifier under an empirical distortion constraint, plus
// honest post-hoc evaluation against a freshly trained adversary and a
// Monte-Carlo bridge back to exact mechanism tables.
//
// Categorical variables are one-hot encoded; the privatizer emits logits
// and releases a symbol by Gumbel-max sampling, so the induced hard
// channel equals the softmax of the logits exactly. Training uses the
// exact gradient of the expected adversary loss over the finite release
// alphabet and the expected hamming distortion on the softmax
// probabilities; evaluation uses sampled hard releases.

#ifndef GAPFORGE_TRAINER_HPP_
#define GAPFORGE_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "gapforge/errors.hpp"
#include "gapforge/neural.hpp"
#include "gapforge/probability.hpp"
#include "gapforge/rng.hpp"

namespace gapforge {

enum class PrivatizerPattern { kCombine, kAdditive };

inline const char* pattern_name(PrivatizerPattern p) {
  return p == PrivatizerPattern::kCombine ? "combine" : "additive";
}

inline PrivatizerPattern pattern_from_name(const std::string& name) {
  if (name == "combine") return PrivatizerPattern::kCombine;
  if (name == "additive") return PrivatizerPattern::kAdditive;
  throw Error("unknown privatizer pattern '" + name + "'");
}

// combine: the network maps (one-hot x, one-hot y, noise) directly to
// release logits. additive: the network generates an additive perturbation
// of the one-hot public encoding from the same inputs.
struct PrivatizerArch {
  PrivatizerPattern pattern = PrivatizerPattern::kCombine;
  std::vector<std::size_t> hidden_widths = {16, 16};
  std::size_t noise_dim = 4;
};

struct TrainingConfig {
  double budget = 0.0;
  int adversary_steps_per_round = 5;
  std::size_t batch_size = 128;
  long rounds = 2000;
  double privatizer_lr = 1e-3;
  double adversary_lr = 1e-3;
  double penalty_init = 10.0;
  double penalty_growth = 2.0;
  std::uint64_t seed = 1;
  // Plumbing knobs (all overridable from config files).
  std::vector<std::size_t> adversary_hidden = {16};
  long fresh_adversary_steps = 800;
  std::size_t fresh_batch_size = 256;
  double fresh_adversary_lr = 5e-3;
  double holdout_fraction = 0.2;
};

struct Dataset {
  Alphabet x_alphabet;
  Alphabet y_alphabet;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> rows;  // (x, y) indices

  std::size_t n() const { return rows.size(); }
};

struct RoundStats {
  double adv_loss_bits = 0.0;
  double distortion = 0.0;
  double penalty = 0.0;
};

struct Privatizer {
  Network net;
  PrivatizerArch arch;
  Alphabet x_alphabet;
  Alphabet y_alphabet;
  Alphabet xhat_alphabet;
};

struct TrainedGAP {
  Privatizer privatizer;
  Network final_adversary;
  TrainingConfig config;
  std::vector<RoundStats> history;
};

struct FreshEvaluation {
  double accuracy = 0.0;
  double distortion = 0.0;
};

namespace detail {

// Anchor weight of the one-hot public encoding in the additive pattern's
// release logits; the network output perturbs around it.
inline constexpr double kAdditiveAnchor = 2.0;

inline std::vector<double> one_hot(std::size_t index, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  v[index] = 1.0;
  return v;
}

inline std::vector<double> privatizer_input(const Privatizer& p, std::size_t x,
                                            std::size_t y,
                                            const std::vector<double>& noise) {
  std::vector<double> input;
  input.reserve(p.x_alphabet.size() + p.y_alphabet.size() + noise.size());
  for (std::size_t i = 0; i < p.x_alphabet.size(); ++i)
    input.push_back(i == x ? 1.0 : 0.0);
  for (std::size_t i = 0; i < p.y_alphabet.size(); ++i)
    input.push_back(i == y ? 1.0 : 0.0);
  input.insert(input.end(), noise.begin(), noise.end());
  return input;
}

struct PrivatizeResult {
  ForwardCache cache;            // privatizer network cache
  std::vector<double> logits;    // release logits (pattern applied)
  std::vector<double> probs;     // softmax of logits
  std::size_t hard = 0;          // sampled release symbol
};

// One privatization draw. The released symbol is the argmax of the logits
// after Gumbel perturbation, so P(x̂ = k | x, y, net noise) is exactly
// softmax(logits)_k and the differentiable probabilities are an unbiased
// description of the hard channel. Consumes noise_dim Gaussians plus one
// uniform per release symbol from `rng`.
inline PrivatizeResult privatize(const Privatizer& p, std::size_t x,
                                 std::size_t y, CounterRng& rng) {
  const auto noise = gaussian_vector(rng, p.arch.noise_dim);
  PrivatizeResult r;
  r.cache = forward(p.net, privatizer_input(p, x, y, noise));
  r.logits = r.cache.output;
  if (p.arch.pattern == PrivatizerPattern::kAdditive) r.logits[x] += kAdditiveAnchor;
  double mx = r.logits[0];
  for (double v : r.logits) mx = std::max(mx, v);
  double total = 0.0;
  r.probs.resize(r.logits.size());
  for (std::size_t k = 0; k < r.logits.size(); ++k) {
    r.probs[k] = std::exp(r.logits[k] - mx);
    total += r.probs[k];
  }
  for (auto& v : r.probs) v /= total;
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.logits.size(); ++k) {
    const double u = std::max(rng.uniform(), 0x1.0p-53);
    const double score = r.logits[k] - std::log(-std::log(u));
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  r.hard = best;
  return r;
}

inline std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch,
                                             CounterRng& rng) {
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
  return idx;
}

// Deterministic 80/20-style split of row indices, fixed by seed.
inline void split_indices(std::size_t n, std::uint64_t seed, double holdout,
                          std::vector<std::size_t>* train,
                          std::vector<std::size_t>* held) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(CounterRng::mix(seed, 0x5eed5), 0);
  for (std::size_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_held = static_cast<std::size_t>(std::llround(holdout * n));
  held->assign(perm.begin(), perm.begin() + n_held);
  train->assign(perm.begin() + n_held, perm.end());
}

inline Network make_adversary(std::size_t in_dim, std::size_t ny,
                              const std::vector<std::size_t>& hidden,
                              CounterRng& rng) {
  std::vector<std::size_t> widths{in_dim};
  std::vector<Activation> acts;
  for (std::size_t h : hidden) {
    widths.push_back(h);
    acts.push_back(Activation::kRelu);
  }
  widths.push_back(ny);
  acts.push_back(Activation::kIdentity);  // logits; loss is fused softmax-CE
  return make_network(widths, acts, rng);
}

}  // namespace detail

inline Privatizer make_privatizer(const PrivatizerArch& arch,
                                  const Alphabet& x_alphabet,
                                  const Alphabet& y_alphabet, CounterRng& rng) {
  const std::size_t nk = x_alphabet.size();  // released alphabet defaults to X
  std::vector<std::size_t> widths{x_alphabet.size() + y_alphabet.size() +
                                  arch.noise_dim};
  std::vector<Activation> acts;
  for (std::size_t h : arch.hidden_widths) {
    widths.push_back(h);
    acts.push_back(Activation::kRelu);
  }
  widths.push_back(nk);
  acts.push_back(Activation::kIdentity);
  return Privatizer{make_network(widths, acts, rng), arch, x_alphabet,
                    y_alphabet, x_alphabet};
}

// Mean adversary cross-entropy in bits over a batch of rows, with noise
// drawn per sample from `rng`. Deterministic for a fixed rng state.
inline double empirical_loss(const Privatizer& priv, const Network& adv,
                             const Dataset& data,
                             const std::vector<std::size_t>& batch,
                             CounterRng& rng) {
  if (adv.input_dim() != priv.xhat_alphabet.size())
    throw DimensionMismatch("empirical_loss: adversary input dimension");
  double total = 0.0;
  for (std::size_t i : batch) {
    const auto [x, y] = data.rows[i];
    const auto pr = detail::privatize(priv, x, y, rng);
    const auto out =
        forward(adv, detail::one_hot(pr.hard, priv.xhat_alphabet.size()));
    total += cross_entropy_bits(out.output, y);
  }
  return total / static_cast<double>(batch.size());
}

// Inner maximization: `adversary_steps_per_round` Adam steps minimizing the
// empirical loss with the privatizer frozen. Each sample contributes its
// exact conditional expectation over release symbols (weighted by the
// channel probabilities) rather than a single draw, which keeps the
// adversary close to the best response at desk-scale alphabet sizes.
inline void adversary_round(const Privatizer& priv, Network& adv,
                            AdamState& adv_state, const Dataset& data,
                            const std::vector<std::size_t>& pool,
                            const TrainingConfig& cfg, CounterRng& rng,
                            long round_index = -1) {
  const std::size_t nk = priv.xhat_alphabet.size();
  for (int step = 0; step < cfg.adversary_steps_per_round; ++step) {
    const auto batch = detail::sample_batch(pool.size(), cfg.batch_size, rng);
    Gradients grads = Gradients::zeros_like(adv);
    for (std::size_t b : batch) {
      const auto [x, y] = data.rows[pool[b]];
      const auto pr = detail::privatize(priv, x, y, rng);
      for (std::size_t k = 0; k < nk; ++k) {
        const double w = pr.probs[k];
        if (w < 1e-12) continue;
        const auto cache = forward(adv, detail::one_hot(k, nk));
        const double loss = cross_entropy_bits(cache.output, y);
        if (!std::isfinite(loss))
          throw NonFiniteLoss("adversary loss diverged", round_index);
        grads.accumulate(backward(adv, cache,
                                  cross_entropy_bits_grad(cache.output, y)),
                         w);
      }
    }
    grads.scale(1.0 / static_cast<double>(batch.size()));
    adam_step(adv, grads, adv_state);
  }
}

struct PrivatizerRoundResult {
  double soft_distortion = 0.0;  // expected hamming on quantization probs
  double adv_loss_bits = 0.0;
};

// Outer minimization: one Adam step on the privatizer minimizing
// [-empirical_loss + rho * max(0, batch distortion - budget)^2] with the
// adversary frozen. Because the release is a categorical draw from the
// softmax channel, the per-sample expected adversary loss is exactly
// sum_k p_k * loss_k with loss_k evaluated at each one-hot release, and its
// gradient with respect to the logits is p_j * (loss_j - sum_k p_k loss_k).
// The same holds for the expected hamming distortion 1 - p_x.
inline PrivatizerRoundResult privatizer_round(Privatizer& priv,
                                              AdamState& priv_state,
                                              const Network& adv,
                                              const Dataset& data,
                                              const std::vector<std::size_t>& pool,
                                              const TrainingConfig& cfg,
                                              double rho, CounterRng& rng,
                                              long round_index = -1) {
  const std::size_t nk = priv.xhat_alphabet.size();
  const auto batch = detail::sample_batch(pool.size(), cfg.batch_size, rng);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  struct SampleState {
    std::size_t x, y;
    detail::PrivatizeResult pr;
  };
  std::vector<SampleState> samples;
  samples.reserve(batch.size());
  double soft_dist = 0.0;
  for (std::size_t b : batch) {
    const auto [x, y] = data.rows[pool[b]];
    SampleState s{x, y, detail::privatize(priv, x, y, rng)};
    soft_dist += 1.0 - s.pr.probs[x];
    samples.push_back(std::move(s));
  }
  soft_dist *= inv_b;
  const double viol = std::max(0.0, soft_dist - cfg.budget);

  // Per-release-symbol adversary losses depend only on y.
  const std::size_t ny = priv.y_alphabet.size();
  std::vector<double> loss_table(nk * ny);
  for (std::size_t k = 0; k < nk; ++k) {
    const auto cache = forward(adv, detail::one_hot(k, nk));
    for (std::size_t y = 0; y < ny; ++y)
      loss_table[k * ny + y] = cross_entropy_bits(cache.output, y);
  }

  Gradients grads = Gradients::zeros_like(priv.net);
  double mean_loss = 0.0;
  for (auto& s : samples) {
    const auto& p = s.pr.probs;
    double expected = 0.0;
    for (std::size_t k = 0; k < nk; ++k)
      expected += p[k] * loss_table[k * ny + s.y];
    if (!std::isfinite(expected))
      throw NonFiniteLoss("privatizer objective diverged", round_index);
    mean_loss += expected * inv_b;

    std::vector<double> d_logits(nk);
    for (std::size_t k = 0; k < nk; ++k)
      d_logits[k] = -inv_b * p[k] * (loss_table[k * ny + s.y] - expected);

    // Quadratic penalty on the batch expected distortion.
    if (viol > 0.0) {
      const double c = 2.0 * rho * viol * inv_b;
      for (std::size_t k = 0; k < nk; ++k) {
        const double dpx = p[s.x] * ((k == s.x ? 1.0 : 0.0) - p[k]);
        d_logits[k] += c * (-dpx);
      }
    }
    grads.accumulate(backward(priv.net, s.pr.cache, std::move(d_logits)));
  }
  adam_step(priv.net, grads, priv_state);
  return PrivatizerRoundResult{soft_dist, mean_loss};
}

// Full alternating game of adversary_round / privatizer_round with a
// geometrically growing penalty whenever the running-average distortion
// exceeds the budget. Fully reproducible per seed.
inline TrainedGAP train(const Dataset& data, const PrivatizerArch& arch,
                        const TrainingConfig& cfg) {
  if (data.rows.empty()) throw Error("train: dataset is empty");
  for (const auto& [x, y] : data.rows)
    if (x >= data.x_alphabet.size() || y >= data.y_alphabet.size())
      throw UnknownSymbol("train: row index outside alphabets");

  CounterRng root(cfg.seed);
  std::vector<std::size_t> train_idx, held_idx;
  detail::split_indices(data.n(), cfg.seed, cfg.holdout_fraction, &train_idx,
                        &held_idx);

  CounterRng init_p = root.derive(1);
  CounterRng init_a = root.derive(2);
  CounterRng game = root.derive(3);

  Privatizer priv = make_privatizer(arch, data.x_alphabet, data.y_alphabet, init_p);
  Network adv = detail::make_adversary(priv.xhat_alphabet.size(),
                                       data.y_alphabet.size(),
                                       cfg.adversary_hidden, init_a);
  AdamState priv_state = AdamState::for_network(priv.net, cfg.privatizer_lr);
  AdamState adv_state = AdamState::for_network(adv, cfg.adversary_lr);

  double rho = cfg.penalty_init;
  constexpr double kRhoMax = 1e7;
  constexpr std::size_t kWindow = 50;
  std::deque<double> window;
  double window_sum = 0.0;
  long last_growth = -static_cast<long>(kWindow);

  TrainedGAP result{std::move(priv), Network(), cfg, {}};
  result.history.reserve(cfg.rounds);

  for (long round = 0; round < cfg.rounds; ++round) {
    // Cosine learning-rate decay: late rounds take small steps so the
    // channel settles tightly against the distortion constraint instead of
    // oscillating around it.
    const double progress =
        static_cast<double>(round) / static_cast<double>(cfg.rounds);
    const double decay =
        0.05 + 0.95 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
    priv_state.learning_rate = cfg.privatizer_lr * decay;
    adv_state.learning_rate = cfg.adversary_lr * decay;
    adversary_round(result.privatizer, adv, adv_state, data, train_idx, cfg,
                    game, round);
    const auto stats = privatizer_round(result.privatizer, priv_state, adv,
                                        data, train_idx, cfg, rho, game, round);
    window.push_back(stats.soft_distortion);
    window_sum += stats.soft_distortion;
    if (window.size() > kWindow) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double running = window_sum / static_cast<double>(window.size());
    if (window.size() == kWindow && running > cfg.budget &&
        round - last_growth >= static_cast<long>(kWindow) && rho < kRhoMax) {
      rho = std::min(rho * cfg.penalty_growth, kRhoMax);
      last_growth = round;
    }
    result.history.push_back(RoundStats{stats.adv_loss_bits,
                                        stats.soft_distortion, rho});
  }
  result.final_adversary = std::move(adv);
  return result;
}

// Trains a brand-new adversary from scratch on privatized training rows and
// reports hard-decision accuracy (and hamming distortion) on privatized
// held-out rows. Guards against a weak co-trained adversary.
inline FreshEvaluation evaluate_fresh_adversary(const Privatizer& priv,
                                                const Dataset& data,
                                                const TrainingConfig& cfg) {
  std::vector<std::size_t> train_idx, held_idx;
  detail::split_indices(data.n(), cfg.seed, cfg.holdout_fraction, &train_idx,
                        &held_idx);
  if (train_idx.empty() || held_idx.empty())
    throw Error("evaluate_fresh_adversary: split produced an empty part");

  CounterRng root(cfg.seed);
  CounterRng noise_train = root.derive(11);
  CounterRng noise_held = root.derive(12);
  CounterRng init = root.derive(13);
  CounterRng batches = root.derive(14);

  const std::size_t nk = priv.xhat_alphabet.size();

  // Privatize the training rows once.
  std::vector<std::pair<std::size_t, std::size_t>> privatized;  // (x̂, y)
  privatized.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    const auto [x, y] = data.rows[i];
    privatized.emplace_back(detail::privatize(priv, x, y, noise_train).hard, y);
  }

  Network adv = detail::make_adversary(nk, data.y_alphabet.size(),
                                       cfg.adversary_hidden, init);
  AdamState state = AdamState::for_network(adv, cfg.fresh_adversary_lr);
  for (long step = 0; step < cfg.fresh_adversary_steps; ++step) {
    const auto batch =
        detail::sample_batch(privatized.size(), cfg.fresh_batch_size, batches);
    Gradients grads = Gradients::zeros_like(adv);
    for (std::size_t b : batch) {
      const auto [xhat, y] = privatized[b];
      const auto cache = forward(adv, detail::one_hot(xhat, nk));
      grads.accumulate(backward(adv, cache,
                                cross_entropy_bits_grad(cache.output, y)));
    }
    grads.scale(1.0 / static_cast<double>(batch.size()));
    adam_step(adv, grads, state);
  }

  // Each held-out row is privatized several times with independent noise so
  // the reported accuracy reflects the channel rather than single draws.
  constexpr int kRepeats = 5;
  std::size_t correct = 0;
  double distortion = 0.0;
  for (int rep = 0; rep < kRepeats; ++rep) {
    for (std::size_t i : held_idx) {
      const auto [x, y] = data.rows[i];
      const std::size_t xhat = detail::privatize(priv, x, y, noise_held).hard;
      distortion += (xhat == x) ? 0.0 : 1.0;
      const auto out = forward(adv, detail::one_hot(xhat, nk));
      std::size_t guess = 0;
      for (std::size_t k = 1; k < out.output.size(); ++k)
        if (out.output[k] > out.output[guess]) guess = k;
      if (guess == y) ++correct;
    }
  }
  const double n_eval = static_cast<double>(held_idx.size() * kRepeats);
  return FreshEvaluation{static_cast<double>(correct) / n_eval,
                         distortion / n_eval};
}

// Monte-Carlo estimate of the channel realized by a trained privatizer:
// q[x][y][x̂] from `samples_per_cell` quantized draws per (x, y) cell, with
// per-cell derived seeds so the result is independent of evaluation order.
inline Mechanism empirical_mechanism(const Privatizer& priv,
                                     std::size_t samples_per_cell,
                                     std::uint64_t seed) {
  if (samples_per_cell < 1)
    throw Error("empirical_mechanism: samples_per_cell must be >= 1");
  const std::size_t nx = priv.x_alphabet.size();
  const std::size_t ny = priv.y_alphabet.size();
  const std::size_t nk = priv.xhat_alphabet.size();
  std::vector<double> q(nx * ny * nk, 0.0);
  CounterRng root(seed);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      CounterRng cell = root.derive(x * ny + y + 1);
      std::vector<std::size_t> counts(nk, 0);
      for (std::size_t s = 0; s < samples_per_cell; ++s)
        counts[detail::privatize(priv, x, y, cell).hard] += 1;
      for (std::size_t k = 0; k < nk; ++k)
        q[(x * ny + y) * nk + k] = static_cast<double>(counts[k]) /
                                   static_cast<double>(samples_per_cell);
    }
  return Mechanism(priv.x_alphabet, priv.y_alphabet, priv.xhat_alphabet,
                   std::move(q));
}

}  // namespace gapforge

#endif  // GAPFORGE_TRAINER_HPP_
