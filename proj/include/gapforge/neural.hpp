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
// Minimal dense feedforward networks with analytic backpropagation, in
// double precision throughout. The substrate for the data-driven privatizer
// and adversary; no convolutions, no GPU, no general autodiff.

#ifndef GAPFORGE_NEURAL_HPP_
#define GAPFORGE_NEURAL_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gapforge/errors.hpp"
#include "gapforge/rng.hpp"

namespace gapforge {

enum class Activation { kIdentity, kRelu, kSigmoid, kSoftmax };

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
  }
  return "identity";
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftmax;
  throw Error("unknown activation '" + name + "'");
}

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> bias;     // out
  Activation activation = Activation::kIdentity;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      if (l.weights.size() != l.in * l.out || l.bias.size() != l.out)
        throw DimensionMismatch("layer " + std::to_string(i) + ": shape mismatch");
      if (i > 0 && layers_[i - 1].out != l.in)
        throw DimensionMismatch("layer " + std::to_string(i) +
                                ": input does not chain with previous output");
      if (l.activation == Activation::kSoftmax && i + 1 != layers_.size())
        throw Error("softmax is only allowed as the final activation");
      for (double w : l.weights)
        if (!std::isfinite(w)) throw Error("non-finite weight");
      for (double b : l.bias)
        if (!std::isfinite(b)) throw Error("non-finite bias");
    }
  }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t output_dim() const { return layers_.back().out; }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

 private:
  std::vector<Layer> layers_;
};

// Per-layer pre- and post-activation values from a forward pass.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // W x + b
  std::vector<double> output;
};

// Parameter gradients shaped like the network.
struct Gradients {
  std::vector<std::vector<double>> d_weights;
  std::vector<std::vector<double>> d_bias;

  static Gradients zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
      g.d_weights.emplace_back(l.weights.size(), 0.0);
      g.d_bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
  }

  void accumulate(const Gradients& other, double scale = 1.0) {
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
      for (std::size_t i = 0; i < d_weights[l].size(); ++i)
        d_weights[l][i] += scale * other.d_weights[l][i];
      for (std::size_t i = 0; i < d_bias[l].size(); ++i)
        d_bias[l][i] += scale * other.d_bias[l][i];
    }
  }

  void scale(double s) {
    for (auto& w : d_weights)
      for (auto& v : w) v *= s;
    for (auto& b : d_bias)
      for (auto& v : b) v *= s;
  }
};

inline ForwardCache forward(const Network& net, std::vector<double> input) {
  if (input.size() != net.input_dim())
    throw DimensionMismatch("forward: input size " + std::to_string(input.size()) +
                            " != " + std::to_string(net.input_dim()));
  ForwardCache cache;
  for (const Layer& l : net.layers()) {
    cache.inputs.push_back(input);
    std::vector<double> z(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      double acc = l.bias[o];
      const double* w = l.weights.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * input[i];
      z[o] = acc;
    }
    cache.pre.push_back(z);
    switch (l.activation) {
      case Activation::kIdentity:
        input = std::move(z);
        break;
      case Activation::kRelu:
        for (auto& v : z) v = v > 0.0 ? v : 0.0;
        input = std::move(z);
        break;
      case Activation::kSigmoid:
        for (auto& v : z) v = 1.0 / (1.0 + std::exp(-v));
        input = std::move(z);
        break;
      case Activation::kSoftmax: {
        double mx = z[0];
        for (double v : z) mx = std::max(mx, v);
        double total = 0.0;
        for (auto& v : z) {
          v = std::exp(v - mx);
          total += v;
        }
        for (auto& v : z) v /= total;
        input = std::move(z);
        break;
      }
    }
    for (double v : input)
      if (!std::isfinite(v)) throw NonFiniteActivation("non-finite activation");
  }
  cache.output = input;
  return cache;
}

// Backpropagates d(loss)/d(output) through the cached forward pass.
// Returns parameter gradients; optionally reports d(loss)/d(input).
inline Gradients backward(const Network& net, const ForwardCache& cache,
                          std::vector<double> loss_grad,
                          std::vector<double>* input_grad = nullptr) {
  if (loss_grad.size() != net.output_dim())
    throw DimensionMismatch("backward: loss gradient size mismatch");
  Gradients grads = Gradients::zeros_like(net);
  std::vector<double> delta = std::move(loss_grad);
  for (std::size_t li = net.layers().size(); li-- > 0;) {
    const Layer& l = net.layers()[li];
    const std::vector<double>& z = cache.pre[li];
    // d(loss)/d(pre-activation).
    switch (l.activation) {
      case Activation::kIdentity:
        break;
      case Activation::kRelu:
        for (std::size_t o = 0; o < l.out; ++o)
          if (z[o] <= 0.0) delta[o] = 0.0;
        break;
      case Activation::kSigmoid:
        for (std::size_t o = 0; o < l.out; ++o) {
          const double s = 1.0 / (1.0 + std::exp(-z[o]));
          delta[o] *= s * (1.0 - s);
        }
        break;
      case Activation::kSoftmax: {
        // Full Jacobian: dz_o = y_o (delta_o - sum_j delta_j y_j).
        std::vector<double> y(l.out);
        double mx = z[0];
        for (double v : z) mx = std::max(mx, v);
        double total = 0.0;
        for (std::size_t o = 0; o < l.out; ++o) {
          y[o] = std::exp(z[o] - mx);
          total += y[o];
        }
        double dot = 0.0;
        for (std::size_t o = 0; o < l.out; ++o) {
          y[o] /= total;
          dot += delta[o] * y[o];
        }
        for (std::size_t o = 0; o < l.out; ++o) delta[o] = y[o] * (delta[o] - dot);
        break;
      }
    }
    const std::vector<double>& in = cache.inputs[li];
    for (std::size_t o = 0; o < l.out; ++o) {
      grads.d_bias[li][o] = delta[o];
      double* dw = grads.d_weights[li].data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) dw[i] = delta[o] * in[i];
    }
    std::vector<double> prev(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* w = l.weights.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) prev[i] += w[i] * delta[o];
    }
    delta = std::move(prev);
  }
  if (input_grad) *input_grad = std::move(delta);
  return grads;
}

struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;

  static AdamState for_network(const Network& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& l : net.layers()) {
      s.m_weights.emplace_back(l.weights.size(), 0.0);
      s.v_weights.emplace_back(l.weights.size(), 0.0);
      s.m_bias.emplace_back(l.bias.size(), 0.0);
      s.v_bias.emplace_back(l.bias.size(), 0.0);
    }
    return s;
  }
};

inline void adam_step(Network& net, const Gradients& grads, AdamState& state) {
  if (grads.d_weights.size() != net.layers().size())
    throw DimensionMismatch("adam_step: gradient shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (params.size() != g.size())
      throw DimensionMismatch("adam_step: parameter shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  };
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    update(net.layers()[li].weights, grads.d_weights[li], state.m_weights[li],
           state.v_weights[li]);
    update(net.layers()[li].bias, grads.d_bias[li], state.m_bias[li],
           state.v_bias[li]);
  }
}

// Independent standard-Gaussian vector from the counter-based generator.
inline std::vector<double> sample_noise(std::size_t dim, CounterRng& rng) {
  if (dim < 1) throw Error("sample_noise: dim must be >= 1");
  return gaussian_vector(rng, dim);
}

// He initialization for relu layers, Xavier for the rest, from the seeded
// generator so runs stay reproducible.
inline Network make_network(const std::vector<std::size_t>& widths,
                            const std::vector<Activation>& activations,
                            CounterRng& rng) {
  if (widths.size() < 2 || activations.size() + 1 != widths.size())
    throw DimensionMismatch("make_network: widths/activations mismatch");
  std::vector<Layer> layers;
  for (std::size_t li = 0; li + 1 < widths.size(); ++li) {
    Layer l;
    l.in = widths[li];
    l.out = widths[li + 1];
    l.activation = activations[li];
    const double scale =
        l.activation == Activation::kRelu
            ? std::sqrt(2.0 / static_cast<double>(l.in))
            : std::sqrt(1.0 / static_cast<double>(l.in));
    l.weights.resize(l.in * l.out);
    for (auto& w : l.weights) w = scale * rng.gaussian();
    l.bias.assign(l.out, 0.0);
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

// Cross-entropy in bits of a logit vector against a label, in the
// numerically safe log-sum-exp form.
inline double cross_entropy_bits(const std::vector<double>& logits,
                                 std::size_t label) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double total = 0.0;
  for (double v : logits) total += std::exp(v - mx);
  const double log_z = mx + std::log(total);
  return (log_z - logits[label]) / std::log(2.0);
}

// d(cross_entropy_bits)/d(logits) = (softmax - onehot) / ln 2.
inline std::vector<double> cross_entropy_bits_grad(
    const std::vector<double>& logits, std::size_t label) {
  std::vector<double> g(logits.size());
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::exp(logits[i] - mx);
    total += g[i];
  }
  const double inv_ln2 = 1.0 / std::log(2.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] /= total;
    if (i == label) g[i] -= 1.0;
    g[i] *= inv_ln2;
  }
  return g;
}

}  // namespace gapforge

#endif  // GAPFORGE_NEURAL_HPP_
