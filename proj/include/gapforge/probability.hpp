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
// Finite-alphabet probability primitives: joint distributions, stochastic
// channels, marginals, entropy, mutual information, expected distortion.
// All information quantities are in bits. All types are immutable after
// construction; every operation is a pure function.

#ifndef GAPFORGE_PROBABILITY_HPP_
#define GAPFORGE_PROBABILITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gapforge/errors.hpp"

namespace gapforge {

inline constexpr double kProbTolerance = 1e-9;
// Optimizer projections can leave probabilities a hair below zero; values
// in [-1e-12, 0) are clamped to 0 before validation.
inline constexpr double kNegClamp = -1e-12;

inline double log2_safe(double x) { return std::log2(x); }

// Ordered set of distinct symbol labels. Index = position; order is fixed.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols)
      : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw Error("Alphabet: must contain at least one symbol");
    std::unordered_set<std::string> seen;
    for (const auto& s : symbols_) {
      if (!seen.insert(s).second)
        throw Error("Alphabet: duplicate symbol '" + s + "'");
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) index_[symbols_[i]] = i;
  }

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(std::size_t i) const { return symbols_[i]; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const std::string& label) const {
    auto idx = find(label);
    if (!idx) throw UnknownSymbol("unknown symbol '" + label + "'");
    return *idx;
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_;
  }

  static Alphabet binary() { return Alphabet({"0", "1"}); }
  static Alphabet indexed(std::size_t n, const std::string& prefix = "") {
    std::vector<std::string> syms(n);
    for (std::size_t i = 0; i < n; ++i) syms[i] = prefix + std::to_string(i);
    return Alphabet(std::move(syms));
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Probability table P(X,Y) over finite alphabets; the ground truth of the
// game. Entries are non-negative and sum to one within kProbTolerance.
class JointDistribution {
 public:
  JointDistribution(Alphabet x_alphabet, Alphabet y_alphabet,
                    std::vector<std::vector<double>> table)
      : x_(std::move(x_alphabet)), y_(std::move(y_alphabet)) {
    if (table.size() != x_.size())
      throw DimensionMismatch("joint: row count " + std::to_string(table.size()) +
                              " != |X| " + std::to_string(x_.size()));
    p_.resize(x_.size() * y_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (table[i].size() != y_.size())
        throw DimensionMismatch("joint: row " + std::to_string(i) + " has " +
                                std::to_string(table[i].size()) + " entries, expected " +
                                std::to_string(y_.size()));
      for (std::size_t j = 0; j < y_.size(); ++j) {
        double v = table[i][j];
        if (v < 0.0 && v >= kNegClamp) v = 0.0;
        if (v < 0.0)
          throw NegativeMass("joint: negative probability at (" + x_.symbol(i) +
                             "," + y_.symbol(j) + ")");
        p_[i * y_.size() + j] = v;
        total += v;
      }
    }
    if (std::abs(total - 1.0) > kProbTolerance)
      throw MassNotOne("joint: total mass " + std::to_string(total) + " != 1");
  }

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  double p(std::size_t x, std::size_t y) const { return p_[x * y_.size() + y]; }
  std::span<const double> flat() const { return p_; }

 private:
  Alphabet x_;
  Alphabet y_;
  std::vector<double> p_;
};

inline JointDistribution validate_joint(std::vector<std::vector<double>> table,
                                        Alphabet x_alphabet, Alphabet y_alphabet) {
  return JointDistribution(std::move(x_alphabet), std::move(y_alphabet),
                           std::move(table));
}

enum class Axis { X, Y };

inline std::vector<double> marginal(const JointDistribution& j, Axis axis) {
  const std::size_t nx = j.x_alphabet().size();
  const std::size_t ny = j.y_alphabet().size();
  std::vector<double> row(axis == Axis::X ? nx : ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      row[axis == Axis::X ? x : y] += j.p(x, y);
  return row;
}

// Stochastic channel Q(x̂ | x, y): one probability row per (x, y) pair.
class Mechanism {
 public:
  Mechanism(Alphabet x_alphabet, Alphabet y_alphabet, Alphabet xhat_alphabet,
            std::vector<double> q_flat)
      : x_(std::move(x_alphabet)),
        y_(std::move(y_alphabet)),
        xhat_(std::move(xhat_alphabet)),
        q_(std::move(q_flat)) {
    const std::size_t expect = x_.size() * y_.size() * xhat_.size();
    if (q_.size() != expect)
      throw DimensionMismatch("mechanism: table size " + std::to_string(q_.size()) +
                              " != |X||Y||Xhat| " + std::to_string(expect));
    for (std::size_t x = 0; x < x_.size(); ++x) {
      for (std::size_t y = 0; y < y_.size(); ++y) {
        double total = 0.0;
        for (std::size_t k = 0; k < xhat_.size(); ++k) {
          double& v = q_[offset(x, y, k)];
          if (v < 0.0 && v >= kNegClamp) v = 0.0;
          if (v < 0.0 || v > 1.0 + kProbTolerance)
            throw Error("mechanism: entry out of [0,1] at row (" + x_.symbol(x) +
                        "," + y_.symbol(y) + ")");
          total += v;
        }
        if (std::abs(total - 1.0) > kProbTolerance)
          throw MassNotOne("mechanism: row (" + x_.symbol(x) + "," + y_.symbol(y) +
                           ") sums to " + std::to_string(total));
      }
    }
  }

  // X̂ defaults to the X alphabet when unspecified.
  Mechanism(Alphabet x_alphabet, Alphabet y_alphabet, std::vector<double> q_flat)
      : Mechanism(x_alphabet, std::move(y_alphabet), x_alphabet,
                  std::move(q_flat)) {}

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  const Alphabet& xhat_alphabet() const { return xhat_; }
  double q(std::size_t x, std::size_t y, std::size_t xhat) const {
    return q_[offset(x, y, xhat)];
  }
  std::span<const double> flat() const { return q_; }

  std::size_t offset(std::size_t x, std::size_t y, std::size_t xhat) const {
    return (x * y_.size() + y) * xhat_.size() + xhat;
  }

  static Mechanism identity(const Alphabet& x, const Alphabet& y) {
    const std::size_t n = x.size();
    std::vector<double> q(n * y.size() * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        q[(i * y.size() + j) * n + i] = 1.0;
    return Mechanism(x, y, x, std::move(q));
  }

  static Mechanism constant(const Alphabet& x, const Alphabet& y,
                            const Alphabet& xhat, std::size_t target) {
    std::vector<double> q(x.size() * y.size() * xhat.size(), 0.0);
    for (std::size_t i = 0; i < x.size() * y.size(); ++i)
      q[i * xhat.size() + target] = 1.0;
    return Mechanism(x, y, xhat, std::move(q));
  }

  static Mechanism uniform(const Alphabet& x, const Alphabet& y,
                           const Alphabet& xhat) {
    std::vector<double> q(x.size() * y.size() * xhat.size(),
                          1.0 / static_cast<double>(xhat.size()));
    return Mechanism(x, y, xhat, std::move(q));
  }

 private:
  Alphabet x_;
  Alphabet y_;
  Alphabet xhat_;
  std::vector<double> q_;
};

// Constructs the (X̂, Y) joint induced by passing X through the channel:
// P(x̂, y) = Σ_x P(x, y) · q(x̂ | x, y).
inline JointDistribution push_through(const JointDistribution& j,
                                      const Mechanism& m) {
  if (!(j.x_alphabet() == m.x_alphabet()) || !(j.y_alphabet() == m.y_alphabet()))
    throw DimensionMismatch("push_through: joint and mechanism alphabets differ");
  const std::size_t nx = j.x_alphabet().size();
  const std::size_t ny = j.y_alphabet().size();
  const std::size_t nk = m.xhat_alphabet().size();
  std::vector<std::vector<double>> out(nk, std::vector<double>(ny, 0.0));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t k = 0; k < nk; ++k)
        out[k][y] += j.p(x, y) * m.q(x, y, k);
  return JointDistribution(m.xhat_alphabet(), j.y_alphabet(), std::move(out));
}

// Shannon entropy in bits, with 0·log2(0) := 0.
inline double entropy(std::span<const double> row) {
  double h = 0.0;
  for (double p : row)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

inline double entropy(const std::vector<double>& row) {
  return entropy(std::span<const double>(row));
}

// I(A;B) = H(A) + H(B) - H(A,B), in bits. Computed via entropies so no
// division by zero can occur.
inline double mutual_information(const JointDistribution& j) {
  const double ha = entropy(marginal(j, Axis::X));
  const double hb = entropy(marginal(j, Axis::Y));
  const double hab = entropy(j.flat());
  return ha + hb - hab;
}

enum class DistortionKind { kHamming, kSquaredError, kCustom };

// Per-symbol distortion d(x̂, x) ≥ 0. Hamming requires X̂ and X to share an
// alphabet; squared-error requires a real embedding of the symbols.
class DistortionMeasure {
 public:
  static DistortionMeasure hamming() {
    return DistortionMeasure(DistortionKind::kHamming);
  }
  static DistortionMeasure squared_error(
      std::unordered_map<std::string, double> embedding) {
    DistortionMeasure d(DistortionKind::kSquaredError);
    d.embedding_ = std::move(embedding);
    return d;
  }
  static DistortionMeasure custom(std::vector<std::vector<double>> table) {
    DistortionMeasure d(DistortionKind::kCustom);
    for (const auto& row : table)
      for (double v : row)
        if (v < 0.0) throw Error("distortion: custom table entry < 0");
    d.table_ = std::move(table);
    return d;
  }

  DistortionKind kind() const { return kind_; }

  double value(const Alphabet& xhat_alphabet, const Alphabet& x_alphabet,
               std::size_t xhat, std::size_t x) const {
    switch (kind_) {
      case DistortionKind::kHamming:
        if (!(xhat_alphabet == x_alphabet))
          throw DimensionMismatch("hamming distortion requires xhat alphabet = x alphabet");
        return xhat == x ? 0.0 : 1.0;
      case DistortionKind::kSquaredError: {
        const double a = embed(xhat_alphabet.symbol(xhat));
        const double b = embed(x_alphabet.symbol(x));
        return (a - b) * (a - b);
      }
      case DistortionKind::kCustom:
        if (xhat >= table_.size() || x >= table_[xhat].size())
          throw DimensionMismatch("custom distortion table too small");
        return table_[xhat][x];
    }
    return 0.0;
  }

  const std::unordered_map<std::string, double>& embedding() const {
    return embedding_;
  }
  const std::vector<std::vector<double>>& table() const { return table_; }

 private:
  explicit DistortionMeasure(DistortionKind kind) : kind_(kind) {}

  double embed(const std::string& symbol) const {
    auto it = embedding_.find(symbol);
    if (it == embedding_.end())
      throw MissingEmbedding("squared-error distortion: no embedding for symbol '" +
                             symbol + "'");
    return it->second;
  }

  DistortionKind kind_;
  std::unordered_map<std::string, double> embedding_;
  std::vector<std::vector<double>> table_;
};

// E[d(X̂, X)] = Σ_{x,y,x̂} P(x,y) · q(x̂|x,y) · d(x̂, x).
inline double expected_distortion(const JointDistribution& j, const Mechanism& m,
                                  const DistortionMeasure& d) {
  if (!(j.x_alphabet() == m.x_alphabet()) || !(j.y_alphabet() == m.y_alphabet()))
    throw DimensionMismatch("expected_distortion: alphabets differ");
  const std::size_t nx = j.x_alphabet().size();
  const std::size_t ny = j.y_alphabet().size();
  const std::size_t nk = m.xhat_alphabet().size();
  double total = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t k = 0; k < nk; ++k)
        total += j.p(x, y) * m.q(x, y, k) *
                 d.value(m.xhat_alphabet(), m.x_alphabet(), k, x);
  return total;
}

}  // namespace gapforge

#endif  // GAPFORGE_PROBABILITY_HPP_
