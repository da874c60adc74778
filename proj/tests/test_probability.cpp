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

#include "gapforge/probability.hpp"
#include "gapforge/rng.hpp"
#include "test_util.hpp"

using namespace gapforge;
using gapforge::test::canonical_joint;
using gapforge::test::copy_y_mechanism;
using gapforge::test::mi_direct;
using gapforge::test::random_joint;
using gapforge::test::random_mechanism;

TEST_CASE("validate_joint accepts a valid table and rejects bad mass") {
  const Alphabet bin = Alphabet::binary();
  CHECK_NOTHROW(validate_joint({{0.4, 0.1}, {0.1, 0.4}}, bin, bin));
  CHECK_THROWS_AS(validate_joint({{0.6, 0.6}, {0.0, 0.0}}, bin, bin), MassNotOne);
  CHECK_THROWS_AS(validate_joint({{1.1, -0.1}, {0.0, 0.0}}, bin, bin),
                  NegativeMass);
  CHECK_THROWS_AS(validate_joint({{1.0, 0.0}}, bin, bin), DimensionMismatch);
}

TEST_CASE("tiny negatives from optimizer projections are clamped") {
  const Alphabet bin = Alphabet::binary();
  const auto j = validate_joint({{0.5, -1e-13}, {0.0, 0.5 + 1e-13}}, bin, bin);
  CHECK(j.p(0, 1) == 0.0);
}

TEST_CASE("marginals of the canonical joint are uniform") {
  const auto j = canonical_joint();
  const auto mx = marginal(j, Axis::X);
  const auto my = marginal(j, Axis::Y);
  CHECK(mx[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(mx[1] == Catch::Approx(0.5).margin(1e-12));
  CHECK(my[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(my[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("push_through: identity, constant and copy-Y channels") {
  const auto j = canonical_joint();
  const Alphabet bin = Alphabet::binary();

  const auto out_id = push_through(j, Mechanism::identity(bin, bin));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      CHECK(out_id.p(x, y) == Catch::Approx(j.p(x, y)).margin(1e-12));

  const auto out_const = push_through(j, Mechanism::constant(bin, bin, bin, 0));
  CHECK(out_const.p(0, 0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(out_const.p(0, 1) == Catch::Approx(0.5).margin(1e-12));
  CHECK(out_const.p(1, 0) == 0.0);
  CHECK(out_const.p(1, 1) == 0.0);

  const auto out_copy = push_through(j, copy_y_mechanism());
  CHECK(out_copy.p(0, 0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(out_copy.p(1, 1) == Catch::Approx(0.5).margin(1e-12));
  CHECK(out_copy.p(0, 1) == 0.0);
  CHECK(out_copy.p(1, 0) == 0.0);
}

TEST_CASE("entropy: uniform, deterministic and skewed rows") {
  CHECK(entropy(std::vector<double>{0.5, 0.5}) == Catch::Approx(1.0).margin(1e-12));
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
  // Independent evaluation of -0.8 log2 0.8 - 0.2 log2 0.2.
  const double expected = -(0.8 * std::log2(0.8) + 0.2 * std::log2(0.2));
  CHECK(entropy(std::vector<double>{0.8, 0.2}) ==
        Catch::Approx(expected).margin(1e-15));
  CHECK(expected == Catch::Approx(0.7219280948873623).margin(1e-12));
}

TEST_CASE("mutual information: product, canonical and diagonal joints") {
  const Alphabet bin = Alphabet::binary();
  const auto product =
      validate_joint({{0.25, 0.25}, {0.25, 0.25}}, bin, bin);
  CHECK(mutual_information(product) == Catch::Approx(0.0).margin(1e-12));

  const auto j = canonical_joint();
  CHECK(mutual_information(j) ==
        Catch::Approx(0.2780719051126377).margin(1e-12));
  CHECK(mutual_information(j) == Catch::Approx(mi_direct(j)).margin(1e-12));

  const auto diag = validate_joint({{0.5, 0.0}, {0.0, 0.5}}, bin, bin);
  CHECK(mutual_information(diag) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("expected distortion under hamming") {
  const auto j = canonical_joint();
  const Alphabet bin = Alphabet::binary();
  const auto ham = DistortionMeasure::hamming();
  CHECK(expected_distortion(j, Mechanism::identity(bin, bin), ham) == 0.0);
  CHECK(expected_distortion(j, Mechanism::constant(bin, bin, bin, 0), ham) ==
        Catch::Approx(0.5).margin(1e-12));
  CHECK(expected_distortion(j, copy_y_mechanism(), ham) ==
        Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("squared-error distortion requires an embedding") {
  const auto j = canonical_joint();
  const Alphabet bin = Alphabet::binary();
  const auto sq = DistortionMeasure::squared_error({{"0", 0.0}, {"1", 1.0}});
  CHECK(expected_distortion(j, Mechanism::constant(bin, bin, bin, 0), sq) ==
        Catch::Approx(0.5).margin(1e-12));
  const auto missing = DistortionMeasure::squared_error({{"0", 0.0}});
  CHECK_THROWS_AS(
      expected_distortion(j, Mechanism::constant(bin, bin, bin, 0), missing),
      MissingEmbedding);
}

TEST_CASE("property: random mechanisms have valid channel rows") {
  CounterRng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const std::size_t nk = 2 + rng.below(3);
    const Alphabet ax = Alphabet::indexed(nx, "x");
    const Alphabet ay = Alphabet::indexed(ny, "y");
    const Alphabet ak = Alphabet::indexed(nk, "k");
    const Mechanism m = random_mechanism(rng, ax, ay, ak);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        double total = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
          const double v = m.q(x, y, k);
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          total += v;
        }
        CHECK(total == Catch::Approx(1.0).margin(1e-9));
      }
  }
}

TEST_CASE("property: push_through preserves the Y marginal") {
  CounterRng rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const std::size_t nk = 2 + rng.below(3);
    const auto j = random_joint(rng, nx, ny);
    const auto m = random_mechanism(rng, j.x_alphabet(), j.y_alphabet(),
                                    Alphabet::indexed(nk, "k"));
    const auto before = marginal(j, Axis::Y);
    const auto after = marginal(push_through(j, m), Axis::Y);
    for (std::size_t y = 0; y < ny; ++y)
      CHECK(after[y] == Catch::Approx(before[y]).margin(1e-9));
  }
}

TEST_CASE("property: mutual information is non-negative and symmetric") {
  CounterRng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nx = 2 + rng.below(3);
    const std::size_t ny = 2 + rng.below(3);
    const auto j = random_joint(rng, nx, ny);
    const double i_xy = mutual_information(j);
    CHECK(i_xy >= -1e-12);
    CHECK(i_xy <= std::min(entropy(marginal(j, Axis::X)),
                           entropy(marginal(j, Axis::Y))) +
                      1e-9);
    // Transpose and recompute.
    std::vector<std::vector<double>> pt(ny, std::vector<double>(nx));
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) pt[y][x] = j.p(x, y);
    const JointDistribution jt(j.y_alphabet(), j.x_alphabet(), std::move(pt));
    CHECK(mutual_information(jt) == Catch::Approx(i_xy).margin(1e-9));
  }
}

TEST_CASE("property: entropy bounded by log of alphabet size") {
  CounterRng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    std::vector<double> row(n);
    double total = 0.0;
    for (auto& v : row) {
      v = rng.uniform();
      total += v;
    }
    for (auto& v : row) v /= total;
    CHECK(entropy(row) <= std::log2(static_cast<double>(n)) + 1e-9);
  }
}
