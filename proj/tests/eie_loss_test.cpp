/* Copyright 2026 The eieseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>

#include "eieseg/demos.hpp"
#include "eieseg/eie_loss.hpp"
#include "oracles.hpp"

namespace eieseg {
namespace {

using testing::central_differences;
using testing::flat;
using testing::naive_energy;
using testing::normwise_rel_error;
using testing::random_field;

Field2D flip_horizontal(const Field2D& f) {
  Field2D out(f.height(), f.width());
  for (std::size_t y = 0; y < f.height(); ++y)
    for (std::size_t x = 0; x < f.width(); ++x) out(y, f.width() - 1 - x) = f(y, x);
  return out;
}

Field2D flip_vertical(const Field2D& f) {
  Field2D out(f.height(), f.width());
  for (std::size_t y = 0; y < f.height(); ++y)
    for (std::size_t x = 0; x < f.width(); ++x) out(f.height() - 1 - y, x) = f(y, x);
  return out;
}

Field2D rotate90(const Field2D& f) { return flip_horizontal(transposed(f)); }

LogitStack random_logits(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed, double scale = 2.0) {
  std::vector<Field2D> ch;
  for (std::size_t c = 0; c < n; ++c) ch.push_back(random_field(h, w, seed * 1000 + c, -scale, scale));
  return LogitStack(std::move(ch));
}

LabelStack random_labels(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed, bool with_ignore = false) {
  SplitMix64 rng(seed);
  ClassMap m{h, w, std::vector<int>(h * w)};
  for (int& l : m.labels) {
    l = static_cast<int>(rng.below(n));
    if (with_ignore && rng.uniform() < 0.2) l = kIgnoreLabel;
  }
  return LabelStack::from_class_map(m, n);
}

double energy_of_flat(const std::vector<double>& v, std::size_t h, std::size_t w) {
  return eie_energy(Field2D(h, w, v));
}

LogitStack unflatten(const std::vector<double>& v, std::size_t n, std::size_t h, std::size_t w) {
  std::vector<Field2D> ch;
  for (std::size_t c = 0; c < n; ++c)
    ch.emplace_back(h, w, std::vector<double>(v.begin() + static_cast<long>(c * h * w), v.begin() + static_cast<long>((c + 1) * h * w)));
  return LogitStack(std::move(ch));
}

std::vector<double> flatten(const LogitStack& s) {
  std::vector<double> out;
  for (const Field2D& f : s.channels()) out.insert(out.end(), f.values().begin(), f.values().end());
  return out;
}

double eie_gradient_error(std::size_t h, std::size_t w, std::uint64_t seed) {
  const Field2D d = random_field(h, w, seed);
  const std::vector<double> fd =
      central_differences([&](const std::vector<double>& v) { return energy_of_flat(v, h, w); }, flat(d), 1e-6);
  return normwise_rel_error(flat(eie_gradient(d)), fd);
}

double backward_error(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed, const EieConfig& cfg) {
  const LogitStack logits = random_logits(n, h, w, seed);
  const LabelStack labels = random_labels(n, h, w, seed + 77);
  const std::vector<double> fd = central_differences(
      [&](const std::vector<double>& v) { return combined_loss(unflatten(v, n, h, w), labels, cfg).total; },
      flatten(logits), 1e-6);
  return normwise_rel_error(flatten(combined_loss_backward(logits, labels, cfg)), fd);
}

TEST(EieEnergyTest, ZeroAndConstantFieldsHaveNoEnergy) {
  EXPECT_EQ(eie_energy(Field2D(8, 8)), 0.0);
  EXPECT_NEAR(eie_energy(Field2D(8, 6, 0.73)), 0.0, 1e-25);
  EXPECT_NEAR(eie_energy(Field2D(5, 7, -4.0)), 0.0, 1e-25);
}

TEST(EieEnergyTest, BlockMatchesNaiveOracle) {
  Field2D gt(8, 8);
  for (std::size_t y = 3; y < 5; ++y)
    for (std::size_t x = 3; x < 5; ++x) gt(y, x) = 1.0;
  const Field2D d = combined_field(Field2D(8, 8), gt, 1.0);
  // Frozen from an independent numpy direct-sum evaluation.
  constexpr double kExpected = 0.11482053002699259;
  EXPECT_NEAR(eie_energy(d), kExpected, 1e-12 * kExpected);
  EXPECT_NEAR(naive_energy(d), kExpected, 1e-12 * kExpected);
}

TEST(EieEnergyTest, RandomFieldsMatchNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Field2D d = random_field(6 + seed, 9 - seed, seed);
    const double e = naive_energy(d);
    EXPECT_NEAR(eie_energy(d), e, 1e-10 * e);
  }
}

TEST(EieGradientTest, ZeroFieldGivesZeroGradient) {
  const Field2D g = eie_gradient(Field2D(6, 6));
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(EieGradientTest, LinearInField) {
  const Field2D d = random_field(8, 8, 1);
  EXPECT_LE(normwise_rel_error(flat(eie_gradient(scaled(d, 2.0))), flat(scaled(eie_gradient(d), 2.0))), 1e-10);
}

TEST(EieGradientTest, MatchesCentralDifferences8x8) { EXPECT_LE(eie_gradient_error(8, 8, 5), 1e-6); }

TEST(EieGradientTest, MatchesCentralDifferencesAcrossSizes) {
  for (auto [h, w] : {std::pair{4u, 4u}, {5u, 7u}, {8u, 8u}, {3u, 10u}})
    for (std::uint64_t seed = 0; seed < 3; ++seed) EXPECT_LE(eie_gradient_error(h, w, seed + 40), 1e-6) << h << "x" << w;
}

TEST(EieInvariantsTest, QuadraticFormIdentities) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t h = 5 + seed % 4, w = 6 + seed % 3;
    const Field2D d = random_field(h, w, seed + 500);
    const double e = eie_energy(d);
    EXPECT_GE(e, 0.0);
    EXPECT_NEAR(eie_energy(cyclic_shift(d, 2, 3)), e, 1e-10 * e);
    EXPECT_NEAR(eie_energy(flip_horizontal(d)), e, 1e-10 * e);
    EXPECT_NEAR(eie_energy(flip_vertical(d)), e, 1e-10 * e);
    EXPECT_NEAR(eie_energy(flip_vertical(flip_horizontal(d))), e, 1e-10 * e);
    EXPECT_NEAR(eie_energy(scaled(d, -2.5)), 6.25 * e, 1e-10 * 6.25 * e);
    Field2D shifted = d;
    for (double& v : shifted.values()) v += 3.0;
    EXPECT_NEAR(eie_energy(shifted), e, 1e-10 * e);
  }
  const Field2D sq = random_field(9, 9, 3);
  EXPECT_NEAR(eie_energy(rotate90(sq)), eie_energy(sq), 1e-10 * eie_energy(sq));
}

TEST(EnergyDecomposeTest, ZeroPredictionHasNoSelfOrInteraction) {
  const Field2D gt = random_field(6, 6, 2, 0.0, 1.0);
  const EnergyParts p = energy_decompose(Field2D(6, 6), gt);
  EXPECT_EQ(p.self_pred, 0.0);
  EXPECT_EQ(p.interaction, 0.0);
}

TEST(EnergyDecomposeTest, CoincidentCurvesCancel) {
  Field2D gt(12, 12);
  for (std::size_t y = 2; y < 9; ++y) gt(y, 4) = gt(y, 5) = 1.0;
  const EnergyParts p = energy_decompose(gt, gt);
  EXPECT_NEAR(p.total, 0.0, 1e-14);
  EXPECT_NEAR(p.interaction, -2.0 * p.self_gt, 1e-10 * p.self_gt);
}

TEST(EnergyDecomposeTest, ShiftedBarsAttract) {
  Field2D gt(16, 16), pred(16, 16);
  for (std::size_t y = 2; y < 14; ++y)
    for (std::size_t x = 5; x < 8; ++x) {
      gt(y, x) = 1.0;
      pred(y, x + 2) = 1.0;
    }
  EXPECT_LT(energy_decompose(pred, gt).interaction, 0.0);
}

TEST(EnergyDecomposeTest, OverlappingTranslateFamilyAttracts) {
  const std::vector<TranslatePair> family = interaction_family();
  ASSERT_EQ(family.size(), 12u);
  for (const TranslatePair& tp : family) {
    EXPECT_LT(energy_decompose(tp.pred, tp.gt).interaction, 0.0) << tp.name;
    const EnergyParts same = energy_decompose(tp.gt, tp.gt);
    EXPECT_NEAR(same.interaction, -2.0 * same.self_gt, 1e-10 * same.self_gt) << tp.name;
  }
}

// Once the supports separate, the off-diagonal part of the kernel dominates
// and the cross term changes sign. Evaluated with the direct-sum oracle.
TEST(EnergyDecomposeTest, DisjointTranslatesHavePositiveCrossTerm) {
  Field2D gt(16, 16);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 4; x < 7; ++x) gt(y, x) = 1.0;
  for (long shift = 3; shift <= 8; ++shift) {
    const Field2D pred = cyclic_shift(gt, 0, shift);
    const double cross = naive_energy(axpby(1.0, pred, -1.0, gt)) - naive_energy(pred) - naive_energy(gt);
    EXPECT_GT(cross, 0.0) << shift;
    EXPECT_NEAR(energy_decompose(pred, gt).interaction, cross, 1e-10);
  }
}

TEST(EnergyDecomposeTest, SumEqualsCombinedEnergy) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Field2D pred = scaled(random_field(7, 8, seed, 0.0, 1.0), 1.3);
    const Field2D gt = random_field(7, 8, seed + 99, 0.0, 1.0);
    const EnergyParts p = energy_decompose(pred, gt);
    const double e = eie_energy(axpby(1.0, pred, -1.0, gt));
    EXPECT_NEAR(p.self_pred + p.self_gt + p.interaction, e, 1e-10 * (p.self_pred + p.self_gt));
  }
}

TEST(EnergyDecomposeTest, DimensionMismatch) {
  EXPECT_THROW(energy_decompose(Field2D(4, 4), Field2D(4, 5)), DimensionError);
}

TEST(SoftmaxTest, EqualLogitsAreUniform) {
  const ProbStack p = softmax(LogitStack(4, 3, 3, 1.7));
  for (const Field2D& c : p.channels())
    for (double v : c.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SoftmaxTest, TwentyVersusZero) {
  LogitStack l(2, 1, 1);
  l[0][0] = 20.0;
  const ProbStack p = softmax(l);
  EXPECT_NEAR(p[0][0], 1.0 / (1.0 + std::exp(-20.0)), 1e-16);
  EXPECT_NEAR(1.0 - p[0][0], 2.06e-9, 0.01e-9);
}

TEST(SoftmaxTest, ShiftInvarianceAndNormalization) {
  const LogitStack l = random_logits(3, 5, 5, 4, 30.0);
  LogitStack shifted = l;
  const Field2D offsets = random_field(5, 5, 9, -100.0, 100.0);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < 25; ++p) shifted[c][p] += offsets[p];
  const ProbStack a = softmax(l), b = softmax(shifted);
  for (std::size_t p = 0; p < 25; ++p) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(a[c][p], b[c][p], 1e-12);
      sum += a[c][p];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(CrossEntropyTest, SaturatedLogitsGiveZero) {
  const LabelStack labels = random_labels(3, 4, 4, 1);
  LogitStack l(3, 4, 4, -50.0);
  for (std::size_t p = 0; p < 16; ++p) l[static_cast<std::size_t>(labels.label_at(p))][p] = 50.0;
  EXPECT_LE(cross_entropy(l, labels), 1e-20);
}

TEST(CrossEntropyTest, UniformLogitsGiveLogN) {
  for (std::size_t n : {2u, 3u, 5u}) {
    EXPECT_NEAR(cross_entropy(LogitStack(n, 3, 4), random_labels(n, 3, 4, n)), std::log(static_cast<double>(n)), 1e-15);
  }
}

TEST(CrossEntropyTest, TwoPixelHandEvaluation) {
  LogitStack l(2, 1, 2);
  l[0][0] = 1.0;
  l[1][0] = 0.0;
  l[0][1] = 0.5;
  l[1][1] = 2.0;
  const LabelStack labels = LabelStack::from_class_map(ClassMap{1, 2, {0, 1}}, 2);
  // (log(1 + e^-1) + log(1 + e^-1.5)) / 2
  EXPECT_NEAR(cross_entropy(l, labels), 0.2573374827504876, 1e-15);
}

TEST(CrossEntropyTest, IgnoredPixelsExcluded) {
  LogitStack l(2, 1, 2);
  l[0][0] = 1.0;
  l[1][1] = 7.0;
  const LabelStack labels = LabelStack::from_class_map(ClassMap{1, 2, {0, kIgnoreLabel}}, 2);
  EXPECT_NEAR(cross_entropy(l, labels), std::log1p(std::exp(-1.0)), 1e-15);
  const LabelStack all = LabelStack::from_class_map(ClassMap{1, 2, {kIgnoreLabel, kIgnoreLabel}}, 2);
  EXPECT_EQ(cross_entropy(l, all), 0.0);
}

TEST(CombinedLossTest, LambdaOneZeroReducesToCrossEntropy) {
  const LogitStack l = random_logits(3, 6, 6, 2);
  const LabelStack g = random_labels(3, 6, 6, 3);
  const LossBreakdown b = combined_loss(l, g, EieConfig{1.0, 0.0, 0.7, "integer-cycles"});
  EXPECT_EQ(b.total, 0.7 * cross_entropy(l, g));
}

TEST(CombinedLossTest, SaturatedCorrectLogits) {
  const LabelStack g = random_labels(3, 8, 8, 5);
  LogitStack l(3, 8, 8, -50.0);
  for (std::size_t p = 0; p < 64; ++p) l[static_cast<std::size_t>(g.label_at(p))][p] = 50.0;
  const LossBreakdown b = combined_loss(l, g, EieConfig{1.0, 2.0, 3.0, "integer-cycles"});
  EXPECT_LE(b.eie_total, 1e-12);
  EXPECT_LE(b.ce, 1e-20);
  EXPECT_LE(b.total, 1e-12 * 5.0);
}

TEST(CombinedLossTest, PerClassEnergiesMatchSingleFieldOracle) {
  const LogitStack l = random_logits(3, 8, 8, 9);
  const LabelStack g = random_labels(3, 8, 8, 9);
  const EieConfig cfg{1.5, 0.8, 1.2, "integer-cycles"};
  const LossBreakdown b = combined_loss(l, g, cfg);
  const ProbStack p = softmax(l);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    Field2D d(8, 8);
    for (std::size_t q = 0; q < 64; ++q) d[q] = 1.5 * p[i][q] - g[i][q];
    const double e = naive_energy(d);
    EXPECT_NEAR(b.eie_per_class[i], e, 1e-10 * e);
    sum += b.eie_per_class[i];
  }
  EXPECT_NEAR(b.eie_total, sum, 1e-12);
  EXPECT_NEAR(b.total, 0.8 * b.eie_total + 1.2 * b.ce, 1e-12);
}

TEST(CombinedLossTest, RejectsBadInputs) {
  const LabelStack g = random_labels(3, 4, 4, 1);
  EXPECT_THROW(combined_loss(LogitStack(2, 4, 4), g, EieConfig{}), DimensionError);
  EXPECT_THROW(combined_loss(LogitStack(3, 4, 4), g, EieConfig{0.0, 1.0, 1.0, "integer-cycles"}), std::invalid_argument);
  EXPECT_THROW(combined_loss(LogitStack(3, 4, 4), g, EieConfig{1.0, 0.0, 0.0, "integer-cycles"}), std::invalid_argument);
  const LabelStack one = LabelStack::from_class_map(ClassMap{4, 4, std::vector<int>(16, 0)}, 1);
  EXPECT_THROW(combined_loss(LogitStack(1, 4, 4), one, EieConfig{}), DimensionError);
}

TEST(CombinedBackwardTest, CrossEntropyOnlyClosedForm) {
  const LogitStack l = random_logits(3, 5, 5, 6);
  const LabelStack g = random_labels(3, 5, 5, 6);
  const LogitStack grad = combined_loss_backward(l, g, EieConfig{1.0, 0.0, 2.0, "integer-cycles"});
  const ProbStack p = softmax(l);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t q = 0; q < 25; ++q) EXPECT_NEAR(grad[c][q], 2.0 * (p[c][q] - g[c][q]) / 25.0, 1e-15);
}

TEST(CombinedBackwardTest, RespectsClassPermutation) {
  // Uniform logits; labels of class 1 are the mirror of class 0's.
  ClassMap m{4, 4, std::vector<int>(16)};
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) m(y, x) = x < 2 ? 0 : 1;
  const LabelStack g = LabelStack::from_class_map(m, 2);
  const LogitStack grad = combined_loss_backward(LogitStack(2, 4, 4), g, EieConfig{});
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(grad[0](y, x), grad[1](y, 3 - x), 1e-15);
}

TEST(CombinedBackwardTest, MatchesCentralDifferences6x6) {
  EXPECT_LE(backward_error(3, 6, 6, 13, EieConfig{}), 1e-5);
}

TEST(CombinedBackwardTest, MatchesCentralDifferencesAcrossShapes) {
  const EieConfig cfg{1.3, 0.9, 0.4, "integer-cycles"};
  for (auto [h, w] : {std::pair{4u, 4u}, {5u, 7u}, {8u, 8u}})
    for (std::size_t n : {2u, 3u, 5u}) EXPECT_LE(backward_error(n, h, w, 31 + n, cfg), 1e-5) << h << "x" << w << " N=" << n;
}

TEST(CombinedBackwardTest, IgnoredPixelsGetNoGradient) {
  const LogitStack l = random_logits(3, 6, 6, 8);
  const LabelStack g = random_labels(3, 6, 6, 8, true);
  ASSERT_TRUE(g.has_ignore());
  const LogitStack grad = combined_loss_backward(l, g, EieConfig{});
  for (std::size_t q = 0; q < 36; ++q) {
    if (!g.is_ignored(q)) continue;
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(grad[c][q], 0.0);
  }
}

TEST(CombinedBackwardTest, AgreesWithSeparateLossCall) {
  const LogitStack l = random_logits(4, 7, 5, 12);
  const LabelStack g = random_labels(4, 7, 5, 12);
  const EieConfig cfg{};
  const LossWithGradient both = combined_loss_with_gradient(l, g, cfg);
  const LossBreakdown only = combined_loss(l, g, cfg);
  EXPECT_EQ(both.loss.total, only.total);
  EXPECT_EQ(both.loss.eie_per_class, only.eie_per_class);
}

}  // namespace
}  // namespace eieseg
