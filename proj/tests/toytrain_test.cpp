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

#include "eieseg/demos.hpp"
#include "eieseg/toytrain.hpp"
#include "oracles.hpp"

namespace eieseg {
namespace {

using testing::central_differences;
using testing::normwise_rel_error;

std::size_t count_label(const SyntheticScene& s, int c) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < s.labels.pixels(); ++p) n += s.labels.label_at(p) == c;
  return n;
}

Field2D class_mask(const SyntheticScene& s, int c) {
  Field2D m(s.labels.height(), s.labels.width());
  for (std::size_t p = 0; p < m.size(); ++p) m[p] = s.labels.label_at(p) == c ? 1.0 : 0.0;
  return m;
}

TEST(SceneTest, SameSeedSameScene) {
  for (SceneKind k : {SceneKind::kLanes, SceneKind::kBlobs, SceneKind::kMixed}) {
    const SyntheticScene a = generate_scene(k, 40, 48, 17), b = generate_scene(k, 40, 48, 17);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.labels.to_class_map().labels, b.labels.to_class_map().labels);
    EXPECT_NE(a.image, generate_scene(k, 40, 48, 18).image);
  }
}

TEST(SceneTest, TooSmallRejected) { EXPECT_THROW(generate_scene(SceneKind::kLanes, 15, 32, 1), DimensionError); }

TEST(SceneTest, LanesAreAtMostThreePixelsWide) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SyntheticScene s = generate_scene(SceneKind::kLanes, 48, 64, seed);
    const Field2D m = class_mask(s, kThinClass);
    EXPECT_GT(count_label(s, kThinClass), 0u);
    // Erosion by a horizontal 1x4 element must leave nothing.
    for (std::size_t y = 0; y < m.height(); ++y)
      for (std::size_t x = 0; x + 3 < m.width(); ++x)
        EXPECT_FALSE(m(y, x) > 0 && m(y, x + 1) > 0 && m(y, x + 2) > 0 && m(y, x + 3) > 0) << "seed " << seed;
    EXPECT_EQ(count_label(s, kBlobClass), 0u);
  }
}

TEST(SceneTest, OcclusionErasesImageButKeepsLabels) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticScene s = generate_scene(SceneKind::kLanes, 64, 64, seed);
    ASSERT_GE(s.occlusion_boxes.size(), 1u);
    ASSERT_LE(s.occlusion_boxes.size(), 2u);
    for (const Rect& r : s.occlusion_boxes) {
      ASSERT_LE(r.y0 + r.height, 64u);
      ASSERT_LE(r.x0 + r.width, 64u);
      std::size_t thin = 0;
      for (std::size_t y = r.y0; y < r.y0 + r.height; ++y)
        for (std::size_t x = r.x0; x < r.x0 + r.width; ++x) {
          EXPECT_GE(s.image(y, x), SceneIntensities::kBackgroundLo);
          EXPECT_LT(s.image(y, x), SceneIntensities::kBackgroundLo + SceneIntensities::kBackgroundSpan);
          thin += s.labels.label_at(y * 64 + x) == kThinClass;
        }
      EXPECT_GT(thin, 0u);
    }
  }
}

TEST(SceneTest, BlobsAreSmallSeparateRegions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticScene s = generate_scene(SceneKind::kBlobs, 48, 48, seed);
    const Components c = connected_components(class_mask(s, kBlobClass), 0.5);
    EXPECT_GE(c.count, 3u);
    EXPECT_LE(c.count, 8u);
    std::vector<std::size_t> sizes(c.count + 1, 0);
    for (int l : c.labels) ++sizes[static_cast<std::size_t>(l)];
    for (std::size_t i = 1; i <= c.count; ++i) EXPECT_LE(sizes[i], 40u);
    EXPECT_TRUE(s.occlusion_boxes.empty());
  }
}

TEST(SceneTest, MixedScenesAreImbalanced) {
  for (std::size_t size : {16u, 32u, 64u, 96u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SyntheticScene s = generate_scene(SceneKind::kMixed, size, size, seed);
      const std::size_t thin = count_label(s, kThinClass);
      const std::size_t bg = count_label(s, kBackgroundClass);
      EXPECT_GT(thin, 0u);
      EXPECT_GE(static_cast<double>(bg), 20.0 * static_cast<double>(thin)) << size << " seed " << seed;
    }
  }
}

TEST(FeaturesTest, ConstantImage) {
  const std::vector<Field2D> f = features(Field2D(16, 20, 0.4));
  ASSERT_EQ(f.size(), kFeatureCount);
  for (std::size_t k : {0u, 1u, 2u})
    for (double v : f[k].values()) EXPECT_NEAR(v, 0.4, 1e-15);
  for (double v : f[5].values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(f[3](0, 19), 1.0);
  EXPECT_EQ(f[4](15, 0), 1.0);
}

TEST(FeaturesTest, ImpulseBlurIsStampedKernel) {
  Field2D img(12, 10);
  img(1, 9) = 1.0;  // near a corner so the stamp wraps
  for (std::size_t k : {3u, 7u}) {
    const Field2D b = box_blur(img, k);
    const long r = static_cast<long>(k / 2);
    for (long y = 0; y < 12; ++y)
      for (long x = 0; x < 10; ++x) {
        long dy = std::abs(y - 1), dx = std::abs(x - 9);
        dy = std::min(dy, 12 - dy);
        dx = std::min(dx, 10 - dx);
        const double expected = dy <= r && dx <= r ? 1.0 / static_cast<double>(k * k) : 0.0;
        EXPECT_NEAR(b(static_cast<std::size_t>(y), static_cast<std::size_t>(x)), expected, 1e-15);
      }
  }
}

PixelClassifier random_model(std::uint64_t seed) {
  SplitMix64 rng(seed);
  PixelClassifier m(kSceneClasses, kFeatureCount);
  for (double& w : m.weights()) w = rng.uniform(-1.0, 1.0);
  for (double& b : m.bias()) b = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<double> params_of(const PixelClassifier& m) {
  std::vector<double> v = m.weights();
  v.insert(v.end(), m.bias().begin(), m.bias().end());
  return v;
}

void set_params(PixelClassifier& m, const std::vector<double>& v) {
  std::copy(v.begin(), v.begin() + static_cast<long>(m.weights().size()), m.weights().begin());
  std::copy(v.begin() + static_cast<long>(m.weights().size()), v.end(), m.bias().begin());
}

TEST(ClassifierTest, ZeroModelZeroLogits) {
  const PixelClassifier m(3, kFeatureCount);
  const LogitStack l = m.forward(features(generate_scene(SceneKind::kBlobs, 16, 16, 1).image));
  for (const Field2D& c : l.channels())
    for (double v : c.values()) EXPECT_EQ(v, 0.0);
}

TEST(ClassifierTest, ZeroUpstreamGradient) {
  const PixelClassifier m = random_model(2);
  const std::vector<Field2D> f = features(generate_scene(SceneKind::kBlobs, 16, 16, 2).image);
  const ClassifierGrad g = m.backward(f, LogitStack(3, 16, 16));
  for (double v : g.weights) EXPECT_EQ(v, 0.0);
  for (double v : g.bias) EXPECT_EQ(v, 0.0);
}

TEST(ClassifierTest, BackwardMatchesFiniteDifferences) {
  const SyntheticScene s = generate_scene(SceneKind::kMixed, 16, 16, 21);
  const std::vector<Field2D> f = features(s.image);
  PixelClassifier m = random_model(21);
  // Linear probe: J = sum_c sum_x u_c(x) logits_c(x), with dJ/dlogits = u.
  LogitStack u(3, 16, 16);
  SplitMix64 rng(99);
  for (Field2D& c : u.channels())
    for (double& v : c.values()) v = rng.uniform(-1.0, 1.0);
  auto objective = [&](const std::vector<double>& p) {
    PixelClassifier probe = m;
    set_params(probe, p);
    const LogitStack l = probe.forward(f);
    double j = 0.0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t q = 0; q < l.pixels(); ++q) j += u[c][q] * l[c][q];
    return j;
  };
  const ClassifierGrad g = m.backward(f, u);
  std::vector<double> analytic = g.weights;
  analytic.insert(analytic.end(), g.bias.begin(), g.bias.end());
  EXPECT_LE(normwise_rel_error(analytic, central_differences(objective, params_of(m), 1e-6)), 1e-6);
}

TEST(ClassifierTest, EndToEndGradientThroughLoss) {
  const SyntheticScene s = generate_scene(SceneKind::kMixed, 16, 16, 6);
  std::vector<Field2D> f = features(s.image);
  // Crop to 6x6 for a cheap dense check.
  for (Field2D& plane : f) {
    Field2D c(6, 6);
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x < 6; ++x) c(y, x) = plane(y + 5, x + 5);
    plane = c;
  }
  ClassMap cm{6, 6, std::vector<int>(36)};
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) cm(y, x) = s.labels.label_at((y + 5) * 16 + x + 5);
  const LabelStack labels = LabelStack::from_class_map(cm, 3);
  const EieConfig cfg{1.0, 1.0, 1.0, "integer-cycles"};
  const PixelClassifier m = random_model(6);
  auto objective = [&](const std::vector<double>& p) {
    PixelClassifier probe = m;
    set_params(probe, p);
    return combined_loss(probe.forward(f), labels, cfg).total;
  };
  const ClassifierGrad g = m.backward(f, combined_loss_backward(m.forward(f), labels, cfg));
  std::vector<double> analytic = g.weights;
  analytic.insert(analytic.end(), g.bias.begin(), g.bias.end());
  EXPECT_LE(normwise_rel_error(analytic, central_differences(objective, params_of(m), 1e-6)), 1e-5);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.height = 32;
  cfg.width = 32;
  cfg.train_count = 2;
  cfg.val_count = 2;
  return cfg;
}

TEST(TrainTest, CrossEntropyDecreasesOnBlobs) {
  TrainConfig cfg = small_config();
  cfg.scene_kind = SceneKind::kBlobs;
  cfg.eie.lambda1 = 0.0;
  cfg.epochs = 6;
  const TrainReport r = train(cfg);
  for (std::size_t e = 1; e < 6; ++e) EXPECT_LT(r.epochs[e].ce, r.epochs[e - 1].ce) << "epoch " << e + 1;
}

TEST(TrainTest, RejectsZeroEpochs) {
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  EXPECT_THROW(train(cfg), std::invalid_argument);
}

TEST(TrainTest, ReportIsDeterministic) {
  const TrainConfig cfg = small_config();
  const std::string a = report_csv(train(cfg));
  const std::string b = report_csv(train(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "epoch,total,ce,eie,val_miou,val_iou_class0,val_iou_class1,val_iou_class2");
}

TEST(TrainTest, DivergenceNamesEpoch) {
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e308;
  try {
    train(cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_GE(e.epoch(), 1u);
    EXPECT_LE(e.epoch(), cfg.epochs);
  }
}

TEST(TrainTest, CompareArmsShareScenes) {
  TrainConfig cfg = small_config();
  cfg.epochs = 3;
  const CompareReport r = train_compare(cfg);
  EXPECT_EQ(r.ce_only.epochs[0].ce, r.with_eie.epochs[0].ce);
  EXPECT_EQ(r.ce_only.epochs[0].eie, 0.0);
  EXPECT_GT(r.with_eie.epochs[0].eie, 0.0);
}

TEST(ScalingTest, FittedPlanesAreStandardized) {
  TrainConfig cfg = small_config();
  std::vector<PreparedScene> set = prepare_scenes(cfg, false);
  std::vector<std::vector<Field2D>> planes;
  for (const PreparedScene& s : set) planes.push_back(s.feats);
  const FeatureScaling scaling = FeatureScaling::fit(planes);
  for (auto& feats : planes) scaling.apply(feats);
  for (std::size_t f = 0; f + 1 < kFeatureCount; ++f) {
    double n = 0.0, sum = 0.0, sq = 0.0;
    for (const auto& feats : planes) {
      for (double v : feats[f].values()) {
        n += 1.0;
        sum += v;
        sq += v * v;
      }
    }
    EXPECT_NEAR(sum / n, 0.0, 1e-9) << "plane " << f;
    EXPECT_NEAR(sq / n, 1.0, 1e-9) << "plane " << f;
  }
  EXPECT_EQ(scaling.mean[kFeatureCount - 1], 0.0);
  EXPECT_EQ(scaling.scale[kFeatureCount - 1], 1.0);
  for (const auto& feats : planes) {
    for (double v : feats[kFeatureCount - 1].values()) EXPECT_EQ(v, 1.0);
  }
}

TEST(ScalingTest, DisabledLeavesIdentity) {
  TrainConfig cfg = small_config();
  cfg.standardize = false;
  cfg.epochs = 1;
  const TrainReport r = train(cfg);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    EXPECT_EQ(r.scaling.mean[f], 0.0);
    EXPECT_EQ(r.scaling.scale[f], 1.0);
  }
}

TEST(TrainTest, ConvergenceToleranceStopsEarly) {
  TrainConfig cfg = small_config();
  cfg.epochs = 20000;
  cfg.convergence_tol = 1e-3;
  cfg.convergence_window = 10;
  const TrainReport r = train(cfg);
  ASSERT_TRUE(r.converged);
  ASSERT_GT(r.epochs.size(), 10u);
  EXPECT_LT(r.epochs.size(), cfg.epochs);
  const double last = r.epochs.back().total;
  EXPECT_LE(std::abs(last - r.epochs[r.epochs.size() - 11].total), 1e-3 * last);

  cfg.convergence_tol = 0.0;
  cfg.epochs = 25;
  const TrainReport full = train(cfg);
  EXPECT_FALSE(full.converged);
  EXPECT_EQ(full.epochs.size(), 25u);
}

TEST(TrainTest, RejectsBadConvergenceSettings) {
  TrainConfig cfg = small_config();
  cfg.convergence_tol = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.convergence_tol = 1e-5;
  cfg.convergence_window = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(TrainTest, EnergyArmNotWorseOnThinClassAfterConvergence) {
  const CompareReport r = train_compare(train_compare_demo_config(1));
  ASSERT_TRUE(r.ce_only.converged);
  ASSERT_TRUE(r.with_eie.converged);
  EXPECT_GE(r.with_eie.epochs.back().val.per_class[kThinClass], r.ce_only.epochs.back().val.per_class[kThinClass]);
}

}  // namespace
}  // namespace eieseg
