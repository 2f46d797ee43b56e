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

// Desk-scale training harness: synthetic scenes with thin structures and
// small blobs, a linear per-pixel classifier, and full-batch gradient descent
// on the combined EIE + cross-entropy loss.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eieseg/eie_loss.hpp"
#include "eieseg/field.hpp"
#include "eieseg/format.hpp"
#include "eieseg/metrics.hpp"
#include "eieseg/rng.hpp"

namespace eieseg {

enum class SceneKind { kLanes, kBlobs, kMixed };

inline std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::kLanes: return "lanes";
    case SceneKind::kBlobs: return "blobs";
    case SceneKind::kMixed: return "mixed";
  }
  return "?";
}

inline SceneKind parse_scene_kind(const std::string& s) {
  if (s == "lanes") return SceneKind::kLanes;
  if (s == "blobs") return SceneKind::kBlobs;
  if (s == "mixed") return SceneKind::kMixed;
  throw std::invalid_argument("unknown scene kind '" + s + "' (expected lanes|blobs|mixed)");
}

// Class layout shared by every scene kind.
inline constexpr std::size_t kSceneClasses = 3;
inline constexpr int kBackgroundClass = 0;
inline constexpr int kThinClass = 1;
inline constexpr int kBlobClass = 2;

// Intensity ranges [lo, lo + span).
struct SceneIntensities {
  static constexpr double kBackgroundLo = 0.15, kBackgroundSpan = 0.25;
  static constexpr double kLaneLo = 0.35, kLaneSpan = 0.35;
  static constexpr double kBlobLo = 0.55, kBlobSpan = 0.10;
};

inline constexpr double kMinBackgroundToThinRatio = 20.0;

struct Rect {
  std::size_t y0 = 0, x0 = 0, height = 0, width = 0;

  bool contains(std::size_t y, std::size_t x) const {
    return y >= y0 && y < y0 + height && x >= x0 && x < x0 + width;
  }
};

struct SyntheticScene {
  Field2D image;
  LabelStack labels;
  std::vector<Rect> occlusion_boxes;
};

namespace detail {

struct LaneShape {
  double amplitude;
  double period;
  double phase;
};

inline long lane_column(double center, const LaneShape& s, std::size_t y) {
  return std::lround(center + s.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(y) / s.period + s.phase));
}

}  // namespace detail

// Deterministic in (kind, h, w, seed). Streams: 0 texture, 1 lanes, 2 blobs,
// 3 occlusions, each forked from SplitMix64(seed).
inline SyntheticScene generate_scene(SceneKind kind, std::size_t h, std::size_t w, std::uint64_t seed) {
  if (h < 16 || w < 16) throw DimensionError("generate_scene: h and w must be >= 16");
  const SplitMix64 root(seed);
  SplitMix64 texture_rng = root.fork(0);
  SplitMix64 lane_rng = root.fork(1);
  SplitMix64 blob_rng = root.fork(2);
  SplitMix64 occ_rng = root.fork(3);

  using I = SceneIntensities;
  Field2D texture(h, w);
  for (double& v : texture.values()) v = I::kBackgroundLo + I::kBackgroundSpan * texture_rng.uniform();
  Field2D image = texture;
  ClassMap labels{h, w, std::vector<int>(h * w, kBackgroundClass)};

  // Lanes: parallel translates of one sinusoid, at least width + 2 columns apart.
  std::vector<std::vector<std::size_t>> lane_pixels;  // per lane, in row order
  detail::LaneShape shape{};
  if (kind != SceneKind::kBlobs) {
    const bool mixed = kind == SceneKind::kMixed;
    std::size_t count = static_cast<std::size_t>(mixed ? lane_rng.between(2, 3) : lane_rng.between(2, 4));
    const std::size_t lane_width = static_cast<std::size_t>(mixed ? lane_rng.between(1, 2) : lane_rng.between(1, 3));
    shape.amplitude = lane_rng.uniform(0.0, 3.0);
    shape.period = lane_rng.uniform(0.8, 2.5) * static_cast<double>(h);
    shape.phase = lane_rng.uniform(0.0, 2.0 * std::numbers::pi);
    while (count > 1 && static_cast<double>(w) / static_cast<double>(count + 1) < static_cast<double>(lane_width + 4)) --count;
    const double spacing = static_cast<double>(w) / static_cast<double>(count + 1);
    for (std::size_t j = 0; j < count; ++j) {
      const double center = spacing * static_cast<double>(j + 1) - 0.5 * static_cast<double>(lane_width) +
                            lane_rng.uniform(-0.5, 0.5);
      std::vector<std::size_t> pixels;
      for (std::size_t y = 0; y < h; ++y) {
        const long c = detail::lane_column(center, shape, y);
        for (std::size_t k = 0; k < lane_width; ++k) {
          const long x = c + static_cast<long>(k);
          if (x < 0 || x >= static_cast<long>(w)) continue;
          const std::size_t p = y * w + static_cast<std::size_t>(x);
          labels.labels[p] = kThinClass;
          image[p] = I::kLaneLo + I::kLaneSpan * lane_rng.uniform();
          pixels.push_back(p);
        }
      }
      lane_pixels.push_back(std::move(pixels));
    }
  }

  // Blobs: random-growth regions of 8..40 pixels that keep a one-pixel
  // margin (8-neighborhood) from every other labeled structure.
  if (kind != SceneKind::kLanes) {
    const long count = blob_rng.between(3, 8);
    std::vector<int> owner(h * w, -1);
    for (std::size_t p = 0; p < h * w; ++p)
      if (labels.labels[p] != kBackgroundClass) owner[p] = 0;
    auto free_for = [&](std::size_t y, std::size_t x, int id) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
          const int o = owner[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
          if (o != -1 && o != id) return false;
        }
      }
      return true;
    };
    for (long b = 0; b < count; ++b) {
      const int id = static_cast<int>(b) + 1;
      const std::size_t target = static_cast<std::size_t>(blob_rng.between(8, 40));
      std::vector<std::size_t> region;
      for (int attempt = 0; attempt < 20 && region.empty(); ++attempt) {
        const auto y = static_cast<std::size_t>(blob_rng.between(2, static_cast<long>(h) - 3));
        const auto x = static_cast<std::size_t>(blob_rng.between(2, static_cast<long>(w) - 3));
        if (owner[y * w + x] == -1 && free_for(y, x, id)) {
          owner[y * w + x] = id;
          region.push_back(y * w + x);
        }
      }
      if (region.empty()) continue;
      static constexpr long kDy[4] = {-1, 1, 0, 0};
      static constexpr long kDx[4] = {0, 0, -1, 1};
      for (std::size_t tries = 0; region.size() < target && tries < 40 * target; ++tries) {
        const std::size_t from = region[blob_rng.below(region.size())];
        const std::size_t dir = blob_rng.below(4);
        const long y = static_cast<long>(from / w) + kDy[dir];
        const long x = static_cast<long>(from % w) + kDx[dir];
        if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
        const std::size_t q = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
        if (owner[q] != -1 || !free_for(static_cast<std::size_t>(y), static_cast<std::size_t>(x), id)) continue;
        owner[q] = id;
        region.push_back(q);
      }
      for (std::size_t p : region) {
        labels.labels[p] = kBlobClass;
        image[p] = I::kBlobLo + I::kBlobSpan * blob_rng.uniform();
      }
    }
  }

  // Class-imbalance contract for mixed scenes: trim lanes from the bottom of
  // the last lane until background:thin >= 20:1.
  if (kind == SceneKind::kMixed) {
    auto count_class = [&](int c) {
      return static_cast<std::size_t>(std::count(labels.labels.begin(), labels.labels.end(), c));
    };
    std::size_t thin = count_class(kThinClass);
    const std::size_t background = count_class(kBackgroundClass);
    std::size_t bg = background;
    while (thin > 0 && static_cast<double>(bg) < kMinBackgroundToThinRatio * static_cast<double>(thin)) {
      while (!lane_pixels.empty() && lane_pixels.back().empty()) {
        lane_pixels.pop_back();
      }
      const std::size_t p = lane_pixels.back().back();
      lane_pixels.back().pop_back();
      labels.labels[p] = kBackgroundClass;
      image[p] = texture[p];
      --thin;
      ++bg;
    }
    while (!lane_pixels.empty() && lane_pixels.back().empty()) {
      lane_pixels.pop_back();
    }
  }

  // Occlusions: boxes centered on a lane point; image reverts to texture,
  // labels are untouched.
  std::vector<Rect> boxes;
  if (kind != SceneKind::kBlobs && !lane_pixels.empty()) {
    const long count = occ_rng.between(1, 2);
    for (long b = 0; b < count; ++b) {
      const std::size_t lane = occ_rng.below(lane_pixels.size());
      const std::vector<std::size_t>& px = lane_pixels[lane];
      const std::size_t anchor = px[occ_rng.below(px.size())];
      const std::size_t bh = std::min<std::size_t>(h, static_cast<std::size_t>(occ_rng.between(
                                                          static_cast<long>(std::max<std::size_t>(3, h / 12)),
                                                          static_cast<long>(std::max<std::size_t>(4, h / 6)))));
      const std::size_t bw = std::min<std::size_t>(w, static_cast<std::size_t>(occ_rng.between(5, 8)));
      const long ay = static_cast<long>(anchor / w), ax = static_cast<long>(anchor % w);
      const long y0 = std::clamp<long>(ay - static_cast<long>(bh / 2), 0, static_cast<long>(h - bh));
      const long x0 = std::clamp<long>(ax - static_cast<long>(bw / 2), 0, static_cast<long>(w - bw));
      Rect r{static_cast<std::size_t>(y0), static_cast<std::size_t>(x0), bh, bw};
      for (std::size_t y = r.y0; y < r.y0 + r.height; ++y)
        for (std::size_t x = r.x0; x < r.x0 + r.width; ++x) image(y, x) = texture(y, x);
      boxes.push_back(r);
    }
  }

  return {std::move(image), LabelStack::from_class_map(labels, kSceneClasses), std::move(boxes)};
}

inline constexpr std::size_t kFeatureCount = 6;

// Mean over a k x k window with cyclic boundaries (k odd).
inline Field2D box_blur(const Field2D& img, std::size_t k) {
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  const long r = static_cast<long>(k / 2);
  Field2D out(img.height(), img.width());
  const double norm = 1.0 / static_cast<double>(k * k);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      for (long dy = -r; dy <= r; ++dy) {
        const long yy = ((y + dy) % h + h) % h;
        for (long dx = -r; dx <= r; ++dx) {
          const long xx = ((x + dx) % w + w) % w;
          s += img(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        }
      }
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = s * norm;
    }
  }
  return out;
}

// Planes: intensity, 3x3 blur, 7x7 blur, x/(w-1), y/(h-1), constant 1.
inline std::vector<Field2D> features(const Field2D& image) {
  const std::size_t h = image.height(), w = image.width();
  Field2D xs(h, w), ys(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      xs(y, x) = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
      ys(y, x) = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
    }
  }
  std::vector<Field2D> planes;
  planes.reserve(kFeatureCount);
  planes.push_back(image);
  planes.push_back(box_blur(image, 3));
  planes.push_back(box_blur(image, 7));
  planes.push_back(std::move(xs));
  planes.push_back(std::move(ys));
  planes.emplace_back(h, w, 1.0);
  return planes;
}

// Per-plane affine map fitted on the training set. Planes with zero spread
// (the constant plane) are left unchanged.
struct FeatureScaling {
  std::vector<double> mean = std::vector<double>(kFeatureCount, 0.0);
  std::vector<double> scale = std::vector<double>(kFeatureCount, 1.0);

  static FeatureScaling fit(const std::vector<std::vector<Field2D>>& sets) {
    FeatureScaling out;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      double n = 0.0, s = 0.0, s2 = 0.0;
      for (const auto& feats : sets) {
        for (double v : feats.at(f).values()) {
          n += 1.0;
          s += v;
          s2 += v * v;
        }
      }
      if (n == 0.0) continue;
      const double mu = s / n;
      const double var = std::max(0.0, s2 / n - mu * mu);
      if (var > 1e-24) {
        out.mean[f] = mu;
        out.scale[f] = 1.0 / std::sqrt(var);
      }
    }
    return out;
  }

  void apply(std::vector<Field2D>& feats) const {
    for (std::size_t f = 0; f < feats.size() && f < mean.size(); ++f) {
      for (double& v : feats[f].values()) v = (v - mean[f]) * scale[f];
    }
  }
};

struct ClassifierGrad {
  std::vector<double> weights;  // classes x features, row-major
  std::vector<double> bias;
};

// logits_c(x) = sum_f weights[c][f] * feat_f(x) + bias[c]
class PixelClassifier {
 public:
  PixelClassifier(std::size_t classes, std::size_t feature_count)
      : classes_(classes), feature_count_(feature_count), weights_(classes * feature_count, 0.0), bias_(classes, 0.0) {}

  std::size_t classes() const { return classes_; }
  std::size_t feature_count() const { return feature_count_; }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }
  double& weight(std::size_t c, std::size_t f) { return weights_[c * feature_count_ + f]; }
  double weight(std::size_t c, std::size_t f) const { return weights_[c * feature_count_ + f]; }

  LogitStack forward(const std::vector<Field2D>& feats) const {
    check_features(feats);
    const std::size_t h = feats.front().height(), w = feats.front().width();
    LogitStack out(classes_, h, w);
    for (std::size_t c = 0; c < classes_; ++c) {
      Field2D& dst = out[c];
      for (std::size_t p = 0; p < h * w; ++p) dst[p] = bias_[c];
      for (std::size_t f = 0; f < feature_count_; ++f) {
        const double wcf = weight(c, f);
        const Field2D& src = feats[f];
        for (std::size_t p = 0; p < h * w; ++p) dst[p] += wcf * src[p];
      }
    }
    return out;
  }

  ClassifierGrad backward(const std::vector<Field2D>& feats, const LogitStack& grad_logits) const {
    check_features(feats);
    if (grad_logits.classes() != classes_ || !grad_logits[0].same_shape(feats.front())) {
      throw DimensionError("PixelClassifier::backward: gradient shape mismatch");
    }
    ClassifierGrad g{std::vector<double>(weights_.size(), 0.0), std::vector<double>(classes_, 0.0)};
    for (std::size_t c = 0; c < classes_; ++c) {
      const Field2D& gl = grad_logits[c];
      for (std::size_t p = 0; p < gl.size(); ++p) g.bias[c] += gl[p];
      for (std::size_t f = 0; f < feature_count_; ++f) {
        double s = 0.0;
        for (std::size_t p = 0; p < gl.size(); ++p) s += gl[p] * feats[f][p];
        g.weights[c * feature_count_ + f] = s;
      }
    }
    return g;
  }

 private:
  void check_features(const std::vector<Field2D>& feats) const {
    if (feats.size() != feature_count_) {
      throw DimensionError("PixelClassifier: expected " + std::to_string(feature_count_) + " feature planes, got " +
                           std::to_string(feats.size()));
    }
    for (const Field2D& f : feats) require_same_shape(feats.front(), f, "PixelClassifier");
  }

  std::size_t classes_;
  std::size_t feature_count_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct TrainConfig {
  std::size_t epochs = 3000;
  std::uint64_t seed = 1;
  double learning_rate = 0.5;
  bool standardize = true;
  // Stop once the relative change of the training loss over the last
  // convergence_window epochs drops below convergence_tol (0 disables).
  double convergence_tol = 0.0;
  std::size_t convergence_window = 100;
  EieConfig eie{};
  SceneKind scene_kind = SceneKind::kMixed;
  std::size_t train_count = 4;
  std::size_t val_count = 4;
  std::size_t height = 64;
  std::size_t width = 64;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    }
    if (train_count < 1 || val_count < 1) throw std::invalid_argument("TrainConfig: train/val counts must be >= 1");
    if (height < 16 || width < 16) throw std::invalid_argument("TrainConfig: scenes must be at least 16x16");
    if (!(convergence_tol >= 0.0) || !std::isfinite(convergence_tol)) {
      throw std::invalid_argument("TrainConfig: convergence_tol must be >= 0");
    }
    if (convergence_window < 1) throw std::invalid_argument("TrainConfig: convergence_window must be >= 1");
    eie.validate();
  }
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t epoch)
      : std::runtime_error("training diverged: non-finite loss or parameters at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double total = 0.0;  // training loss at the start of the epoch
  double ce = 0.0;
  double eie = 0.0;
  IouReport val;       // validation after the epoch's update
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  PixelClassifier model{kSceneClasses, kFeatureCount};
  FeatureScaling scaling;
  bool converged = false;
  double wall_clock_seconds = 0.0;  // not part of the CSV
};

struct PreparedScene {
  std::vector<Field2D> feats;
  LabelStack labels;
};

// Train scenes use seeds forked from stream 100 of the config seed, validation
// scenes stream 200.
inline std::vector<PreparedScene> prepare_scenes(const TrainConfig& cfg, bool validation) {
  const SplitMix64 root(cfg.seed);
  const SplitMix64 stream = root.fork(validation ? 200 : 100);
  const std::size_t n = validation ? cfg.val_count : cfg.train_count;
  std::vector<PreparedScene> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 s = stream.fork(i);
    SyntheticScene scene = generate_scene(cfg.scene_kind, cfg.height, cfg.width, s.next());
    out.push_back({features(scene.image), std::move(scene.labels)});
  }
  return out;
}

inline IouReport evaluate(const PixelClassifier& model, const std::vector<PreparedScene>& scenes) {
  ConfusionCounts counts(model.classes());
  for (const PreparedScene& s : scenes) counts.add(argmax(model.forward(s.feats)), s.labels);
  return iou_from_counts(counts);
}

// Mean of the per-image combined loss over the training set, with gradient.
struct BatchLoss {
  double total = 0.0, ce = 0.0, eie = 0.0;
  ClassifierGrad grad;
};

inline BatchLoss batch_loss(const PixelClassifier& model, const std::vector<PreparedScene>& scenes,
                            const EieConfig& eie) {
  BatchLoss out{0.0, 0.0, 0.0,
                ClassifierGrad{std::vector<double>(model.weights().size(), 0.0), std::vector<double>(model.classes(), 0.0)}};
  const double inv = 1.0 / static_cast<double>(scenes.size());
  for (const PreparedScene& s : scenes) {
    const LossWithGradient lg = combined_loss_with_gradient(model.forward(s.feats), s.labels, eie);
    out.total += inv * lg.loss.total;
    out.ce += inv * lg.loss.ce;
    out.eie += inv * lg.loss.eie_total;
    const ClassifierGrad g = model.backward(s.feats, lg.grad);
    for (std::size_t i = 0; i < g.weights.size(); ++i) out.grad.weights[i] += inv * g.weights[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) out.grad.bias[i] += inv * g.bias[i];
  }
  return out;
}

// Full-batch gradient descent from a zero-initialized model.
inline TrainReport train(const TrainConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<PreparedScene> train_set = prepare_scenes(cfg, false);
  std::vector<PreparedScene> val_set = prepare_scenes(cfg, true);

  TrainReport report;
  if (cfg.standardize) {
    std::vector<std::vector<Field2D>> planes;
    for (const PreparedScene& s : train_set) planes.push_back(s.feats);
    report.scaling = FeatureScaling::fit(planes);
    for (PreparedScene& s : train_set) report.scaling.apply(s.feats);
    for (PreparedScene& s : val_set) report.scaling.apply(s.feats);
  }
  PixelClassifier& model = report.model;
  report.epochs.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const BatchLoss bl = batch_loss(model, train_set, cfg.eie);
    if (!std::isfinite(bl.total)) throw TrainingDiverged(epoch);
    for (std::size_t i = 0; i < bl.grad.weights.size(); ++i) model.weights()[i] -= cfg.learning_rate * bl.grad.weights[i];
    for (std::size_t i = 0; i < bl.grad.bias.size(); ++i) model.bias()[i] -= cfg.learning_rate * bl.grad.bias[i];
    if (!std::all_of(model.weights().begin(), model.weights().end(), [](double v) { return std::isfinite(v); }) ||
        !std::all_of(model.bias().begin(), model.bias().end(), [](double v) { return std::isfinite(v); })) {
      throw TrainingDiverged(epoch);
    }
    report.epochs.push_back({epoch, bl.total, bl.ce, bl.eie, evaluate(model, val_set)});
    if (cfg.convergence_tol > 0.0 && epoch > cfg.convergence_window) {
      const double past = report.epochs[epoch - 1 - cfg.convergence_window].total;
      if (std::abs(bl.total - past) <= cfg.convergence_tol * std::abs(bl.total)) {
        report.converged = true;
        break;
      }
    }
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct CompareReport {
  TrainReport ce_only;
  TrainReport with_eie;
};

// Same scenes and initialization; the baseline arm sets lambda1 = 0.
inline CompareReport train_compare(const TrainConfig& cfg) {
  TrainConfig base = cfg;
  base.eie.lambda1 = 0.0;
  return {train(base), train(cfg)};
}

inline std::string report_csv(const TrainReport& report, std::size_t classes = kSceneClasses) {
  std::ostringstream out;
  out << "epoch,total,ce,eie,val_miou";
  for (std::size_t c = 0; c < classes; ++c) out << ",val_iou_class" << c;
  out << '\n';
  for (const EpochRecord& r : report.epochs) {
    out << r.epoch << ',' << format_double(r.total) << ',' << format_double(r.ce) << ','
        << format_double(r.eie) << ',' << format_double(r.val.miou);
    for (std::size_t c = 0; c < classes; ++c) out << ',' << format_double(r.val.per_class[c]);
    out << '\n';
  }
  return out.str();
}

}  // namespace eieseg
