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

// Bundled evolution scenarios and their manifest of pinned parameters.
// These are constructed analogues of boundary attraction, gap healing and
// curve smoothing; none of them is a recorded experiment.

#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "eieseg/evolve.hpp"
#include "eieseg/field.hpp"
#include "eieseg/format.hpp"
#include "eieseg/toytrain.hpp"

namespace eieseg {

struct EvolveScenario {
  std::string name;
  Field2D gt;
  Field2D init;
  EvolveParams params;
};

inline void fill_rect(Field2D& f, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1, double v) {
  for (std::size_t y = y0; y < y1; ++y)
    for (std::size_t x = x0; x < x1; ++x) f(y, x) = v;
}

inline Field2D disk(std::size_t h, std::size_t w, double cy, double cx, double r) {
  Field2D f(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      f(y, x) = dy * dy + dx * dx <= r * r ? 1.0 : 0.0;
    }
  return f;
}

// 48x48: a 2-px vertical bar (rows 6..41) and the same bar with a 6-row gap.
inline EvolveScenario occluded_lane_scenario() {
  Field2D gt(48, 48);
  fill_rect(gt, 6, 42, 23, 25, 1.0);
  Field2D init = gt;
  fill_rect(init, 21, 27, 23, 25, 0.0);
  return {"occluded-lane", std::move(gt), std::move(init), EvolveParams{0.1, 500, 1.0, 50}};
}

// 32x32: disk of radius 6 at the center, prediction shifted 4 px right.
inline EvolveScenario disk_attraction_scenario() {
  return {"disk-attraction", disk(32, 32, 16, 16, 6), disk(32, 32, 16, 20, 6), EvolveParams{0.2, 50, 1.0, 10}};
}

// 32x32: a 2-px wiggly curve against a straight 2-px bar.
inline EvolveScenario wiggly_curve_scenario() {
  Field2D gt(32, 32);
  fill_rect(gt, 4, 28, 15, 17, 1.0);
  Field2D init(32, 32);
  long prev = -1;
  for (std::size_t y = 4; y < 28; ++y) {
    const long c = 15 + std::lround(4.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(y) / 8.0));
    const long lo = prev < 0 ? c : std::min(prev, c);
    const long hi = prev < 0 ? c : std::max(prev, c);
    for (long x = lo; x <= hi + 1; ++x) init(y, static_cast<std::size_t>(x)) = 1.0;
    prev = c;
  }
  return {"wiggly-curve", std::move(gt), std::move(init), EvolveParams{0.2, 200, 1.0, 50}};
}

inline std::vector<EvolveScenario> evolve_scenarios() {
  return {occluded_lane_scenario(), disk_attraction_scenario(), wiggly_curve_scenario()};
}

struct TranslatePair {
  std::string name;
  Field2D gt;
  Field2D pred;
};

// Overlapping translates of bars and blocks on a 32x32 grid.
inline std::vector<TranslatePair> interaction_family() {
  constexpr std::size_t kSize = 32;
  std::vector<TranslatePair> out;
  const std::pair<std::size_t, long> bars[] = {{2, 1}, {3, 1}, {3, 2}, {4, 1}, {4, 2}, {5, 2}};
  for (auto [width, shift] : bars) {
    Field2D gt(kSize, kSize);
    fill_rect(gt, 4, 28, 12, 12 + width, 1.0);
    out.push_back({"bar" + std::to_string(width) + "_dx" + std::to_string(shift), gt, cyclic_shift(gt, 0, shift)});
  }
  const std::tuple<std::size_t, long, long> blocks[] = {{4, 0, 1}, {4, 1, 1}, {6, 0, 2}, {6, 2, 2}, {6, 0, 4}, {8, 2, 4}};
  for (auto [side, dy, dx] : blocks) {
    Field2D gt(kSize, kSize);
    fill_rect(gt, 12, 12 + side, 12, 12 + side, 1.0);
    out.push_back({"block" + std::to_string(side) + "_dy" + std::to_string(dy) + "_dx" + std::to_string(dx), gt,
                   cyclic_shift(gt, dy, dx)});
  }
  return out;
}

// Pinned train-toy comparison: mixed scenes, seeds 1..3.
inline TrainConfig train_compare_demo_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.scene_kind = SceneKind::kMixed;
  cfg.epochs = 40000;
  cfg.learning_rate = 0.5;
  cfg.convergence_tol = 1e-5;
  cfg.convergence_window = 100;
  cfg.eie = EieConfig{1.0, 1.0, 1.0, "integer-cycles"};
  cfg.train_count = 4;
  cfg.val_count = 4;
  cfg.height = 64;
  cfg.width = 64;
  return cfg;
}

inline constexpr std::uint64_t kTrainCompareSeeds[] = {1, 2, 3};

inline std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream out;
  out << "step,energy,components\n";
  for (std::size_t s = 0; s < t.energy.size(); ++s) {
    out << s << ',' << format_double(t.energy[s]) << ',' << t.components[s] << '\n';
  }
  return out.str();
}

inline std::size_t foreground_pixels(const Field2D& sigma) {
  std::size_t n = 0;
  for (double v : sigma.values()) n += v > kBoundaryLevel;
  return n;
}

}  // namespace eieseg
