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

// Projected gradient flow of a probability field under the EIE energy.
//
// The step is taken in pixel units: the per-pixel gradient is multiplied by
// sqrt(h*w), which turns the integer-cycles energy into its cycles-per-pixel
// counterpart. With this scaling the largest Hessian eigenvalue is
// 2 * alpha^2 * max|k| / sqrt(hw), about 1.41 * alpha^2 on any square grid, so
// a step size that is stable at one resolution is stable at all of them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eieseg/eie_loss.hpp"
#include "eieseg/field.hpp"

namespace eieseg {

inline constexpr double kBoundaryLevel = 0.5;

struct EvolveParams {
  double eta = 0.1;
  std::size_t steps = 500;
  double alpha = 1.0;
  std::size_t snapshot_every = 50;

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("EvolveParams: eta must be > 0");
    if (steps == 0) throw std::invalid_argument("EvolveParams: steps must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("EvolveParams: alpha must be > 0");
    if (snapshot_every == 0) throw std::invalid_argument("EvolveParams: snapshot_every must be >= 1");
  }
};

struct EvolveState {
  std::size_t step = 0;
  Field2D sigma;
  double energy = 0.0;
};

inline EvolveState make_evolve_state(Field2D init, const Field2D& gt, double alpha) {
  require_same_shape(init, gt, "make_evolve_state");
  for (double& v : init.values()) v = std::clamp(v, 0.0, 1.0);
  const double energy = eie_energy(combined_field(init, gt, alpha));
  return {0, std::move(init), energy};
}

inline double pixel_unit_scale(const Field2D& f) {
  return std::sqrt(static_cast<double>(f.height() * f.width()));
}

inline EvolveState evolve_step(const EvolveState& state, const Field2D& gt, const EvolveParams& params) {
  require_same_shape(state.sigma, gt, "evolve_step");
  const Field2D grad = eie_gradient(combined_field(state.sigma, gt, params.alpha));
  const double step = params.eta * params.alpha * pixel_unit_scale(gt);
  EvolveState next{state.step + 1, Field2D(gt.height(), gt.width()), 0.0};
  for (std::size_t i = 0; i < gt.size(); ++i) {
    next.sigma[i] = std::clamp(state.sigma[i] - step * grad[i], 0.0, 1.0);
  }
  next.energy = eie_energy(combined_field(next.sigma, gt, params.alpha));
  return next;
}

inline std::size_t foreground_components(const Field2D& sigma) {
  return connected_components(sigma, kBoundaryLevel).count;
}

struct Snapshot {
  std::size_t step = 0;
  Field2D sigma;
};

struct Trajectory {
  std::vector<double> energy;             // index = step, 0..steps
  std::vector<std::size_t> components;    // thresholded foreground count per step
  std::vector<Snapshot> snapshots;        // step 0, every snapshot_every, and the last step
  Field2D final_sigma;
  std::size_t final_components = 0;
  // Longest run of consecutive energy increases.
  std::size_t max_increase_run = 0;
  bool finite = true;
};

inline Trajectory run_evolution(const Field2D& gt, const Field2D& init, const EvolveParams& params) {
  params.validate();
  require_same_shape(gt, init, "run_evolution");
  for (double v : init.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("run_evolution: init must lie in [0,1]");
  }

  Trajectory traj;
  EvolveState state = make_evolve_state(init, gt, params.alpha);
  traj.energy.push_back(state.energy);
  traj.components.push_back(foreground_components(state.sigma));
  traj.snapshots.push_back({0, state.sigma});

  std::size_t run = 0;
  for (std::size_t s = 1; s <= params.steps; ++s) {
    const double previous = state.energy;
    state = evolve_step(state, gt, params);
    if (!std::isfinite(state.energy) || !state.sigma.all_finite()) {
      traj.finite = false;
      break;
    }
    run = state.energy > previous ? run + 1 : 0;
    traj.max_increase_run = std::max(traj.max_increase_run, run);
    traj.energy.push_back(state.energy);
    traj.components.push_back(foreground_components(state.sigma));
    if (s % params.snapshot_every == 0 || s == params.steps) traj.snapshots.push_back({s, state.sigma});
  }
  traj.final_components = foreground_components(state.sigma);
  traj.final_sigma = std::move(state.sigma);
  return traj;
}

}  // namespace eieseg
