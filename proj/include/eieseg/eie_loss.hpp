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

// Elastic interaction energy loss.
//
// For one class the prediction and ground truth boundaries are encoded in the
// combined field D = alpha * sigma(P)_i - G_i. Its energy is the spectral
// quadratic form
//
//   E(D) = sum_{m,n} sqrt(k_m^2 + k_n^2) |d_mn|^2,   d = dft_forward(D)
//
// which is nonnegative, blind to constant offsets (zero DC weight) and
// attractive between oppositely oriented boundaries. The gradient returned
// here is the exact derivative of E with respect to each pixel of D:
//
//   dE/dD = 2/(hw) * dft_inverse(w .* d)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eieseg/field.hpp"
#include "eieseg/spectral.hpp"

namespace eieseg {

struct EieConfig {
  double alpha = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  // Only "integer-cycles" (unnormalized cycles per image) is implemented.
  std::string frequency_convention = "integer-cycles";

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("EieConfig: alpha must be > 0");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
      throw std::invalid_argument("EieConfig: lambda1 and lambda2 must be >= 0");
    }
    if (!(lambda1 + lambda2 > 0.0)) throw std::invalid_argument("EieConfig: lambda1 + lambda2 must be > 0");
    if (frequency_convention != "integer-cycles") {
      throw std::invalid_argument("EieConfig: unsupported frequency convention '" + frequency_convention + "'");
    }
  }
};

// alpha * sigma_i - G_i for one class.
inline Field2D combined_field(const Field2D& prob, const Field2D& gt, double alpha) {
  return axpby(alpha, prob, -1.0, gt);
}

inline double spectral_energy(const SpectralField& d) {
  const auto weights = cached_radius_weights(d.height, d.width);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.coefficients.size(); ++i) {
    sum += weights->weights[i] * std::norm(d.coefficients[i]);
  }
  return sum;
}

inline double eie_energy(const Field2D& combined) { return spectral_energy(dft_forward(combined)); }

struct EnergyAndGradient {
  double energy = 0.0;
  Field2D gradient;
};

inline EnergyAndGradient eie_energy_and_gradient(const Field2D& combined) {
  SpectralField d = dft_forward(combined);
  const double energy = spectral_energy(d);
  const auto weights = cached_radius_weights(d.height, d.width);
  for (std::size_t i = 0; i < d.coefficients.size(); ++i) d.coefficients[i] *= weights->weights[i];
  Field2D grad = dft_inverse(d);
  const double scale = 2.0 / static_cast<double>(combined.size());
  for (double& g : grad.values()) g *= scale;
  return {energy, std::move(grad)};
}

inline Field2D eie_gradient(const Field2D& combined) {
  return eie_energy_and_gradient(combined).gradient;
}

struct EnergyParts {
  double self_pred = 0.0;
  double self_gt = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

// Splits E(pred - gt) into the two self energies and the cross term.
// `pred` is the already scaled prediction alpha * sigma_i.
inline EnergyParts energy_decompose(const Field2D& pred, const Field2D& gt) {
  require_same_shape(pred, gt, "energy_decompose");
  const SpectralField dp = dft_forward(pred);
  const SpectralField dg = dft_forward(gt);
  const auto weights = cached_radius_weights(pred.height(), pred.width());
  EnergyParts parts;
  double cross = 0.0;
  for (std::size_t i = 0; i < dp.coefficients.size(); ++i) {
    const double wi = weights->weights[i];
    parts.self_pred += wi * std::norm(dp.coefficients[i]);
    parts.self_gt += wi * std::norm(dg.coefficients[i]);
    cross += wi * (std::conj(dp.coefficients[i]) * dg.coefficients[i]).real();
  }
  parts.interaction = -2.0 * cross;
  parts.total = parts.self_pred + parts.self_gt + parts.interaction;
  return parts;
}

// Per-pixel softmax over classes with max subtraction.
inline ProbStack softmax(const LogitStack& logits) {
  const std::size_t n = logits.classes();
  ProbStack out(n, logits.height(), logits.width());
  std::vector<double> e(n);
  for (std::size_t p = 0; p < logits.pixels(); ++p) {
    double mx = logits[0][p];
    for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, logits[c][p]);
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      e[c] = std::exp(logits[c][p] - mx);
      sum += e[c];
    }
    for (std::size_t c = 0; c < n; ++c) out[c][p] = e[c] / sum;
  }
  return out;
}

namespace detail {

inline void require_matching(const LogitStack& logits, const LabelStack& labels, const char* where) {
  if (logits.classes() != labels.classes() || logits.height() != labels.height() ||
      logits.width() != labels.width()) {
    throw DimensionError(std::string(where) + ": logits " + std::to_string(logits.classes()) + "x" +
                         std::to_string(logits.height()) + "x" + std::to_string(logits.width()) +
                         " vs labels " + std::to_string(labels.classes()) + "x" +
                         std::to_string(labels.height()) + "x" + std::to_string(labels.width()));
  }
}

}  // namespace detail

// Mean of -log softmax(P)_true over non-ignored pixels; 0 when all are ignored.
inline double cross_entropy(const LogitStack& logits, const LabelStack& labels) {
  detail::require_matching(logits, labels, "cross_entropy");
  const std::size_t n = logits.classes();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < logits.pixels(); ++p) {
    const int t = labels.label_at(p);
    if (t == kIgnoreLabel) continue;
    double mx = logits[0][p];
    for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, logits[c][p]);
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += std::exp(logits[c][p] - mx);
    sum += mx + std::log(s) - logits[static_cast<std::size_t>(t)][p];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

struct LossBreakdown {
  std::vector<double> eie_per_class;
  double eie_total = 0.0;
  double ce = 0.0;
  double total = 0.0;
};

struct LossWithGradient {
  LossBreakdown loss;
  LogitStack grad;  // d total / d logits
};

// Loss and its gradient in one pass. Classes are accumulated in index order.
inline LossWithGradient combined_loss_with_gradient(const LogitStack& logits, const LabelStack& labels,
                                                    const EieConfig& cfg, bool want_gradient = true) {
  cfg.validate();
  detail::require_matching(logits, labels, "combined_loss");
  if (logits.classes() < 2) throw DimensionError("combined_loss: at least 2 classes required");

  const std::size_t n = logits.classes();
  const std::size_t pixels = logits.pixels();
  const ProbStack prob = softmax(logits);

  LossWithGradient out;
  out.loss.eie_per_class.resize(n, 0.0);
  out.loss.ce = cross_entropy(logits, labels);

  // d total / d sigma_i from the energy term.
  std::vector<Field2D> dsigma;
  if (cfg.lambda1 > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const Field2D d = combined_field(prob[i], labels[i], cfg.alpha);
      if (want_gradient) {
        EnergyAndGradient eg = eie_energy_and_gradient(d);
        out.loss.eie_per_class[i] = eg.energy;
        dsigma.push_back(scaled(eg.gradient, cfg.lambda1 * cfg.alpha));
      } else {
        out.loss.eie_per_class[i] = eie_energy(d);
      }
    }
  }
  for (double e : out.loss.eie_per_class) out.loss.eie_total += e;
  out.loss.total = cfg.lambda1 * out.loss.eie_total + cfg.lambda2 * out.loss.ce;
  if (!want_gradient) return out;

  out.grad = LogitStack(n, logits.height(), logits.width());
  const std::size_t valid = labels.valid_pixels();
  const double ce_scale = valid == 0 ? 0.0 : cfg.lambda2 / static_cast<double>(valid);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (labels.is_ignored(p)) continue;
    double weighted = 0.0;  // sum_i g_i sigma_i
    if (!dsigma.empty()) {
      for (std::size_t i = 0; i < n; ++i) weighted += dsigma[i][p] * prob[i][p];
    }
    for (std::size_t c = 0; c < n; ++c) {
      double g = ce_scale * (prob[c][p] - labels[c][p]);
      if (!dsigma.empty()) g += prob[c][p] * (dsigma[c][p] - weighted);
      out.grad[c][p] = g;
    }
  }
  return out;
}

inline LossBreakdown combined_loss(const LogitStack& logits, const LabelStack& labels, const EieConfig& cfg) {
  return combined_loss_with_gradient(logits, labels, cfg, false).loss;
}

inline LogitStack combined_loss_backward(const LogitStack& logits, const LabelStack& labels,
                                         const EieConfig& cfg) {
  return combined_loss_with_gradient(logits, labels, cfg, true).grad;
}

}  // namespace eieseg
