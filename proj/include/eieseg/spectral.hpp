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

// Two-dimensional DFT and the frequency-radius kernel.
//
// Normalization: the forward transform carries 1/(h*w), the inverse carries
// nothing, so
//   d[m][n]    = 1/(hw) sum_{y,x} f[y][x] exp(-2 pi i (m y / h + n x / w))
//   f[y][x]    =        sum_{m,n} d[m][n] exp(+2 pi i (m y / h + n x / w))
// Frequencies are integer cycles per image. Boundaries are periodic.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "eieseg/field.hpp"

namespace eieseg {

using Complex = std::complex<double>;

namespace fft {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 transform for power-of-two lengths.
class Radix2 {
 public:
  explicit Radix2(std::size_t n) : n_(n), twiddles_(n / 2), reversed_(n) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  // Unnormalized; inverse=true uses exp(+i...).
  void transform(std::span<Complex> data, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reversed_[i]) std::swap(data[i], data[reversed_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          Complex t = twiddles_[k * stride];
          if (inverse) t = std::conj(t);
          const Complex u = data[start + k];
          const Complex v = data[start + k + half] * t;
          data[start + k] = u + v;
          data[start + k + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> reversed_;
};

// Exact DFT of any length: radix-2 directly, otherwise Bluestein's chirp-z
// reduction to a power-of-two circular convolution.
class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n) {
    if (is_power_of_two(n)) {
      radix2_ = std::make_unique<Radix2>(n);
      return;
    }
    const std::size_t m = next_power_of_two(2 * n - 1);
    radix2_ = std::make_unique<Radix2>(m);
    chirp_.resize(n);
    // k^2 mod 2n keeps the chirp angle small and exact for large k.
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t k2 = (k * k) % (2 * n);
      const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    kernel_.assign(m, Complex(0.0, 0.0));
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel_[k] = std::conj(chirp_[k]);
      kernel_[m - k] = std::conj(chirp_[k]);
    }
    radix2_->transform(kernel_, false);
  }

  std::size_t size() const { return n_; }

  void transform(std::span<Complex> data, bool inverse) const {
    if (chirp_.empty()) {
      radix2_->transform(data, inverse);
      return;
    }
    // The inverse DFT is conj(DFT(conj(x))).
    const std::size_t m = radix2_->size();
    std::vector<Complex> a(m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex x = inverse ? std::conj(data[k]) : data[k];
      a[k] = x * chirp_[k];
    }
    radix2_->transform(a, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= kernel_[k];
    radix2_->transform(a, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex y = a[k] * scale * chirp_[k];
      data[k] = inverse ? std::conj(y) : y;
    }
  }

 private:
  std::size_t n_;
  std::unique_ptr<Radix2> radix2_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_;
};

// Plans are built once per length and shared; lookups are mutex-guarded and
// the returned plan is immutable.
inline const Plan& plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const Plan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<const Plan>(n);
  return *slot;
}

// In-place unnormalized 2D transform of an h x w row-major grid.
inline void transform_2d(std::vector<Complex>& grid, std::size_t h, std::size_t w, bool inverse) {
  const Plan& row_plan = plan_for(w);
  for (std::size_t y = 0; y < h; ++y) {
    row_plan.transform(std::span<Complex>(grid.data() + y * w, w), inverse);
  }
  const Plan& col_plan = plan_for(h);
  std::vector<Complex> column(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) column[y] = grid[y * w + x];
    col_plan.transform(column, inverse);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = column[y];
  }
}

}  // namespace fft

// Complex DFT coefficients d[m][n], row-major over (m, n).
struct SpectralField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Complex> coefficients;

  Complex operator()(std::size_t m, std::size_t n) const { return coefficients[m * width + n]; }
  Complex& operator()(std::size_t m, std::size_t n) { return coefficients[m * width + n]; }
};

inline SpectralField dft_forward(const Field2D& field) {
  const std::size_t h = field.height();
  const std::size_t w = field.width();
  SpectralField out{h, w, std::vector<Complex>(h * w)};
  for (std::size_t i = 0; i < h * w; ++i) out.coefficients[i] = Complex(field[i], 0.0);
  fft::transform_2d(out.coefficients, h, w, false);
  const double scale = 1.0 / static_cast<double>(h * w);
  for (Complex& c : out.coefficients) c *= scale;
  return out;
}

// Full complex inverse; the imaginary part is the residue that dft_inverse drops.
inline std::vector<Complex> dft_inverse_complex(const SpectralField& spectrum) {
  std::vector<Complex> grid = spectrum.coefficients;
  fft::transform_2d(grid, spectrum.height, spectrum.width, true);
  return grid;
}

inline Field2D dft_inverse(const SpectralField& spectrum) {
  const std::vector<Complex> grid = dft_inverse_complex(spectrum);
  Field2D out(spectrum.height, spectrum.width);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = grid[i].real();
  return out;
}

// Signed integer frequency of bin index k on an axis of length n.
inline long signed_frequency(std::size_t k, std::size_t n) {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

struct RadiusWeights {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> weights;

  double operator()(std::size_t m, std::size_t n) const { return weights[m * width + n]; }
};

// weights[m][n] = sqrt(k_m^2 + k_n^2) with signed integer frequencies.
inline RadiusWeights radius_weights(std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw DimensionError("radius_weights: dims must be >= 1");
  RadiusWeights out{h, w, std::vector<double>(h * w)};
  for (std::size_t m = 0; m < h; ++m) {
    const auto km = static_cast<double>(signed_frequency(m, h));
    for (std::size_t n = 0; n < w; ++n) {
      const auto kn = static_cast<double>(signed_frequency(n, w));
      out.weights[m * w + n] = std::sqrt(km * km + kn * kn);
    }
  }
  return out;
}

inline std::shared_ptr<const RadiusWeights> cached_radius_weights(std::size_t h, std::size_t w) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const RadiusWeights>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{h, w}];
  if (!slot) slot = std::make_shared<const RadiusWeights>(radius_weights(h, w));
  return slot;
}

}  // namespace eieseg
