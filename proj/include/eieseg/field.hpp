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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eieseg {

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Real-valued h x w scalar field, row-major.
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), values_(height * width, fill) {
    if (height == 0 || width == 0) {
      throw DimensionError("Field2D: height and width must be >= 1");
    }
  }
  Field2D(std::size_t height, std::size_t width, std::vector<double> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height == 0 || width == 0) {
      throw DimensionError("Field2D: height and width must be >= 1");
    }
    if (values_.size() != height * width) {
      throw DimensionError("Field2D: value count " +
                           std::to_string(values_.size()) + " != " +
                           std::to_string(height) + "x" + std::to_string(width));
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
  double operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const Field2D& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Field2D&, const Field2D&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

inline void require_same_shape(const Field2D& a, const Field2D& b, const char* where) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(where) + ": shape mismatch " +
                         std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                         " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
  }
}

// Elementwise a*x + b*y.
inline Field2D axpby(double a, const Field2D& x, double b, const Field2D& y) {
  require_same_shape(x, y, "axpby");
  Field2D out(x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

inline Field2D scaled(const Field2D& x, double a) {
  Field2D out = x;
  for (double& v : out.values()) v *= a;
  return out;
}

// Cyclic shift: out(y, x) = in(y - dy, x - dx) modulo the grid.
inline Field2D cyclic_shift(const Field2D& in, long dy, long dx) {
  const long h = static_cast<long>(in.height());
  const long w = static_cast<long>(in.width());
  Field2D out(in.height(), in.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const long ty = ((y + dy) % h + h) % h;
      const long tx = ((x + dx) % w + w) % w;
      out(static_cast<std::size_t>(ty), static_cast<std::size_t>(tx)) =
          in(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
    }
  }
  return out;
}

inline Field2D transposed(const Field2D& in) {
  Field2D out(in.width(), in.height());
  for (std::size_t y = 0; y < in.height(); ++y)
    for (std::size_t x = 0; x < in.width(); ++x) out(x, y) = in(y, x);
  return out;
}

// Ordered channels sharing one grid. Tag distinguishes logits from
// probabilities at the type level.
template <class Tag>
class ChannelStack {
 public:
  ChannelStack() = default;
  explicit ChannelStack(std::vector<Field2D> channels) : channels_(std::move(channels)) {
    if (channels_.empty()) throw DimensionError("stack: at least one channel required");
    for (const auto& c : channels_) require_same_shape(channels_.front(), c, "stack");
  }
  ChannelStack(std::size_t classes, std::size_t height, std::size_t width, double fill = 0.0)
      : channels_(classes, Field2D(height, width, fill)) {
    if (classes == 0) throw DimensionError("stack: at least one channel required");
  }

  std::size_t classes() const { return channels_.size(); }
  std::size_t height() const { return channels_.front().height(); }
  std::size_t width() const { return channels_.front().width(); }
  std::size_t pixels() const { return height() * width(); }

  Field2D& operator[](std::size_t c) { return channels_[c]; }
  const Field2D& operator[](std::size_t c) const { return channels_[c]; }
  const std::vector<Field2D>& channels() const { return channels_; }
  std::vector<Field2D>& channels() { return channels_; }

  friend bool operator==(const ChannelStack&, const ChannelStack&) = default;

 private:
  std::vector<Field2D> channels_;
};

struct LogitTag {};
struct ProbTag {};
struct RawTag {};

using LogitStack = ChannelStack<LogitTag>;
using ProbStack = ChannelStack<ProbTag>;
// Untyped channel stack; what the tensor file format reads and writes.
using TensorStack = ChannelStack<RawTag>;

// Per-pixel class index map (argmax output or integer ground truth).
struct ClassMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;

  int operator()(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
  int& operator()(std::size_t y, std::size_t x) { return labels[y * width + x]; }
};

inline constexpr int kIgnoreLabel = 255;

// One-hot ground truth. Ignored pixels carry all-zero class rows.
class LabelStack {
 public:
  LabelStack() = default;

  LabelStack(std::vector<Field2D> one_hot, std::optional<std::vector<bool>> ignore = std::nullopt)
      : stack_(std::move(one_hot)), ignore_(std::move(ignore)) {
    const std::size_t n = stack_.pixels();
    if (ignore_ && ignore_->size() != n) throw DimensionError("LabelStack: ignore mask size mismatch");
    for (std::size_t p = 0; p < n; ++p) {
      double sum = 0.0;
      for (std::size_t c = 0; c < stack_.classes(); ++c) {
        const double v = stack_[c][p];
        if (v != 0.0 && v != 1.0) throw DimensionError("LabelStack: values must be 0 or 1");
        sum += v;
      }
      const bool ignored = is_ignored(p);
      if (ignored ? sum != 0.0 : sum != 1.0) {
        throw DimensionError("LabelStack: pixel " + std::to_string(p) + " is not one-hot");
      }
    }
  }

  // Labels outside [0, classes) other than kIgnoreLabel are rejected.
  static LabelStack from_class_map(const ClassMap& map, std::size_t classes) {
    std::vector<Field2D> layers(classes, Field2D(map.height, map.width));
    std::vector<bool> ignore(map.labels.size(), false);
    bool any_ignored = false;
    for (std::size_t p = 0; p < map.labels.size(); ++p) {
      const int l = map.labels[p];
      if (l == kIgnoreLabel) {
        ignore[p] = true;
        any_ignored = true;
      } else if (l < 0 || static_cast<std::size_t>(l) >= classes) {
        throw DimensionError("LabelStack: label " + std::to_string(l) + " out of range");
      } else {
        layers[static_cast<std::size_t>(l)][p] = 1.0;
      }
    }
    return any_ignored ? LabelStack(std::move(layers), std::move(ignore))
                       : LabelStack(std::move(layers));
  }

  std::size_t classes() const { return stack_.classes(); }
  std::size_t height() const { return stack_.height(); }
  std::size_t width() const { return stack_.width(); }
  std::size_t pixels() const { return stack_.pixels(); }
  const Field2D& operator[](std::size_t c) const { return stack_[c]; }
  const TensorStack& layers() const { return stack_; }

  bool is_ignored(std::size_t p) const { return ignore_ && (*ignore_)[p]; }
  bool has_ignore() const { return ignore_.has_value(); }

  std::size_t valid_pixels() const {
    if (!ignore_) return pixels();
    return static_cast<std::size_t>(std::count(ignore_->begin(), ignore_->end(), false));
  }

  // Class index at p, or kIgnoreLabel.
  int label_at(std::size_t p) const {
    if (is_ignored(p)) return kIgnoreLabel;
    for (std::size_t c = 0; c < classes(); ++c)
      if (stack_[c][p] == 1.0) return static_cast<int>(c);
    return kIgnoreLabel;
  }

  ClassMap to_class_map() const {
    ClassMap m{height(), width(), std::vector<int>(pixels())};
    for (std::size_t p = 0; p < pixels(); ++p) m.labels[p] = label_at(p);
    return m;
  }

 private:
  TensorStack stack_;
  std::optional<std::vector<bool>> ignore_;
};

template <class Tag>
ClassMap argmax(const ChannelStack<Tag>& stack) {
  ClassMap m{stack.height(), stack.width(), std::vector<int>(stack.pixels(), 0)};
  for (std::size_t p = 0; p < stack.pixels(); ++p) {
    double best = stack[0][p];
    for (std::size_t c = 1; c < stack.classes(); ++c) {
      if (stack[c][p] > best) {
        best = stack[c][p];
        m.labels[p] = static_cast<int>(c);
      }
    }
  }
  return m;
}

// Each output pixel is the bilinear interpolation of the source at the center
// of its s x s block (pixel centers at integer coordinates).
inline Field2D downsample_bilinear(const Field2D& field, std::size_t s) {
  if (s == 0 || field.height() % s != 0 || field.width() % s != 0) {
    throw DimensionError("downsample_bilinear: factor " + std::to_string(s) +
                         " does not divide " + std::to_string(field.height()) + "x" +
                         std::to_string(field.width()));
  }
  const std::size_t oh = field.height() / s;
  const std::size_t ow = field.width() / s;
  Field2D out(oh, ow);
  const double half = 0.5 * static_cast<double>(s - 1);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    const double cy = static_cast<double>(oy * s) + half;
    const auto y0 = static_cast<std::size_t>(std::floor(cy));
    const std::size_t y1 = std::min(y0 + 1, field.height() - 1);
    const double ty = cy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const double cx = static_cast<double>(ox * s) + half;
      const auto x0 = static_cast<std::size_t>(std::floor(cx));
      const std::size_t x1 = std::min(x0 + 1, field.width() - 1);
      const double tx = cx - static_cast<double>(x0);
      out(oy, ox) = (1 - ty) * ((1 - tx) * field(y0, x0) + tx * field(y0, x1)) +
                    ty * ((1 - tx) * field(y1, x0) + tx * field(y1, x1));
    }
  }
  return out;
}

struct Components {
  std::size_t count = 0;
  // 0 = background, 1..count in first-encounter raster order.
  std::vector<int> labels;
};

// 4-connected components of {value > threshold}. No wrap-around.
inline Components connected_components(const Field2D& mask, double threshold) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  Components out{0, std::vector<int>(h * w, 0)};
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (mask[start] <= threshold || out.labels[start] != 0) continue;
    const int id = static_cast<int>(++out.count);
    out.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / w;
      const std::size_t x = p % w;
      auto visit = [&](std::size_t q) {
        if (mask[q] > threshold && out.labels[q] == 0) {
          out.labels[q] = id;
          stack.push_back(q);
        }
      };
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
    }
  }
  return out;
}

}  // namespace eieseg
