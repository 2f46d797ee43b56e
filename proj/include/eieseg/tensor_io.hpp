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

// FLD tensor files and PGM masks.
//
// FLD layout: one JSON header line
//   {"dims":[C,H,W],"dtype":"f64","order":"row-major"}\n
// followed by C*H*W little-endian IEEE-754 float64 values.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eieseg/field.hpp"
#include "json.hpp"

namespace eieseg {

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'", 0);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing", 0);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for '" + path + "'", 0);
}

}  // namespace detail

inline std::string serialize_tensor(const TensorStack& stack) {
  nlohmann::json header;
  header["dims"] = {stack.classes(), stack.height(), stack.width()};
  header["dtype"] = "f64";
  header["order"] = "row-major";
  std::string out = header.dump();
  out.push_back('\n');
  const std::size_t payload_start = out.size();
  out.resize(payload_start + stack.classes() * stack.pixels() * 8);
  char* dst = out.data() + payload_start;
  for (const Field2D& ch : stack.channels()) {
    for (double v : ch.values()) {
      const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
      std::memcpy(dst, &bits, 8);
      dst += 8;
    }
  }
  return out;
}

inline TensorStack parse_tensor(std::string_view bytes) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw FormatError("FLD header not terminated by LF", bytes.size());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, eol));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("FLD header is not valid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!header.is_object() || !header.contains("dims") || !header["dims"].is_array() ||
      header["dims"].size() != 3) {
    throw FormatError("FLD header must carry dims [C,H,W]", 0);
  }
  std::size_t dims[3];
  for (int i = 0; i < 3; ++i) {
    const auto& d = header["dims"][static_cast<std::size_t>(i)];
    if (!d.is_number_unsigned() || d.get<std::uint64_t>() == 0) {
      throw FormatError("FLD dims must be positive integers", 0);
    }
    dims[i] = d.get<std::size_t>();
  }
  if (!header.contains("dtype") || header["dtype"] != "f64") {
    throw FormatError("FLD unknown dtype " + (header.contains("dtype") ? header["dtype"].dump() : "<missing>"), 0);
  }
  if (!header.contains("order") || header["order"] != "row-major") {
    throw FormatError("FLD unsupported order", 0);
  }

  const std::size_t payload = eol + 1;
  const std::size_t count = dims[0] * dims[1] * dims[2];
  const std::size_t have = bytes.size() - payload;
  if (have < count * 8) {
    throw FormatError("FLD payload truncated: expected " + std::to_string(count * 8) +
                          " bytes, found " + std::to_string(have),
                      bytes.size());
  }
  if (have > count * 8) throw FormatError("FLD trailing bytes after payload", payload + count * 8);

  std::vector<Field2D> channels;
  channels.reserve(dims[0]);
  const char* src = bytes.data() + payload;
  for (std::size_t c = 0; c < dims[0]; ++c) {
    std::vector<double> values(dims[1] * dims[2]);
    for (double& v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, src, 8);
      v = std::bit_cast<double>(detail::to_little_endian(bits));
      src += 8;
    }
    channels.emplace_back(dims[1], dims[2], std::move(values));
  }
  return TensorStack(std::move(channels));
}

inline void write_tensor(const std::string& path, const TensorStack& stack) {
  detail::write_file_bytes(path, serialize_tensor(stack));
}

inline TensorStack read_tensor(const std::string& path) {
  return parse_tensor(detail::read_file_bytes(path));
}

// PGM (P2 or P5, maxval 255) to a binary mask: value > 127 maps to 1.
inline Field2D parse_pgm_mask(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) -> std::size_t {
    skip_space();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("PGM: expected ") + what, start);
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw FormatError("PGM: magic must be P2 or P5", 0);
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const std::size_t w = read_uint("width");
  const std::size_t h = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (w == 0 || h == 0) throw FormatError("PGM: zero dimension", pos);
  if (maxval != 255) throw FormatError("PGM: maxval must be 255", pos);

  Field2D out(h, w);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + w * h) throw FormatError("PGM: payload truncated", bytes.size());
    for (std::size_t i = 0; i < w * h; ++i) {
      out[i] = static_cast<unsigned char>(bytes[pos + i]) > 127 ? 1.0 : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < w * h; ++i) {
      const std::size_t v = read_uint("pixel value");
      if (v > 255) throw FormatError("PGM: pixel value exceeds maxval", pos);
      out[i] = v > 127 ? 1.0 : 0.0;
    }
  }
  return out;
}

inline Field2D read_pgm_mask(const std::string& path) {
  return parse_pgm_mask(detail::read_file_bytes(path));
}

// Binary P5; values clamped to [0,1] and scaled to 0..255.
inline std::string serialize_pgm(const Field2D& field) {
  std::string out = "P5\n" + std::to_string(field.width()) + " " +
                    std::to_string(field.height()) + "\n255\n";
  out.reserve(out.size() + field.size());
  for (double v : field.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

inline void write_pgm(const std::string& path, const Field2D& field) {
  detail::write_file_bytes(path, serialize_pgm(field));
}

}  // namespace eieseg
