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

// Lane point files: CSV with header "lane_id,row,col", one point per line,
// col = -1 for a row where the lane is absent. Lanes are ordered by id and
// points by row.

#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eieseg/field.hpp"
#include "eieseg/metrics.hpp"

namespace eieseg {

inline constexpr std::string_view kLaneCsvHeader = "lane_id,row,col";

inline LanePoints parse_lane_csv(std::string_view text) {
  std::map<long, Lane> lanes;
  std::size_t offset = 0;
  bool header = true;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != kLaneCsvHeader) throw FormatError("lane csv: expected header lane_id,row,col", offset);
      header = false;
    } else if (!line.empty()) {
      long v[3];
      std::size_t pos = 0;
      for (int k = 0; k < 3; ++k) {
        const std::size_t comma = k < 2 ? line.find(',', pos) : line.size();
        if (comma == std::string_view::npos) throw FormatError("lane csv: expected 3 fields", offset);
        const char* first = line.data() + pos;
        const char* last = line.data() + comma;
        const auto [ptr, ec] = std::from_chars(first, last, v[k]);
        if (ec != std::errc{} || ptr != last) throw FormatError("lane csv: bad integer", offset + pos);
        pos = comma + 1;
      }
      if (v[0] < 0 || v[1] < 0 || v[2] < -1) throw FormatError("lane csv: negative id/row or col < -1", offset);
      Lane& lane = lanes[v[0]];
      const int row = static_cast<int>(v[1]);
      if (std::any_of(lane.begin(), lane.end(), [row](const LanePoint& p) { return p.row == row; })) {
        throw FormatError("lane csv: duplicate row for lane " + std::to_string(v[0]), offset);
      }
      lane.push_back({row, v[2] < 0 ? std::nullopt : std::optional<int>(static_cast<int>(v[2]))});
    }
    offset = end + 1;
  }
  if (header) throw FormatError("lane csv: empty file", 0);
  LanePoints out;
  for (auto& [id, lane] : lanes) {
    std::sort(lane.begin(), lane.end(), [](const LanePoint& a, const LanePoint& b) { return a.row < b.row; });
    out.push_back(std::move(lane));
  }
  return out;
}

inline std::string serialize_lane_csv(const LanePoints& lanes) {
  std::ostringstream out;
  out << kLaneCsvHeader << '\n';
  for (std::size_t i = 0; i < lanes.size(); ++i)
    for (const LanePoint& p : lanes[i]) out << i << ',' << p.row << ',' << (p.col ? *p.col : -1) << '\n';
  return out.str();
}

}  // namespace eieseg
