// Copyright 2026 The swarmform Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarmform/geometry.hpp"

namespace swarmform {

/// Cell value for grid positions that are not part of the shape.
inline constexpr int kEmptyCell = -1;

class ShapeError : public std::runtime_error {
 public:
  enum class Kind { kEmpty, kBadToken, kRagged, kDuplicateLabel, kMissingLabel, kNoSeed, kDisconnected };

  ShapeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct GridCell {
  int row{0};
  int col{0};
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Integer label grid describing a formation. Labels 0..n-1 appear once each.
class ShapeMatrix {
 public:
  ShapeMatrix() = default;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  /// Number of labels, i.e. the number of bots the shape needs.
  int size() const { return static_cast<int>(cells_of_label_.size()); }
  int at(int row, int col) const { return cells_[static_cast<std::size_t>(row * cols_ + col)]; }
  GridCell cell_of(int label) const { return cells_of_label_.at(static_cast<std::size_t>(label)); }
  const std::vector<int>& cells() const { return cells_; }

  /// Builds and validates a matrix from row-major cells.
  static ShapeMatrix from_cells(int rows, int cols, std::vector<int> cells);

  friend bool operator==(const ShapeMatrix& a, const ShapeMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  int rows_{0};
  int cols_{0};
  std::vector<int> cells_;
  std::vector<GridCell> cells_of_label_;
};

inline ShapeMatrix ShapeMatrix::from_cells(int rows, int cols, std::vector<int> cells) {
  using K = ShapeError::Kind;
  if (rows <= 0 || cols <= 0 || cells.empty()) throw ShapeError(K::kEmpty, "shape matrix is empty");
  if (cells.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ShapeError(K::kRagged, "cell count does not match rows x cols");
  }
  int max_label = -1;
  for (int v : cells) {
    if (v < kEmptyCell) throw ShapeError(K::kBadToken, "label " + std::to_string(v) + " is below -1");
    max_label = std::max(max_label, v);
  }
  std::vector<int> seen(static_cast<std::size_t>(max_label + 1), 0);
  std::vector<GridCell> where(static_cast<std::size_t>(max_label + 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = cells[static_cast<std::size_t>(r * cols + c)];
      if (v == kEmptyCell) continue;
      if (seen[static_cast<std::size_t>(v)]++ > 0) {
        throw ShapeError(K::kDuplicateLabel, "duplicate label " + std::to_string(v));
      }
      where[static_cast<std::size_t>(v)] = {r, c};
    }
  }
  if (max_label < 0 || seen[0] == 0) throw ShapeError(K::kNoSeed, "shape has no label 0");
  for (int l = 1; l <= max_label; ++l) {
    if (seen[static_cast<std::size_t>(l)] == 0) {
      throw ShapeError(K::kMissingLabel, "missing label " + std::to_string(l));
    }
  }

  // 8-connectivity from the seed cell.
  std::vector<char> visited(cells.size(), 0);
  std::queue<GridCell> frontier;
  frontier.push(where[0]);
  visited[static_cast<std::size_t>(where[0].row * cols + where[0].col)] = 1;
  int reached = 0;
  while (!frontier.empty()) {
    const GridCell cur = frontier.front();
    frontier.pop();
    ++reached;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int r = cur.row + dr;
        const int c = cur.col + dc;
        if ((dr == 0 && dc == 0) || r < 0 || c < 0 || r >= rows || c >= cols) continue;
        const auto idx = static_cast<std::size_t>(r * cols + c);
        if (visited[idx] || cells[idx] == kEmptyCell) continue;
        visited[idx] = 1;
        frontier.push({r, c});
      }
    }
  }
  if (reached != max_label + 1) {
    throw ShapeError(K::kDisconnected, "shape is not 8-connected from label 0");
  }

  ShapeMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.cells_ = std::move(cells);
  m.cells_of_label_ = std::move(where);
  return m;
}

/// Parses a whitespace-separated integer grid. Rows end at a newline or a '/'.
inline ShapeMatrix parse_shape_matrix(std::string_view text) {
  using K = ShapeError::Kind;
  std::vector<std::vector<int>> rows;
  std::string line;
  auto flush = [&rows](const std::string& row_text) {
    std::istringstream in(row_text);
    std::vector<int> row;
    std::string token;
    while (in >> token) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(token, &used);
      } catch (const std::exception&) {
        throw ShapeError(K::kBadToken, "not an integer: '" + token + "'");
      }
      if (used != token.size()) throw ShapeError(K::kBadToken, "not an integer: '" + token + "'");
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  };
  for (char ch : text) {
    if (ch == '\n' || ch == '/') {
      flush(line);
      line.clear();
    } else {
      line.push_back(ch == '\r' ? ' ' : ch);
    }
  }
  flush(line);

  if (rows.empty()) throw ShapeError(K::kEmpty, "shape matrix is empty");
  const std::size_t cols = rows.front().size();
  std::vector<int> cells;
  for (const auto& row : rows) {
    if (row.size() != cols) throw ShapeError(K::kRagged, "rows have unequal column counts");
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return ShapeMatrix::from_cells(static_cast<int>(rows.size()), static_cast<int>(cols), std::move(cells));
}

/// One line per matrix row, cells separated by a single space.
inline std::string format_shape_matrix(const ShapeMatrix& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ' ';
      out += std::to_string(m.at(r, c));
    }
    out += '\n';
  }
  return out;
}

/// A labeled cell in the 3x3 neighborhood of another label.
struct NeighborRef {
  int label{0};
  double angle{0.0};     // radians, (-pi, pi]
  double distance{0.0};  // meters
};

/// Per-label neighbor geometry of a shape.
class ShapeTable {
 public:
  double spacing() const { return spacing_; }
  int size() const { return static_cast<int>(rows_.size()); }
  const std::vector<NeighborRef>& row(int label) const { return rows_.at(static_cast<std::size_t>(label)); }

  /// The entry for `neighbor` in `label`'s row, if they are grid neighbors.
  const NeighborRef* find(int label, int neighbor) const {
    for (const auto& ref : row(label)) {
      if (ref.label == neighbor) return &ref;
    }
    return nullptr;
  }

  /// Position of a label's cell relative to label 0, in meters.
  Vec2 position(int label) const { return positions_.at(static_cast<std::size_t>(label)); }

  /// Reference offset from label `from` to label `to` for any pair of labels.
  Vec2 offset(int from, int to) const { return position(to) - position(from); }

 private:
  friend ShapeTable build_shape_table(const ShapeMatrix& m, double spacing);

  double spacing_{1.0};
  std::vector<std::vector<NeighborRef>> rows_;
  std::vector<Vec2> positions_;
};

/// Grid offset in meters: +x along increasing column, +y along decreasing row.
inline Vec2 grid_offset(GridCell from, GridCell to, double spacing) {
  return {static_cast<double>(to.col - from.col) * spacing, static_cast<double>(from.row - to.row) * spacing};
}

inline ShapeTable build_shape_table(const ShapeMatrix& m, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw std::invalid_argument("spacing must be positive");
  ShapeTable t;
  t.spacing_ = spacing;
  const int n = m.size();
  t.rows_.resize(static_cast<std::size_t>(n));
  t.positions_.resize(static_cast<std::size_t>(n));
  const GridCell seed = m.cell_of(0);
  for (int label = 0; label < n; ++label) {
    const GridCell here = m.cell_of(label);
    t.positions_[static_cast<std::size_t>(label)] = grid_offset(seed, here, spacing);
    auto& row = t.rows_[static_cast<std::size_t>(label)];
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int r = here.row + dr;
        const int c = here.col + dc;
        if ((dr == 0 && dc == 0) || r < 0 || c < 0 || r >= m.rows() || c >= m.cols()) continue;
        const int other = m.at(r, c);
        if (other == kEmptyCell) continue;
        const double dx = static_cast<double>(dc);
        const double dy = static_cast<double>(-dr);
        const double dist = (dr != 0 && dc != 0) ? spacing * std::numbers::sqrt2 : spacing;
        row.push_back({other, normalize_angle(std::atan2(dy, dx)), dist});
      }
    }
    std::sort(row.begin(), row.end(), [](const NeighborRef& a, const NeighborRef& b) { return a.label < b.label; });
  }
  return t;
}

/// Shortest round-trippable-enough decimal with at least one fractional digit.
inline std::string format_real(double v, int significant = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, v);
  std::string s(buf);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

inline constexpr std::string_view kShapeTableHeader = "label,neighbor,angle_rad,distance_m";

/// CSV with one line per (label, neighbor) pair.
inline std::string dump_shape_table(const ShapeTable& t) {
  std::string out(kShapeTableHeader);
  out += '\n';
  for (int label = 0; label < t.size(); ++label) {
    for (const auto& ref : t.row(label)) {
      out += std::to_string(label) + ',' + std::to_string(ref.label) + ',' + format_real(ref.angle) + ',' +
             format_real(ref.distance) + '\n';
    }
  }
  return out;
}

}  // namespace swarmform
