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

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "swarmform/shape.hpp"

namespace swarmform {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr char kTriangle[] = "-1 2 -1 / -1 0 -1 / 1 -1 3";

ShapeError::Kind parse_error_kind(std::string_view text) {
  try {
    parse_shape_matrix(text);
  } catch (const ShapeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return ShapeError::Kind::kEmpty;
}

TEST(ShapeMatrix, ParsesTriangleWithSlashRows) {
  const auto m = parse_shape_matrix(kTriangle);
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(m.cols(), 3);
  EXPECT_EQ(m.size(), 4);
  EXPECT_EQ(m.at(1, 1), 0);
  EXPECT_EQ(m.cell_of(3), (GridCell{2, 2}));
}

TEST(ShapeMatrix, NewlineRowsMatchSlashRows) {
  EXPECT_EQ(parse_shape_matrix("-1 2 -1\n-1 0 -1\n1 -1 3\n"), parse_shape_matrix(kTriangle));
}

TEST(ShapeMatrix, SingleCell) {
  const auto m = parse_shape_matrix("0");
  EXPECT_EQ(m.rows(), 1);
  EXPECT_EQ(m.cols(), 1);
  EXPECT_EQ(m.size(), 1);
}

TEST(ShapeMatrix, RejectsInvalidInput) {
  EXPECT_EQ(parse_error_kind("0 0"), ShapeError::Kind::kDuplicateLabel);
  EXPECT_EQ(parse_error_kind(""), ShapeError::Kind::kEmpty);
  EXPECT_EQ(parse_error_kind("  \n "), ShapeError::Kind::kEmpty);
  EXPECT_EQ(parse_error_kind("0 1\n2"), ShapeError::Kind::kRagged);
  EXPECT_EQ(parse_error_kind("0 x"), ShapeError::Kind::kBadToken);
  EXPECT_EQ(parse_error_kind("0 -2"), ShapeError::Kind::kBadToken);
  EXPECT_EQ(parse_error_kind("0 2"), ShapeError::Kind::kMissingLabel);
  EXPECT_EQ(parse_error_kind("1 -1"), ShapeError::Kind::kNoSeed);
  EXPECT_EQ(parse_error_kind("-1 -1"), ShapeError::Kind::kNoSeed);
  EXPECT_EQ(parse_error_kind("0 -1 1"), ShapeError::Kind::kDisconnected);
}

TEST(ShapeMatrix, DiagonalContactIsConnected) {
  EXPECT_NO_THROW(parse_shape_matrix("0 -1 / -1 1"));
}

TEST(ShapeTable, ReproducesTableTwoRow) {
  const auto t = build_shape_table(parse_shape_matrix(kTriangle), 1.0);
  const auto& row = t.row(0);
  ASSERT_EQ(row.size(), 3u);
  const int labels[] = {1, 2, 3};
  const double angles[] = {-3 * kPi / 4, kPi / 2, -kPi / 4};
  const double rounded[] = {1.4, 1.0, 1.4};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(row[i].label, labels[i]);
    EXPECT_NEAR(row[i].angle, angles[i], 1e-9);
    EXPECT_DOUBLE_EQ(std::round(row[i].distance * 10.0) / 10.0, rounded[i]);
  }
  EXPECT_DOUBLE_EQ(row[0].distance, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(row[1].distance, 1.0);
  EXPECT_DOUBLE_EQ(row[2].distance, std::sqrt(2.0));
}

TEST(ShapeTable, SingleCellHasEmptyRow) {
  const auto t = build_shape_table(parse_shape_matrix("0"), 3.0);
  ASSERT_EQ(t.size(), 1);
  EXPECT_TRUE(t.row(0).empty());
}

TEST(ShapeTable, VerticalPair) {
  const auto t = build_shape_table(parse_shape_matrix("0 / 1"), 2.0);
  ASSERT_EQ(t.row(0).size(), 1u);
  ASSERT_EQ(t.row(1).size(), 1u);
  EXPECT_EQ(t.row(0)[0].label, 1);
  EXPECT_DOUBLE_EQ(t.row(0)[0].angle, -kPi / 2);
  EXPECT_DOUBLE_EQ(t.row(0)[0].distance, 2.0);
  EXPECT_EQ(t.row(1)[0].label, 0);
  EXPECT_DOUBLE_EQ(t.row(1)[0].angle, kPi / 2);
  EXPECT_DOUBLE_EQ(t.row(1)[0].distance, 2.0);
}

TEST(ShapeTable, PositionsAndOffsets) {
  const auto t = build_shape_table(parse_shape_matrix(kTriangle), 1.0);
  EXPECT_DOUBLE_EQ(t.position(0).x, 0.0);
  EXPECT_DOUBLE_EQ(t.position(2).y, 1.0);
  EXPECT_DOUBLE_EQ(t.position(1).x, -1.0);
  EXPECT_DOUBLE_EQ(t.position(1).y, -1.0);
  EXPECT_DOUBLE_EQ(t.offset(1, 3).x, 2.0);
  EXPECT_DOUBLE_EQ(t.offset(1, 3).y, 0.0);
  EXPECT_EQ(t.find(1, 3), nullptr);
}

TEST(ShapeTable, DumpContainsTableTwoLine) {
  const auto text = dump_shape_table(build_shape_table(parse_shape_matrix(kTriangle), 1.0));
  EXPECT_EQ(text.rfind("label,neighbor,angle_rad,distance_m\n", 0), 0u);
  EXPECT_NE(text.find("\n0,2,1.570796327,1.0\n"), std::string::npos);
}

TEST(ShapeTable, DumpLineCounts) {
  EXPECT_EQ(dump_shape_table(build_shape_table(parse_shape_matrix("0"), 1.0)), "label,neighbor,angle_rad,distance_m\n");
  const auto pair = dump_shape_table(build_shape_table(parse_shape_matrix("0 / 1"), 2.0));
  EXPECT_EQ(std::count(pair.begin(), pair.end(), '\n'), 3);
}

TEST(ShapeTable, FormatRealKeepsNineDigits) {
  EXPECT_EQ(format_real(kPi / 2), "1.570796327");
  EXPECT_EQ(format_real(1.0), "1.0");
  EXPECT_EQ(format_real(-2.0), "-2.0");
  EXPECT_EQ(format_real(std::sqrt(2.0)), "1.414213562");
}

// Random 8-connected shapes grown by king moves from the seed cell.
ShapeMatrix random_shape(std::mt19937_64& rng, int max_labels) {
  std::uniform_int_distribution<int> count_dist(1, max_labels);
  const int n = count_dist(rng);
  std::vector<GridCell> cells{{0, 0}};
  std::uniform_int_distribution<int> step(-1, 1);
  while (static_cast<int>(cells.size()) < n) {
    GridCell from = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
    GridCell next{from.row + step(rng), from.col + step(rng)};
    if (std::find(cells.begin(), cells.end(), next) == cells.end()) cells.push_back(next);
  }
  int min_r = 0, min_c = 0, max_r = 0, max_c = 0;
  for (auto c : cells) {
    min_r = std::min(min_r, c.row);
    min_c = std::min(min_c, c.col);
    max_r = std::max(max_r, c.row);
    max_c = std::max(max_c, c.col);
  }
  // Pad with an empty border half of the time.
  const int pad = static_cast<int>(rng() % 2);
  const int rows = max_r - min_r + 1 + 2 * pad;
  const int cols = max_c - min_c + 1 + 2 * pad;
  std::vector<int> labels(cells.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<int> grid(static_cast<std::size_t>(rows * cols), kEmptyCell);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const int r = cells[i].row - min_r + pad;
    const int c = cells[i].col - min_c + pad;
    grid[static_cast<std::size_t>(r * cols + c)] = labels[i];
  }
  return ShapeMatrix::from_cells(rows, cols, std::move(grid));
}

// Bearing of a king move, looked up rather than computed.
double king_move_angle(int drow, int dcol) {
  if (drow == -1 && dcol == 0) return kPi / 2;
  if (drow == -1 && dcol == 1) return kPi / 4;
  if (drow == 0 && dcol == 1) return 0.0;
  if (drow == 1 && dcol == 1) return -kPi / 4;
  if (drow == 1 && dcol == 0) return -kPi / 2;
  if (drow == 1 && dcol == -1) return -3 * kPi / 4;
  if (drow == 0 && dcol == -1) return kPi;
  return 3 * kPi / 4;
}

TEST(ShapeTableProperty, MatchesKingMoveOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = random_shape(rng, 20);
    const double spacing = 0.25 + static_cast<double>(trial % 7) * 0.5;
    const auto t = build_shape_table(m, spacing);
    ASSERT_EQ(t.size(), m.size());
    for (int label = 0; label < m.size(); ++label) {
      const GridCell here = m.cell_of(label);
      std::set<int> expected;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = here.row + dr, c = here.col + dc;
          if ((dr || dc) && r >= 0 && c >= 0 && r < m.rows() && c < m.cols() && m.at(r, c) >= 0) expected.insert(m.at(r, c));
        }
      }
      const auto& row = t.row(label);
      ASSERT_EQ(row.size(), expected.size());
      int previous = -1;
      for (const auto& ref : row) {
        EXPECT_GT(ref.label, previous);
        previous = ref.label;
        EXPECT_TRUE(expected.count(ref.label));
        const GridCell there = m.cell_of(ref.label);
        const int dr = there.row - here.row, dc = there.col - here.col;
        EXPECT_NEAR(ref.angle, king_move_angle(dr, dc), 1e-12);
        const double want = (dr != 0 && dc != 0) ? spacing * std::sqrt(2.0) : spacing;
        EXPECT_NEAR(ref.distance, want, 1e-12);
        EXPECT_GT(ref.angle, -kPi);
        EXPECT_LE(ref.angle, kPi);
      }
    }
  }
}

TEST(ShapeTableProperty, SymmetricAndBounded) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = random_shape(rng, 25);
    const auto t = build_shape_table(m, 1.0);
    for (int i = 0; i < t.size(); ++i) {
      if (t.size() >= 2) {
        EXPECT_GE(t.row(i).size(), 1u);
        EXPECT_LE(t.row(i).size(), 8u);
      }
      for (const auto& ref : t.row(i)) {
        const NeighborRef* back = t.find(ref.label, i);
        ASSERT_NE(back, nullptr);
        EXPECT_DOUBLE_EQ(back->distance, ref.distance);
        EXPECT_NEAR(std::abs(angle_diff(back->angle, normalize_angle(ref.angle + kPi))), 0.0, 1e-12);
      }
    }
  }
}

TEST(ShapeMatrixProperty, FormatParseRoundTrip) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = random_shape(rng, 30);
    const auto again = parse_shape_matrix(format_shape_matrix(m));
    EXPECT_EQ(again, m);
    EXPECT_EQ(parse_shape_matrix(format_shape_matrix(again)), again);
  }
}

TEST(ShapeMatrixProperty, RemovingABridgeDisconnects) {
  // A straight bar: removing any interior cell splits it.
  for (int len = 3; len <= 9; ++len) {
    for (int cut = 1; cut < len - 1; ++cut) {
      std::string text;
      int next = 0;
      for (int i = 0; i < len; ++i) {
        if (i > 0) text += ' ';
        text += i == cut ? "-1" : std::to_string(next++);
      }
      EXPECT_EQ(parse_error_kind(text), ShapeError::Kind::kDisconnected) << text;
    }
  }
}

}  // namespace
}  // namespace swarmform
