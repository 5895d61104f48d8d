#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace goat {

// Grid cell, row-major. Row grows with world +y, column with world +x.
struct Cell {
  int r = 0;
  int c = 0;

  bool operator==(const Cell& o) const { return r == o.r && c == o.c; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
  bool operator<(const Cell& o) const { return r != o.r ? r < o.r : c < o.c; }
};

struct CellHash {
  size_t operator()(const Cell& cell) const {
    return std::hash<int64_t>()((int64_t(cell.r) << 32) ^ uint32_t(cell.c));
  }
};

// Continuous point in meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

// Heading in degrees, counter-clockwise positive, 0 = east (+x).
inline Vec2 heading_dir(double heading_deg) {
  double rad = heading_deg * M_PI / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

inline double wrap_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  return h;
}

inline Vec2 rotate(const Vec2& v, double deg) {
  double rad = deg * M_PI / 180.0;
  double cs = std::cos(rad), sn = std::sin(rad);
  return {cs * v.x - sn * v.y, sn * v.x + cs * v.y};
}

inline Cell point_to_cell(const Vec2& p, double cell_size) {
  return {int(std::floor(p.y / cell_size)), int(std::floor(p.x / cell_size))};
}

inline Vec2 cell_center(const Cell& cell, double cell_size) {
  return {(cell.c + 0.5) * cell_size, (cell.r + 0.5) * cell_size};
}

// Flat boolean grid with (rows, cols) shape.
struct BoolGrid {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> data;

  BoolGrid() = default;
  BoolGrid(int r, int c, bool value = false) : rows(r), cols(c), data(size_t(r) * c, value ? 1 : 0) {}

  bool in_bounds(const Cell& cell) const {
    return cell.r >= 0 && cell.r < rows && cell.c >= 0 && cell.c < cols;
  }
  bool at(const Cell& cell) const { return data[size_t(cell.r) * cols + cell.c] != 0; }
  void set(const Cell& cell, bool v) { data[size_t(cell.r) * cols + cell.c] = v ? 1 : 0; }
};

// Chebyshev (square structuring element) dilation of a cell set.
std::vector<Cell> dilate_chebyshev(const std::vector<Cell>& cells, int radius);

// Chebyshev dilation of a grid, in place semantics via returned copy.
BoolGrid dilate_grid(const BoolGrid& grid, int radius);

// 4-connectivity check for a non-empty cell set.
bool is_4_connected(const std::vector<Cell>& cells);

}  // namespace goat
