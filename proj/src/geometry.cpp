#include "goat/geometry.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace goat {

std::vector<Cell> dilate_chebyshev(const std::vector<Cell>& cells, int radius) {
  std::unordered_set<Cell, CellHash> out;
  out.reserve(cells.size() * size_t(2 * radius + 1) * (2 * radius + 1));
  for (const Cell& cell : cells)
    for (int dr = -radius; dr <= radius; ++dr)
      for (int dc = -radius; dc <= radius; ++dc)
        out.insert({cell.r + dr, cell.c + dc});
  std::vector<Cell> result(out.begin(), out.end());
  std::sort(result.begin(), result.end());
  return result;
}

BoolGrid dilate_grid(const BoolGrid& grid, int radius) {
  // Two-pass separable dilation (rows then columns).
  BoolGrid tmp(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      bool v = false;
      for (int d = -radius; d <= radius && !v; ++d) {
        int cc = c + d;
        if (cc >= 0 && cc < grid.cols && grid.at({r, cc})) v = true;
      }
      tmp.set({r, c}, v);
    }
  BoolGrid out(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      bool v = false;
      for (int d = -radius; d <= radius && !v; ++d) {
        int rr = r + d;
        if (rr >= 0 && rr < grid.rows && tmp.at({rr, c})) v = true;
      }
      out.set({r, c}, v);
    }
  return out;
}

bool is_4_connected(const std::vector<Cell>& cells) {
  if (cells.empty()) return false;
  std::unordered_set<Cell, CellHash> all(cells.begin(), cells.end());
  std::unordered_set<Cell, CellHash> seen;
  std::deque<Cell> queue{cells.front()};
  seen.insert(cells.front());
  while (!queue.empty()) {
    Cell cur = queue.front();
    queue.pop_front();
    const Cell nbrs[4] = {{cur.r + 1, cur.c}, {cur.r - 1, cur.c}, {cur.r, cur.c + 1}, {cur.r, cur.c - 1}};
    for (const Cell& n : nbrs)
      if (all.count(n) && !seen.count(n)) {
        seen.insert(n);
        queue.push_back(n);
      }
  }
  return seen.size() == all.size();
}

}  // namespace goat
