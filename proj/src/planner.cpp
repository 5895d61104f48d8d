#include "goat/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <json.hpp>

namespace goat {

// Debug dump in the snapshot format: JSON header line, then row-major
// little-endian int32 distances in millimeters (-1 = unreachable).
void DistanceField::save(const std::string& path) const {
  nlohmann::json header{{"version", 1}, {"kind", "distance_field"}, {"rows", rows_},
                        {"cols", cols_}, {"cell_size", cell_size_}};
  std::ofstream out(path, std::ios::binary);
  out << header.dump() << "\n";
  for (double v : d_) {
    int32_t mm = std::isfinite(v) ? int32_t(std::lround(v * 1000.0)) : -1;
    unsigned char bytes[4] = {static_cast<unsigned char>(mm & 0xFF),
                              static_cast<unsigned char>((mm >> 8) & 0xFF),
                              static_cast<unsigned char>((mm >> 16) & 0xFF),
                              static_cast<unsigned char>((mm >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

namespace {

struct HeapEntry {
  double d;
  Cell cell;
  bool operator>(const HeapEntry& o) const {
    if (d != o.d) return d > o.d;
    if (cell.r != o.cell.r) return cell.r > o.cell.r;
    return cell.c > o.cell.c;
  }
};

// Two-sided first-order upwind update at unit speed, grid spacing h.
double upwind_update(const DistanceField& field, const Cell& cell, double h) {
  auto axis_min = [&](Cell a, Cell b) {
    double va = field.in_bounds(a) ? field.at(a) : kInf;
    double vb = field.in_bounds(b) ? field.at(b) : kInf;
    return std::min(va, vb);
  };
  double a = axis_min({cell.r - 1, cell.c}, {cell.r + 1, cell.c});
  double b = axis_min({cell.r, cell.c - 1}, {cell.r, cell.c + 1});
  if (a > b) std::swap(a, b);
  if (a == kInf) return kInf;
  if (b - a >= h) return a + h;
  return 0.5 * (a + b + std::sqrt(2.0 * h * h - (b - a) * (b - a)));
}

DistanceField march(const BoolGrid& free, const std::vector<Cell>& sources, double h) {
  DistanceField field(free.rows, free.cols, h);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  std::vector<uint8_t> frozen(size_t(free.rows) * free.cols, 0);
  for (const Cell& s : sources)
    if (free.in_bounds(s) && free.at(s)) {
      field.ref(s) = 0.0;
      heap.push({0.0, s});
    }
  auto frozen_at = [&](const Cell& cell) -> uint8_t& {
    return frozen[size_t(cell.r) * free.cols + cell.c];
  };
  while (!heap.empty()) {
    auto [d, cell] = heap.top();
    heap.pop();
    if (frozen_at(cell)) continue;
    frozen_at(cell) = 1;
    const Cell nbrs[4] = {{cell.r - 1, cell.c}, {cell.r + 1, cell.c}, {cell.r, cell.c - 1}, {cell.r, cell.c + 1}};
    for (const Cell& n : nbrs) {
      if (!free.in_bounds(n) || !free.at(n) || frozen_at(n)) continue;
      double u = upwind_update(field, n, h);
      if (u < field.at(n)) {
        field.ref(n) = u;
        heap.push({u, n});
      }
    }
  }
  return field;
}

}  // namespace

std::optional<DistanceField> plan(const BoolGrid& obstacles, const std::vector<Cell>& goal_cells,
                                  const PlanConfig& config, const std::optional<Cell>& source) {
  if (goal_cells.empty()) return std::nullopt;
  BoolGrid inflated = dilate_grid(obstacles, config.inflation_radius);

  // Restore raw occupancy in a collar around the goal (and the source, if
  // given); goal cells themselves are free.
  int collar = config.inflation_radius + 1;
  std::vector<Cell> collar_centers = goal_cells;
  if (source) collar_centers.push_back(*source);
  for (const Cell& g : collar_centers)
    for (int dr = -collar; dr <= collar; ++dr)
      for (int dc = -collar; dc <= collar; ++dc) {
        Cell cell{g.r + dr, g.c + dc};
        if (inflated.in_bounds(cell)) inflated.set(cell, obstacles.at(cell));
      }
  // the agent is physically at the source; the cell cannot be blocked
  if (source && inflated.in_bounds(*source)) inflated.set(*source, false);
  bool any_in_bounds = false;
  for (const Cell& g : goal_cells)
    if (inflated.in_bounds(g)) {
      inflated.set(g, false);
      any_in_bounds = true;
    }
  if (!any_in_bounds) return std::nullopt;

  BoolGrid free(inflated.rows, inflated.cols);
  for (size_t i = 0; i < free.data.size(); ++i) free.data[i] = inflated.data[i] ? 0 : 1;
  return march(free, goal_cells, config.cell_size);
}

DistanceField distance_from(const BoolGrid& obstacles, const Cell& source, const PlanConfig& config) {
  BoolGrid inflated = dilate_grid(obstacles, config.inflation_radius);
  // The agent may legitimately stand inside the inflated margin; revert to
  // raw occupancy in a collar around it so the march can start.
  int collar = config.inflation_radius + 1;
  for (int dr = -collar; dr <= collar; ++dr)
    for (int dc = -collar; dc <= collar; ++dc) {
      Cell cell{source.r + dr, source.c + dc};
      if (inflated.in_bounds(cell)) inflated.set(cell, obstacles.at(cell));
    }
  // the agent is physically at the source; the cell cannot be blocked
  if (inflated.in_bounds(source)) inflated.set(source, false);
  BoolGrid free(inflated.rows, inflated.cols);
  for (size_t i = 0; i < free.data.size(); ++i) free.data[i] = inflated.data[i] ? 0 : 1;
  return march(free, {source}, config.cell_size);
}

std::vector<Cell> descent_path(const DistanceField& field, const Cell& start) {
  std::vector<Cell> path;
  if (!field.reachable(start)) return path;
  Cell cur = start;
  path.push_back(cur);
  for (int guard = 0; guard < field.rows() * field.cols(); ++guard) {
    Cell best = cur;
    double best_d = field.at(cur);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        Cell n{cur.r + dr, cur.c + dc};
        if ((dr || dc) && field.in_bounds(n) && field.at(n) < best_d) {
          best_d = field.at(n);
          best = n;
        }
      }
    if (best == cur) break;
    cur = best;
    path.push_back(cur);
  }
  return path;
}

NextAction next_action(const AgentState& map_pose, const DistanceField& field,
                       const BoolGrid& planning_obstacles, const LocalPolicyConfig& config) {
  const double h = field.cell_size();
  Cell here = point_to_cell(map_pose.position, h);
  if (!field.reachable(here)) return {Action::kStop, StepStatus::kUnreachable};
  if (field.at(here) < config.stop_distance_m) return {Action::kStop, StepStatus::kArrived};

  auto landing_value = [&](double heading) -> double {
    Vec2 dir = heading_dir(heading);
    Vec2 target = map_pose.position + dir * config.step_size_m;
    Cell cell = point_to_cell(target, h);
    if (!field.in_bounds(cell) || field.at(cell) >= field.at(here)) return kInf;
    // swept-path check at half-cell sampling
    int samples = int(std::ceil(config.step_size_m / (h / 2.0)));
    for (int s = 1; s <= samples; ++s) {
      Vec2 p = map_pose.position + dir * (config.step_size_m * s / samples);
      Cell pc = point_to_cell(p, h);
      if (!field.in_bounds(pc) || (planning_obstacles.in_bounds(pc) && planning_obstacles.at(pc)))
        return kInf;
    }
    return field.at(cell);
  };

  int directions = int(std::lround(360.0 / config.turn_angle_deg));
  double best_heading = map_pose.heading;
  double best_value = kInf;
  double best_turn = kInf;
  for (int k = 0; k < directions; ++k) {
    double heading = wrap_heading(map_pose.heading + k * config.turn_angle_deg);
    double v = landing_value(heading);
    if (v == kInf) continue;
    // preference order: lower landing value, then least turning
    double turn_cost = std::abs(std::remainder(heading - map_pose.heading, 360.0));
    if (v < best_value || (v == best_value && turn_cost < best_turn)) {
      best_value = v;
      best_turn = turn_cost;
      best_heading = heading;
    }
  }
  if (best_value == kInf) return {Action::kStop, StepStatus::kUnreachable};

  double err = std::remainder(best_heading - map_pose.heading, 360.0);
  if (std::abs(err) <= config.turn_angle_deg / 2.0) return {Action::kForward, StepStatus::kMove};
  return {err > 0 ? Action::kTurnLeft : Action::kTurnRight, StepStatus::kMove};
}

}  // namespace goat
