#include "goat/perception.hpp"

#include <algorithm>
#include <cmath>

namespace goat {

InfillResult infill_depth(const std::vector<double>& sensed, const std::vector<bool>& dropped,
                          const std::vector<double>& estimate) {
  InfillResult result;
  result.depth = sensed;

  // Centered normal equations for depth = A * estimate + b.
  int n = 0;
  double sum_x = 0.0, sum_y = 0.0;
  for (size_t i = 0; i < sensed.size(); ++i)
    if (!dropped[i]) {
      ++n;
      sum_x += estimate[i];
      sum_y += sensed[i];
    }
  if (n < 2) return result;
  double mean_x = sum_x / n, mean_y = sum_y / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < sensed.size(); ++i)
    if (!dropped[i]) {
      double dx = estimate[i] - mean_x;
      sxx += dx * dx;
      sxy += dx * (sensed[i] - mean_y);
    }
  if (sxx <= 0.0) return result;  // all estimates equal

  DepthGrounding g;
  g.scale = sxy / sxx;
  g.offset = mean_y - g.scale * mean_x;
  double sse = 0.0;
  for (size_t i = 0; i < sensed.size(); ++i)
    if (!dropped[i]) {
      double r = sensed[i] - (g.scale * estimate[i] + g.offset);
      sse += r * r;
    }
  g.residual_mse = sse / n;
  result.grounding = g;
  for (size_t i = 0; i < sensed.size(); ++i)
    if (dropped[i]) result.depth[i] = g.scale * estimate[i] + g.offset;
  return result;
}

InfillResult infill_depth(const Observation& obs) {
  std::vector<double> sensed(obs.depth.size()), estimate(obs.depth.size());
  std::vector<bool> dropped(obs.depth.size());
  for (size_t i = 0; i < obs.depth.size(); ++i) {
    sensed[i] = obs.depth[i].range_m;
    estimate[i] = obs.depth[i].estimate;
    dropped[i] = obs.depth[i].dropped;
  }
  return infill_depth(sensed, dropped, estimate);
}

std::vector<ProjectedDetection> project_detections(const Observation& obs, const AgentState& map_pose,
                                                   double cell_size, int map_size) {
  std::vector<ProjectedDetection> out;
  out.reserve(obs.detections.size());
  for (const auto& det : obs.detections) {
    ProjectedDetection proj;
    proj.category = det.category_observed;
    proj.view_bbox = det.view_bbox;
    proj.view_bbox_pad = det.view_bbox_pad;
    proj.view_full = det.view_full;
    proj.distance_m = det.distance_m;
    proj.step = obs.timestamp;
    proj.true_object_id = det.true_object_id;
    for (const Vec2& ego : det.visible_points) {
      Vec2 map_point = map_pose.position + rotate(ego, map_pose.heading);
      Cell cell = point_to_cell(map_point, cell_size);
      if (cell.r < 0 || cell.r >= map_size || cell.c < 0 || cell.c >= map_size) {
        ++proj.clipped;
        continue;
      }
      proj.map_points.push_back(map_point);
      if (std::find(proj.cells.begin(), proj.cells.end(), cell) == proj.cells.end())
        proj.cells.push_back(cell);
    }
    if (!proj.cells.empty() || proj.clipped > 0) out.push_back(std::move(proj));
  }
  return out;
}

}  // namespace goat
