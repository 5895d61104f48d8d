#pragma once

#include <optional>
#include <vector>

#include "goat/sim.hpp"

namespace goat {

struct DepthGrounding {
  double scale = 1.0;   // A
  double offset = 0.0;  // b
  double residual_mse = 0.0;
};

struct InfillResult {
  std::vector<double> depth;  // per-ray absolute depth, holes filled when grounded
  std::optional<DepthGrounding> grounding;  // nullopt on degenerate input
};

// Fits depth = A * estimate + b over non-dropped rays (closed-form least
// squares) and fills dropped rays with the grounded estimate. Valid rays
// pass through unchanged. Degenerate systems (fewer than two valid rays,
// or all estimates equal) leave the holes in place.
InfillResult infill_depth(const std::vector<double>& sensed, const std::vector<bool>& dropped,
                          const std::vector<double>& estimate);

InfillResult infill_depth(const Observation& obs);

// One detection transformed into map-frame cells.
struct ProjectedDetection {
  std::vector<Cell> cells;       // map cells, deduplicated
  std::vector<Vec2> map_points;  // pre-rounding map-frame points (m)
  int category = 0;
  Feature view_bbox;
  Feature view_bbox_pad;
  Feature view_full;
  double distance_m = 0.0;
  int step = 0;
  int clipped = 0;  // points that fell outside the map
  int true_object_id = -1;
};

// Rigid transform of egocentric detection points into map-frame cells.
// `map_pose` is the agent pose expressed in the map frame.
std::vector<ProjectedDetection> project_detections(const Observation& obs, const AgentState& map_pose,
                                                   double cell_size, int map_size);

}  // namespace goat
