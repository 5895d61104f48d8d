#pragma once

#include <optional>
#include <vector>

#include "goat/world.hpp"

namespace goat {

enum class Action { kForward, kTurnLeft, kTurnRight, kStop };

struct AgentState {
  Vec2 position;        // meters, world frame
  double heading = 0.0;  // degrees, CCW positive, 0 = east
};

struct SimConfig {
  double step_size_m = 0.25;
  double turn_angle_deg = 30.0;
  double fov_deg = 90.0;
  int num_rays = 60;
  double max_range_m = 5.0;
  double sigma_depth = 0.01;     // ranging noise (m)
  double p_drop = 0.5;           // dropout on rays hitting reflective objects
  double p_miss = 0.05;          // detection miss rate
  double p_misclass = 0.05;      // detection category confusion rate
  double sigma_view = 0.1;       // view feature noise
  double pad_context_weight = 0.3;   // surroundings mixed into bbox+pad views
  double full_context_weight = 0.6;  // surroundings mixed into full-image views
};

struct DepthRay {
  double range_m = 0.0;       // sensed range (noisy); stale when dropped
  bool dropped = false;
  double estimate = 0.0;      // relative (affine-distorted) depth estimate
  double true_range_m = 0.0;  // evaluation only
};

struct Detection {
  std::vector<Vec2> visible_points;  // egocentric centers of visible footprint cells (m)
  int category_observed = 0;
  Feature view_bbox;
  Feature view_bbox_pad;
  Feature view_full;
  double distance_m = 0.0;
  int true_object_id = -1;  // evaluation only, -2 for persons
};

struct Observation {
  std::vector<DepthRay> depth;
  std::vector<Detection> detections;
  AgentState pose;
  int timestamp = 0;
};

struct RayHit {
  double distance = 0.0;
  bool hit = false;
  Cell cell;           // blocked cell hit, valid when hit
  int object_id = -1;  // >=0 world object, -2 person, -1 wall
};

// Distance along direction (unit vector) to the first blocked cell.
// Extra blocked cells (persons) are supplied separately.
RayHit raycast(const WorldSpec& world, const Vec2& origin, const Vec2& dir, double max_range,
               const std::vector<Cell>& extra_blocked);

// Occupied person cells at step t.
std::vector<Cell> person_cells_at(const WorldSpec& world, int t);

// Discrete motion model. Forward is a no-op when the swept path is blocked.
AgentState step(const WorldSpec& world, const AgentState& state, Action action,
                const SimConfig& config, int t);

// Deterministic sensor bundle for (world, state, seed, t).
Observation observe(const WorldSpec& world, const AgentState& state, const SimConfig& config,
                    uint64_t seed, int t);

inline AgentState initial_state(const WorldSpec& world) {
  return {cell_center(world.start, world.cell_size_m), 0.0};
}

}  // namespace goat
