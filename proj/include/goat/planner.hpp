#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "goat/geometry.hpp"
#include "goat/sim.hpp"

namespace goat {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Geodesic distance field in meters; +inf marks unreachable cells.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int rows, int cols, double cell_size)
      : rows_(rows), cols_(cols), cell_size_(cell_size), d_(size_t(rows) * cols, kInf) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size() const { return cell_size_; }
  bool in_bounds(const Cell& cell) const {
    return cell.r >= 0 && cell.r < rows_ && cell.c >= 0 && cell.c < cols_;
  }
  double at(const Cell& cell) const { return d_[size_t(cell.r) * cols_ + cell.c]; }
  double& ref(const Cell& cell) { return d_[size_t(cell.r) * cols_ + cell.c]; }
  bool reachable(const Cell& cell) const { return in_bounds(cell) && at(cell) < kInf; }

  void save(const std::string& path) const;  // snapshot format, float stored as mm int32

 private:
  int rows_ = 0, cols_ = 0;
  double cell_size_ = 0.05;
  std::vector<double> d_;
};

struct PlanConfig {
  double cell_size = 0.05;
  int inflation_radius = 3;  // agent radius in cells
};

// First-order upwind fast marching over unit-speed free space. Obstacles
// are inflated by the agent radius; the raw (un-inflated) grid is restored
// in a small collar around the goal so goals flush against obstacles stay
// reachable. Returns nullopt when every goal cell is blocked in the raw
// grid, and an all-inf field when the goal region is sealed off. When
// `source` is given (the agent's own cell), raw occupancy is restored in a
// collar around it too — the agent may be standing inside the margin.
std::optional<DistanceField> plan(const BoolGrid& obstacles, const std::vector<Cell>& goal_cells,
                                  const PlanConfig& config,
                                  const std::optional<Cell>& source = std::nullopt);

// Fast marching from a single source over the inflated grid (used for
// frontier distances). The source cell itself is kept free.
DistanceField distance_from(const BoolGrid& obstacles, const Cell& source, const PlanConfig& config);

enum class StepStatus { kMove, kArrived, kUnreachable };

struct NextAction {
  Action action = Action::kStop;
  StepStatus status = StepStatus::kMove;
};

struct LocalPolicyConfig {
  double stop_distance_m = 1.0;
  double step_size_m = 0.25;
  double turn_angle_deg = 30.0;
};

// Greedy descent over the distance field with discrete actions. Forward is
// only emitted when the landing cell strictly decreases the field value, so
// forward progress is monotone by construction.
NextAction next_action(const AgentState& map_pose, const DistanceField& field,
                       const BoolGrid& planning_obstacles, const LocalPolicyConfig& config);

// 8-neighbor steepest-descent chain from `start` down the field (ends at a
// local minimum, normally a goal cell). Used for replan corridor checks.
std::vector<Cell> descent_path(const DistanceField& field, const Cell& start);

}  // namespace goat
