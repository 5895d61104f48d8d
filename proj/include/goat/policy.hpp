#pragma once

#include <optional>
#include <vector>

#include "goat/matching.hpp"
#include "goat/semantic_map.hpp"

namespace goat {

struct LongTermGoal {
  enum class Kind { kPointGoal, kExplore, kNone };
  Kind kind = Kind::kNone;
  int instance_id = -1;          // point goals
  std::vector<Cell> target_cells;  // point goals: the instance's map cells
  Cell frontier_cell;            // explore goals
  int issued_at = 0;
};

// pi_G: try to localize the goal in memory; otherwise head for the nearest
// frontier; with no frontiers and no match the caller retries with
// fully_explored=true before declaring the goal failed.
LongTermGoal decide(const GoalSpec& goal, const InstanceMemory& memory, const SemanticMap& map,
                    const MatchConfig& config, bool fully_explored, const DistanceField& agent_field,
                    int step);

// Dynamic person bookkeeping: stale footprint cells of a person instance
// are cleared from the category and obstacle channels once the newest
// detection no longer covers them, and the memory footprint is replaced by
// the latest sighting.
void person_goal_update(SemanticMap& map, InstanceMemory& memory, int person_category,
                        const std::vector<std::pair<int, std::vector<Cell>>>& person_associations);

}  // namespace goat
