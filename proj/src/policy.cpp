#include "goat/policy.hpp"

#include <algorithm>
#include <unordered_set>

namespace goat {

LongTermGoal decide(const GoalSpec& goal, const InstanceMemory& memory, const SemanticMap& map,
                    const MatchConfig& config, bool fully_explored, const DistanceField& agent_field,
                    int step) {
  LongTermGoal out;
  out.issued_at = step;

  MatchResult match = localize_goal(goal, memory, config, fully_explored, &agent_field);
  if (match.instance_id) {
    out.kind = LongTermGoal::Kind::kPointGoal;
    out.instance_id = *match.instance_id;
    out.target_cells = memory.instance(out.instance_id).cells;
    return out;
  }

  std::vector<FrontierCluster> clusters = frontiers(map, agent_field);
  if (!clusters.empty()) {
    out.kind = LongTermGoal::Kind::kExplore;
    out.frontier_cell = clusters.front().nearest;
    return out;
  }
  return out;  // kNone
}

void person_goal_update(SemanticMap& map, InstanceMemory& memory, int person_category,
                        const std::vector<std::pair<int, std::vector<Cell>>>& person_associations) {
  for (const auto& [id, new_cells] : person_associations) {
    const ObjectInstance& inst = memory.instance(id);
    if (inst.category != person_category) continue;
    std::unordered_set<Cell, CellHash> fresh(new_cells.begin(), new_cells.end());
    std::vector<Cell> stale;
    for (const Cell& cell : inst.cells)
      if (!fresh.count(cell)) stale.push_back(cell);
    if (!stale.empty()) map.clear_instance_cells(person_category, id, stale, /*clear_obstacle=*/true);
    memory.replace_cells(id, new_cells);
  }
}

}  // namespace goat
