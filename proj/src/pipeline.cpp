#include "goat/pipeline.hpp"

#include <algorithm>
#include <unordered_set>

#include "goat/planner.hpp"

namespace goat {

MatchConfig EpisodeConfig::match_config(GoalModality modality) const {
  MatchConfig mc;
  mc.subsample_by_category = true;
  mc.context = ViewContext::kBbox;
  mc.aggregation = Aggregation::kMax;
  if (modality == GoalModality::kImage) {
    mc.method = MatchMethod::kKeypointProxy;
    mc.threshold = keypoint_threshold;
  } else {
    mc.method = MatchMethod::kCosine;
    mc.threshold = cosine_threshold;
  }
  return mc;
}

Agent::Agent(const WorldSpec& world, MethodVariant variant, const EpisodeConfig& config,
             uint64_t seed)
    : world_(world),
      variant_(variant),
      config_(config),
      seed_(seed),
      state_(initial_state(world)),
      map_(world.category_count, config.map_size, world.cell_size_m),
      memory_(config.dilation) {
  Cell center{config.map_size / 2, config.map_size / 2};
  map_offset_ = cell_center(center, world.cell_size_m) - cell_center(world.start, world.cell_size_m);
}

AgentState Agent::map_pose(const AgentState& world_pose) const {
  return {world_pose.position + map_offset_, world_pose.heading};
}

Cell Agent::world_to_map(const Cell& cell) const {
  Cell center{config_.map_size / 2, config_.map_size / 2};
  return {cell.r - world_.start.r + center.r, cell.c - world_.start.c + center.c};
}

Cell Agent::map_to_world(const Cell& cell) const {
  Cell center{config_.map_size / 2, config_.map_size / 2};
  return {cell.r + world_.start.r - center.r, cell.c + world_.start.c - center.c};
}

std::vector<int> Agent::instance_ids_for_object(int object_id) const {
  auto it = object_to_instances_.find(object_id);
  std::vector<int> live;
  if (it == object_to_instances_.end()) return live;
  for (int id : it->second)
    if (memory_.instances().count(id)) live.push_back(id);
  return live;
}

void Agent::reset_memory() {
  map_ = SemanticMap(world_.category_count, config_.map_size, world_.cell_size_m);
  memory_ = InstanceMemory(config_.dilation);
  frames_.clear();
  object_to_instances_.clear();
}

Agent::StepIngest Agent::ingest_observation() {
  StepIngest ingest;
  Observation obs = observe(world_, state_, config_.sim, seed_, t_);
  AgentState pose = map_pose(state_);
  Cell agent_cell = point_to_cell(pose.position, world_.cell_size_m);

  // Depth grounding fills dropout holes where possible.
  InfillResult infill = infill_depth(obs);

  std::vector<ProjectedDetection> projections =
      project_detections(obs, pose, world_.cell_size_m, config_.map_size);

  std::vector<MapWrite> writes;
  std::vector<std::pair<int, std::vector<Cell>>> person_assocs;
  for (const auto& proj : projections) {
    if (proj.cells.empty()) continue;
    ViewRecord view{proj.view_bbox, proj.view_bbox_pad, proj.view_full, proj.distance_m, proj.step};
    size_t before = memory_.size();
    int id = memory_.associate(proj.cells, proj.category, view);
    if (memory_.size() > before) ingest.created_categories.push_back(proj.category);
    writes.push_back({proj.cells, proj.category, id});
    ingest.touched_instances.push_back(id);
    ingest.touched_categories.push_back(proj.category);
    if (proj.category == world_.person_category()) person_assocs.push_back({id, proj.cells});
    if (proj.true_object_id >= 0) {
      auto& ids = object_to_instances_[proj.true_object_id];
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }

    // Misclassification hygiene: a rare wrong-category detection of a real
    // object leaves a phantom instance sharing that object's cells. Once
    // the true-category instance has an overwhelming view majority, the
    // co-located minority instance is discarded as noise.
    if (proj.category != world_.person_category()) {
      const ObjectInstance& winner = memory_.instance(id);
      std::unordered_set<Cell, CellHash> winner_cells(winner.cells.begin(), winner.cells.end());
      std::vector<int> losers;
      for (const auto& [other_id, other] : memory_.instances()) {
        if (other_id == id || other.category == proj.category ||
            other.category == world_.person_category())
          continue;
        if (winner.views.size() < 10 || winner.views.size() < 5 * other.views.size()) continue;
        for (const Cell& cell : other.cells)
          if (winner_cells.count(cell)) {
            losers.push_back(other_id);
            break;
          }
      }
      for (int other_id : losers) {
        const ObjectInstance& loser = memory_.instance(other_id);
        map_.clear_instance_cells(loser.category, other_id, loser.cells, /*clear_obstacle=*/false);
        memory_.erase(other_id);
      }
    }
  }

  // Ray geometry: traversed cells are observed free, terminal hits are
  // obstacles. Dropped rays without grounding keep their holes.
  std::vector<Cell> free_cells, obstacle_cells;
  const double h = world_.cell_size_m;
  for (size_t i = 0; i < obs.depth.size(); ++i) {
    const DepthRay& ray = obs.depth[i];
    if (ray.dropped && !infill.grounding) continue;
    double range = std::min(ray.dropped ? infill.depth[i] : ray.range_m, config_.sim.max_range_m);
    if (range <= 0.0) continue;
    double angle = pose.heading + (config_.sim.num_rays == 1
                                       ? 0.0
                                       : config_.sim.fov_deg / 2.0 -
                                             config_.sim.fov_deg * double(i) /
                                                 double(config_.sim.num_rays - 1));
    Vec2 dir = heading_dir(angle);
    bool hit = range < config_.sim.max_range_m - 4.0 * config_.sim.sigma_depth;
    // walk the ray at half-cell resolution, stopping short of the hit cell
    double clear_len = hit ? std::max(0.0, range - h) : range;
    int samples = std::max(1, int(clear_len / (h / 2.0)));
    for (int s = 0; s <= samples; ++s) {
      Cell cell = point_to_cell(pose.position + dir * (clear_len * s / samples), h);
      if (map_.in_bounds(cell)) free_cells.push_back(cell);
    }
    if (hit) {
      Cell cell = point_to_cell(pose.position + dir * (range + h / 2.0), h);
      if (map_.in_bounds(cell)) obstacle_cells.push_back(cell);
    }
  }
  for (const auto& w : writes) obstacle_cells.insert(obstacle_cells.end(), w.cells.begin(), w.cells.end());

  for (const Cell& cell : obstacle_cells)
    if (map_.in_bounds(cell) && !map_.obstacle(cell)) ingest.new_obstacles.push_back(cell);

  map_.update(writes, obstacle_cells, free_cells, agent_cell);
  person_goal_update(map_, memory_, world_.person_category(), person_assocs);

  if (variant_ == MethodVariant::kCow) {
    // Whole-frame feature: background of the local area blended with the
    // full-image features of everything currently visible.
    Feature background = unit_feature(
        hash_mix(kSaltBackground, uint64_t(agent_cell.r / 20 + 1000), uint64_t(agent_cell.c / 20)));
    Feature frame = background;
    if (!obs.detections.empty()) {
      Feature mean(kFeatureDim, 0.0);
      for (const auto& det : obs.detections)
        for (int d = 0; d < kFeatureDim; ++d) mean[d] += det.view_full[d];
      mean = normalized(mean);
      frame = blend(mean, background, config_.cow_background_weight);
    }
    frames_.push_back({frame, agent_cell});
  }
  return ingest;
}

GoalSpec Agent::effective_goal(const GoalSpec& goal) const {
  if (variant_ == MethodVariant::kNoInstances) {
    GoalSpec g = goal;
    g.modality = GoalModality::kCategory;  // instance-blind: category only
    g.goal_feature.clear();
    return g;
  }
  return goal;
}

// Threshold-gated match without any distance field. Used for the cheap
// per-update re-check while exploring; category goals need distances and
// go through the full decide instead.
std::optional<LongTermGoal> Agent::try_cheap_match(const GoalSpec& goal, bool fully_explored) {
  LongTermGoal out;
  if (variant_ == MethodVariant::kCow) {
    Feature goal_feature =
        goal.goal_feature.empty() ? category_prototype(goal.category) : goal.goal_feature;
    int best = -1;
    double best_score = -1.0;
    for (size_t f = 0; f < frames_.size(); ++f) {
      double s = std::clamp(cosine(goal_feature, frames_[f].feature), 0.0, 1.0);
      if (s > best_score) {
        best_score = s;
        best = int(f);
      }
    }
    if (best >= 0 && (fully_explored || best_score >= config_.cow_threshold)) {
      out.kind = LongTermGoal::Kind::kPointGoal;
      out.instance_id = -1;
      out.target_cells = {frames_[best].map_cell};
      out.issued_at = t_;
      return out;
    }
    return std::nullopt;
  }

  GoalSpec eff = effective_goal(goal);
  if (eff.modality == GoalModality::kCategory) return std::nullopt;
  MatchConfig mc = config_.match_config(eff.modality);
  MatchResult match = localize_goal(eff, memory_, mc, fully_explored);
  if (!match.instance_id) return std::nullopt;
  out.kind = LongTermGoal::Kind::kPointGoal;
  out.instance_id = *match.instance_id;
  out.target_cells = memory_.instance(out.instance_id).cells;
  out.issued_at = t_;
  return out;
}

// Full decision: distance field from the agent, frontier extraction,
// localization (with distances for category goals), exploration fallback.
LongTermGoal Agent::full_decide(const GoalSpec& goal, bool& fully_explored_out) {
  AgentState pose = map_pose(state_);
  Cell agent_cell = point_to_cell(pose.position, world_.cell_size_m);
  PlanConfig pc{world_.cell_size_m, config_.inflation_radius};
  DistanceField agent_field = distance_from(map_.obstacle_grid(), agent_cell, pc);
  std::vector<FrontierCluster> clusters = frontiers(map_, agent_field);
  for (auto it = clusters.begin(); it != clusters.end();) {
    if (frontier_blacklist_.count(it->nearest))
      it = clusters.erase(it);
    else
      ++it;
  }
  fully_explored_out = clusters.empty();

  if (auto cheap = try_cheap_match(goal, fully_explored_out)) return *cheap;

  if (variant_ != MethodVariant::kCow) {
    GoalSpec eff = effective_goal(goal);
    if (eff.modality == GoalModality::kCategory) {
      MatchConfig mc = config_.match_config(eff.modality);
      MatchResult match = localize_goal(eff, memory_, mc, fully_explored_out, &agent_field);
      if (match.instance_id) {
        LongTermGoal out;
        out.kind = LongTermGoal::Kind::kPointGoal;
        out.instance_id = *match.instance_id;
        out.target_cells = memory_.instance(out.instance_id).cells;
        out.issued_at = t_;
        return out;
      }
    }
  }

  LongTermGoal out;
  out.issued_at = t_;
  if (!clusters.empty()) {
    out.kind = LongTermGoal::Kind::kExplore;
    out.frontier_cell = clusters.front().nearest;
  }
  return out;
}

bool Agent::near_frontier(const Cell& cell, int radius) const {
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc) {
      Cell f{cell.r + dr, cell.c + dc};
      if (!map_.in_bounds(f) || !map_.explored(f) || map_.obstacle(f)) continue;
      const Cell nbrs[4] = {{f.r - 1, f.c}, {f.r + 1, f.c}, {f.r, f.c - 1}, {f.r, f.c + 1}};
      for (const Cell& nb : nbrs)
        if (map_.in_bounds(nb) && !map_.explored(nb)) return true;
    }
  return false;
}

GoalOutcome Agent::run_goal(const GoalSpec& goal, int goal_index) {
  if (variant_ == MethodVariant::kNoMemory) reset_memory();
  frontier_blacklist_.clear();

  GoalOutcome outcome;
  outcome.start_state = state_;

  GoalSpec eff = effective_goal(goal);
  const double h = world_.cell_size_m;
  PlanConfig pc{h, config_.inflation_radius};
  LocalPolicyConfig lp_point{config_.stop_distance_m, config_.sim.step_size_m,
                             config_.sim.turn_angle_deg};
  LocalPolicyConfig lp_explore{1.5 * config_.sim.step_size_m, config_.sim.step_size_m,
                               config_.sim.turn_angle_deg};

  LongTermGoal long_term;
  std::optional<DistanceField> field;
  BoolGrid planning_obstacles;
  std::unordered_set<Cell, CellHash> path_cells;
  bool need_decide = true;
  bool need_plan = false;
  bool goal_failed = false;
  int stall = 0;
  int sweep_turns = 0;
  int verify_hits = 0;
  int verify_misses = 0;
  const int full_sweep = std::max(1, int(std::lround(360.0 / config_.sim.turn_angle_deg)));

  auto log_step = [&](Action action) {
    trajectory_.push_back({t_, goal_index, state_, action, point_to_cell(state_.position, h),
                           long_term.kind});
  };

  // A panoramic look-around before committing: nearby objects (often right
  // at the previous goal's hand-off point) enter memory before the first
  // decision, and image goals pick up close-range views.
  int start_sweep = full_sweep;

  while (outcome.steps < config_.budget_per_goal && !goal_failed) {
    StepIngest ingest = ingest_observation();

    if (start_sweep > 0) {
      --start_sweep;
      log_step(Action::kTurnLeft);
      state_ = step(world_, state_, Action::kTurnLeft, config_.sim, t_);
      ++t_;
      ++outcome.steps;
      continue;
    }

    bool goal_category_touched = false;
    for (int cat : ingest.touched_categories)
      if (cat == eff.category) goal_category_touched = true;
    if (variant_ == MethodVariant::kCow) goal_category_touched = !frames_.empty();

    // Point goals are committed until reached; person targets track the
    // newest sighting. Exploration re-checks the match on every update of
    // the goal category and dies with its frontier target.
    if (long_term.kind == LongTermGoal::Kind::kPointGoal && long_term.instance_id >= 0) {
      if (!memory_.instances().count(long_term.instance_id)) {
        need_decide = true;  // merged away; re-localize
      } else {
        const ObjectInstance& inst = memory_.instance(long_term.instance_id);
        if (inst.category == world_.person_category() && inst.cells != long_term.target_cells) {
          long_term.target_cells = inst.cells;
          need_plan = true;
        }
        // Category goals re-evaluate "nearest instance" whenever a new
        // instance of the category appears; a closer one discovered en
        // route takes over. Feature matches stay committed until reached.
        if (eff.modality == GoalModality::kCategory)
          for (int cat : ingest.created_categories)
            if (cat == eff.category) need_decide = true;
      }
    } else if (long_term.kind == LongTermGoal::Kind::kExplore) {
      if (goal_category_touched) {
        if (auto match = try_cheap_match(goal, false)) {
          long_term = *match;
          outcome.matched_instance = long_term.instance_id >= 0
                                         ? std::optional<int>(long_term.instance_id)
                                         : std::nullopt;
          need_plan = true;
          sweep_turns = 0;
          verify_hits = verify_misses = 0;
        }
      }
      if (long_term.kind == LongTermGoal::Kind::kExplore &&
          !near_frontier(long_term.frontier_cell, 6)) {
        need_decide = true;  // region around the target is now explored
      }
    }

    if (need_decide) {
      bool fully_explored = false;
      long_term = full_decide(goal, fully_explored);
      if (long_term.kind == LongTermGoal::Kind::kNone) {
        goal_failed = true;
        break;
      }
      if (long_term.kind == LongTermGoal::Kind::kPointGoal)
        outcome.matched_instance = long_term.instance_id >= 0
                                       ? std::optional<int>(long_term.instance_id)
                                       : std::nullopt;
      need_decide = false;
      need_plan = true;
      sweep_turns = 0;
      verify_hits = verify_misses = 0;
    }

    // Replan when a fresh obstacle lands inside the corridor of the path.
    if (!need_plan && field && !ingest.new_obstacles.empty()) {
      int corridor = int(std::lround(config_.replan_corridor_m / h));
      for (const Cell& ob : ingest.new_obstacles) {
        for (int dr = -corridor; dr <= corridor && !need_plan; ++dr)
          for (int dc = -corridor; dc <= corridor; ++dc)
            if (path_cells.count({ob.r + dr, ob.c + dc})) {
              need_plan = true;
              break;
            }
        if (need_plan) break;
      }
    }

    if (need_plan) {
      std::vector<Cell> goal_cells = long_term.kind == LongTermGoal::Kind::kPointGoal
                                         ? long_term.target_cells
                                         : std::vector<Cell>{long_term.frontier_cell};
      planning_obstacles = map_.obstacle_grid();
      Cell agent_cell = point_to_cell(map_pose(state_).position, h);
      field = plan(planning_obstacles, goal_cells, pc, agent_cell);
      need_plan = false;
      path_cells.clear();
      if (field) {
        AgentState pose = map_pose(state_);
        for (const Cell& cell : descent_path(*field, point_to_cell(pose.position, h)))
          path_cells.insert(cell);
      }
    }

    // Turning in place advances time and lets fresh observations clear
    // stale obstacles (a person that moved on, a bad bump mark) instead of
    // spinning through identical decisions.
    auto recovery_turn = [&]() {
      log_step(Action::kTurnLeft);
      state_ = step(world_, state_, Action::kTurnLeft, config_.sim, t_);
      ++t_;
      ++outcome.steps;
    };

    if (!field || (field && !field->reachable(point_to_cell(map_pose(state_).position, h)))) {
      if (long_term.kind == LongTermGoal::Kind::kExplore)
        frontier_blacklist_.insert(long_term.frontier_cell);
      need_decide = true;
      field.reset();
      if (++stall > 24) {
        goal_failed = true;
        continue;
      }
      recovery_turn();
      continue;
    }

    AgentState pose = map_pose(state_);
    bool explore = long_term.kind == LongTermGoal::Kind::kExplore;
    NextAction na = next_action(pose, *field, planning_obstacles, explore ? lp_explore : lp_point);

    if (na.status == StepStatus::kArrived) {
      if (!explore) {
        // Arrival verification: a committed instance can be a phantom left
        // by a one-off misclassified detection. Face the target cells and
        // require a fresh detection of the instance before stopping; a
        // phantom gets no such confirmation and is scrubbed from memory.
        bool verifiable = long_term.instance_id >= 0 &&
                          memory_.instances().count(long_term.instance_id) &&
                          memory_.instance(long_term.instance_id).category !=
                              world_.person_category();
        if (verifiable) {
          const ObjectInstance& inst = memory_.instance(long_term.instance_id);
          Vec2 here = map_pose(state_).position;
          Vec2 target = cell_center(inst.cells.front(), h);
          double best_d = kInf;
          for (const Cell& cell : inst.cells) {
            double d = norm(cell_center(cell, h) - here);
            if (d < best_d) {
              best_d = d;
              target = cell_center(cell, h);
            }
          }
          Vec2 delta = target - here;
          double bearing = std::atan2(delta.y, delta.x) * 180.0 / M_PI;
          double err = std::remainder(bearing - state_.heading, 360.0);
          if (std::abs(err) > config_.sim.fov_deg / 2.0 - config_.sim.turn_angle_deg &&
              best_d > 1e-9) {
            log_step(err > 0 ? Action::kTurnLeft : Action::kTurnRight);
            state_ = step(world_, state_,
                          err > 0 ? Action::kTurnLeft : Action::kTurnRight, config_.sim, t_);
            ++t_;
            ++outcome.steps;
            continue;
          }
          // One observation is not trustworthy either way: a misclassified
          // detection can vouch for a phantom, and a misextraction can hide
          // a real object for a step. Demand two looks before concluding.
          bool seen_now = std::find(ingest.touched_instances.begin(),
                                    ingest.touched_instances.end(),
                                    long_term.instance_id) != ingest.touched_instances.end();
          if (seen_now) {
            ++verify_hits;
            verify_misses = 0;
          } else {
            ++verify_misses;
            verify_hits = 0;
          }
          if (verify_misses >= 2) {
            int ghost_category = inst.category;
            std::vector<Cell> ghost_cells = inst.cells;
            memory_.erase(long_term.instance_id);
            map_.clear_instance_cells(ghost_category, long_term.instance_id, ghost_cells,
                                      /*clear_obstacle=*/false);
            ++outcome.ghosts_erased;
            outcome.matched_instance.reset();
            need_decide = true;
            if (++stall > 24) goal_failed = true;
            continue;
          }
          if (verify_hits < 2) {
            recovery_turn();  // another look from a slightly different angle
            continue;
          }
        }
        log_step(Action::kStop);
        ++outcome.steps;
        ++t_;
        outcome.stopped = true;
        break;
      }
      // at the frontier: sweep in place to uncover it, then move on
      if (near_frontier(long_term.frontier_cell, 6) && sweep_turns < full_sweep) {
        log_step(Action::kTurnLeft);
        state_ = step(world_, state_, Action::kTurnLeft, config_.sim, t_);
        ++t_;
        ++outcome.steps;
        ++sweep_turns;
        continue;
      }
      if (sweep_turns >= full_sweep) frontier_blacklist_.insert(long_term.frontier_cell);
      need_decide = true;
      if (++stall > 60) goal_failed = true;
      continue;
    }
    if (na.status == StepStatus::kUnreachable) {
      if (explore) frontier_blacklist_.insert(long_term.frontier_cell);
      need_decide = true;
      if (++stall > 24) {
        goal_failed = true;
        continue;
      }
      recovery_turn();
      continue;
    }
    stall = 0;

    log_step(na.action);
    AgentState next = step(world_, state_, na.action, config_.sim, t_);
    if (na.action == Action::kForward) {
      double moved = norm(next.position - state_.position);
      if (moved < 1e-9) {
        // bump: the map was wrong about the cell ahead
        Vec2 ahead = pose.position + heading_dir(state_.heading) * config_.sim.step_size_m;
        Cell blocked_cell = point_to_cell(ahead, h);
        if (map_.in_bounds(blocked_cell))
          map_.update({}, {blocked_cell}, {}, point_to_cell(pose.position, h));
        need_plan = true;
      }
      outcome.path_length_m += moved;
    }
    state_ = next;
    ++t_;
    ++outcome.steps;
  }

  outcome.end_state = state_;
  return outcome;
}

}  // namespace goat
