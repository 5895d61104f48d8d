#include "goat/sim.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace goat {

std::vector<Cell> person_cells_at(const WorldSpec& world, int t) {
  std::vector<Cell> out;
  for (const auto& person : world.persons)
    for (const Cell& cell : person.cells_at(t))
      if (world.grid.in_bounds(cell)) out.push_back(cell);
  return out;
}

RayHit raycast(const WorldSpec& world, const Vec2& origin, const Vec2& dir, double max_range,
               const std::vector<Cell>& extra_blocked) {
  const double h = world.cell_size_m;
  const BoolGrid& blocked = world.blocked_grid();
  std::unordered_set<Cell, CellHash> extra(extra_blocked.begin(), extra_blocked.end());

  // Amanatides-Woo voxel traversal.
  Cell cell = point_to_cell(origin, h);
  int step_c = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  int step_r = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  double t_max_x = std::numeric_limits<double>::infinity();
  double t_max_y = std::numeric_limits<double>::infinity();
  double t_delta_x = std::numeric_limits<double>::infinity();
  double t_delta_y = std::numeric_limits<double>::infinity();
  if (step_c != 0) {
    double next_x = (cell.c + (step_c > 0 ? 1 : 0)) * h;
    t_max_x = (next_x - origin.x) / dir.x;
    t_delta_x = h / std::abs(dir.x);
  }
  if (step_r != 0) {
    double next_y = (cell.r + (step_r > 0 ? 1 : 0)) * h;
    t_max_y = (next_y - origin.y) / dir.y;
    t_delta_y = h / std::abs(dir.y);
  }

  double t = 0.0;
  while (t <= max_range) {
    if (!blocked.in_bounds(cell)) return {t, true, cell, -1};
    bool is_blocked = blocked.at(cell) || extra.count(cell);
    if (is_blocked && t > 0.0) {
      int obj_id = -1;
      auto it = world.object_cell_index().find(cell);
      if (it != world.object_cell_index().end())
        obj_id = it->second;
      else if (!world.grid.at(cell))
        obj_id = -2;  // person
      return {t, true, cell, obj_id};
    }
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      cell.c += step_c;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      cell.r += step_r;
    }
  }
  return {max_range, false, {}, -1};
}

AgentState step(const WorldSpec& world, const AgentState& state, Action action,
                const SimConfig& config, int t) {
  AgentState next = state;
  switch (action) {
    case Action::kTurnLeft:
      next.heading = wrap_heading(state.heading + config.turn_angle_deg);
      return next;
    case Action::kTurnRight:
      next.heading = wrap_heading(state.heading - config.turn_angle_deg);
      return next;
    case Action::kStop:
      return next;
    case Action::kForward: {
      Vec2 dir = heading_dir(state.heading);
      std::vector<Cell> persons = person_cells_at(world, t);
      RayHit hit = raycast(world, state.position, dir, config.step_size_m + world.cell_size_m, persons);
      // Keep half a cell of clearance so the agent center stays in free space.
      if (hit.hit && hit.distance < config.step_size_m + world.cell_size_m * 0.5) return next;
      next.position = state.position + dir * config.step_size_m;
      return next;
    }
  }
  return next;
}

static double ray_angle(const SimConfig& config, int i) {
  if (config.num_rays == 1) return 0.0;
  return config.fov_deg / 2.0 - config.fov_deg * double(i) / double(config.num_rays - 1);
}

Observation observe(const WorldSpec& world, const AgentState& state, const SimConfig& config,
                    uint64_t seed, int t) {
  Observation obs;
  obs.pose = state;
  obs.timestamp = t;
  Rng rng(hash_mix(seed, uint64_t(t), 0x0B5EULL));

  std::vector<Cell> persons = person_cells_at(world, t);
  std::unordered_map<Cell, int, CellHash> person_index;
  for (size_t p = 0; p < world.persons.size(); ++p)
    for (const Cell& cell : world.persons[p].cells_at(t)) person_index[cell] = int(p);

  // Per-step affine distortion of the relative depth channel.
  double a_true = rng.uniform(0.5, 2.0);
  double b_true = rng.uniform(-0.5, 0.5);

  obs.depth.reserve(config.num_rays);
  for (int i = 0; i < config.num_rays; ++i) {
    Vec2 dir = heading_dir(state.heading + ray_angle(config, i));
    RayHit hit = raycast(world, state.position, dir, config.max_range_m, persons);
    DepthRay ray;
    ray.true_range_m = hit.hit ? hit.distance : config.max_range_m;
    ray.range_m = std::max(0.01, ray.true_range_m + rng.gaussian(0.0, config.sigma_depth));
    ray.estimate = a_true * ray.true_range_m + b_true + rng.gaussian(0.0, config.sigma_depth);
    if (hit.hit && hit.object_id >= 0) {
      const WorldObject* obj = world.object_by_id(hit.object_id);
      if (obj && obj->reflective && rng.bernoulli(config.p_drop)) ray.dropped = true;
    }
    obs.depth.push_back(ray);
  }

  // Visibility: a footprint cell is visible if it is in range, inside the
  // FOV, and the ray to its center hits that exact cell first.
  const double h = world.cell_size_m;
  auto cell_visible = [&](const Cell& cell) -> std::optional<Vec2> {
    Vec2 center = cell_center(cell, h);
    Vec2 delta = center - state.position;
    double dist = norm(delta);
    if (dist < 1e-9) return Vec2{0.0, 0.0};
    if (dist > config.max_range_m) return std::nullopt;
    double bearing = std::atan2(delta.y, delta.x) * 180.0 / M_PI;
    double rel = std::remainder(bearing - state.heading, 360.0);
    if (std::abs(rel) > config.fov_deg / 2.0 + 1e-9) return std::nullopt;
    Vec2 dir = delta * (1.0 / dist);
    RayHit hit = raycast(world, state.position, dir, config.max_range_m, persons);
    if (!hit.hit || hit.cell != cell) return std::nullopt;
    return rotate(delta, -state.heading);
  };

  auto emit_detection = [&](const std::vector<Cell>& footprint, int category, const Feature& latent,
                            const Feature& context, int true_id) {
    std::vector<Vec2> visible;
    double min_dist = config.max_range_m;
    for (const Cell& cell : footprint) {
      auto ego = cell_visible(cell);
      if (ego) {
        visible.push_back(*ego);
        min_dist = std::min(min_dist, norm(*ego));
      }
    }
    if (visible.empty()) return;
    if (rng.bernoulli(config.p_miss)) return;
    Detection det;
    det.visible_points = std::move(visible);
    det.category_observed = category;
    if (rng.bernoulli(config.p_misclass) && world.person_category() > 1) {
      int other = int(rng.uniform_int(uint64_t(world.person_category() - 1)));
      if (other >= category) ++other;
      det.category_observed = std::min(other, world.person_category() - 1);
    }
    det.distance_m = min_dist;
    det.true_object_id = true_id;
    det.view_bbox = perturbed(latent, config.sigma_view, rng);
    det.view_bbox_pad = blend(det.view_bbox, context, config.pad_context_weight);
    det.view_full = blend(det.view_bbox, context, config.full_context_weight);
    obs.detections.push_back(std::move(det));
  };

  for (const auto& obj : world.objects)
    emit_detection(obj.footprint, obj.category, obj.latent_feature(), obj.context_feature(), obj.id);

  for (size_t p = 0; p < world.persons.size(); ++p) {
    std::vector<Cell> cells = world.persons[p].cells_at(t);
    if (cells.empty()) continue;
    // Persons keep their true category; only real objects get confused.
    std::vector<Vec2> visible;
    double min_dist = config.max_range_m;
    for (const Cell& cell : cells) {
      auto ego = cell_visible(cell);
      if (ego) {
        visible.push_back(*ego);
        min_dist = std::min(min_dist, norm(*ego));
      }
    }
    if (visible.empty()) continue;
    Detection det;
    det.visible_points = std::move(visible);
    det.category_observed = world.person_category();
    det.distance_m = min_dist;
    det.true_object_id = -2 - int(p);
    Feature latent = object_latent(100000 + int(p), world.person_category());
    det.view_bbox = perturbed(latent, config.sigma_view, rng);
    det.view_bbox_pad = det.view_bbox;
    det.view_full = det.view_bbox;
    obs.detections.push_back(std::move(det));
  }

  return obs;
}

}  // namespace goat
