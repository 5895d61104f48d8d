#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "goat/features.hpp"
#include "goat/geometry.hpp"

namespace goat {

struct WorldObject {
  int id = 0;
  int category = 0;
  std::vector<Cell> footprint;
  bool reflective = false;

  Feature latent_feature() const { return object_latent(id, category); }
  Feature context_feature() const { return object_context(id); }
};

// Scripted person walking a waypoint loop while active in [t0, t1).
struct DynamicAgent {
  std::vector<Cell> waypoints;
  int active_from = 0;
  int active_until = 0;  // exclusive; <=0 means never active
  int footprint_radius = 1;

  bool active_at(int t) const { return t >= active_from && t < active_until; }
  std::optional<Cell> center_at(int t) const {
    if (!active_at(t) || waypoints.empty()) return std::nullopt;
    return waypoints[size_t(t - active_from) % waypoints.size()];
  }
  std::vector<Cell> cells_at(int t) const;
};

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldSpec {
  BoolGrid grid;  // true = static obstacle
  double cell_size_m = 0.05;
  std::vector<WorldObject> objects;
  std::vector<DynamicAgent> persons;
  int category_count = 1;  // last index is reserved for PERSON
  Cell start;              // agent start cell (defaults to grid center)

  int person_category() const { return category_count - 1; }

  const WorldObject* object_by_id(int id) const;
  bool static_obstacle(const Cell& cell) const;
  // Static obstacles plus object footprints (persons handled per step).
  const BoolGrid& blocked_grid() const { return blocked_; }
  const std::unordered_map<Cell, int, CellHash>& object_cell_index() const { return cell_to_object_; }

  void finalize();  // builds caches, validates invariants (throws WorldError)

 private:
  BoolGrid blocked_;
  std::unordered_map<Cell, int, CellHash> cell_to_object_;
};

WorldSpec load_world(const std::string& path);
WorldSpec parse_world_json(const std::string& text);
std::string world_to_json(const WorldSpec& world);

}  // namespace goat
