#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "goat/geometry.hpp"

namespace goat {

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One associated detection ready to be written into the map.
struct MapWrite {
  std::vector<Cell> cells;
  int category = 0;
  int instance_id = 0;
};

// K x M x M integer map, K = C + 4. Channels [0, C) hold instance ids per
// category; then obstacles, explored, current location, past locations.
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(int category_count, int map_size, double cell_size = 0.05);

  int categories() const { return categories_; }
  int channels() const { return categories_ + 4; }
  int size() const { return size_; }
  double cell_size() const { return cell_size_; }

  int obstacle_channel() const { return categories_; }
  int explored_channel() const { return categories_ + 1; }
  int current_channel() const { return categories_ + 2; }
  int past_channel() const { return categories_ + 3; }

  int32_t at(int channel, const Cell& cell) const { return data_[index(channel, cell)]; }
  void set(int channel, const Cell& cell, int32_t value) { data_[index(channel, cell)] = value; }
  bool in_bounds(const Cell& cell) const {
    return cell.r >= 0 && cell.r < size_ && cell.c >= 0 && cell.c < size_;
  }

  bool obstacle(const Cell& cell) const { return at(obstacle_channel(), cell) != 0; }
  bool explored(const Cell& cell) const { return at(explored_channel(), cell) != 0; }
  Cell agent_cell() const { return agent_cell_; }

  // Applies one step of observations: instance writes, newly observed
  // obstacle cells, cells observed free (obstacle bit cleared), and the
  // agent pose. Explored bits are only ever set, never cleared.
  void update(const std::vector<MapWrite>& writes, const std::vector<Cell>& obstacle_cells,
              const std::vector<Cell>& free_cells, const Cell& agent);

  // Removes an instance's cells from its category channel (and optionally
  // the obstacle bit). Used when dynamic instances move.
  void clear_instance_cells(int category, int instance_id, const std::vector<Cell>& cells,
                            bool clear_obstacle);

  BoolGrid obstacle_grid() const;
  BoolGrid explored_grid() const;

  const std::vector<int32_t>& raw() const { return data_; }
  const std::unordered_map<int, int>& instance_categories() const { return instance_category_; }

  void save(const std::string& path) const;
  static SemanticMap load(const std::string& path);

  bool operator==(const SemanticMap& o) const {
    return categories_ == o.categories_ && size_ == o.size_ && cell_size_ == o.cell_size_ &&
           data_ == o.data_;
  }

 private:
  size_t index(int channel, const Cell& cell) const {
    return (size_t(channel) * size_ + cell.r) * size_ + cell.c;
  }

  int categories_ = 0;
  int size_ = 0;
  double cell_size_ = 0.05;
  Cell agent_cell_;
  std::vector<int32_t> data_;
  std::unordered_map<int, int> instance_category_;
};

struct FrontierCluster {
  std::vector<Cell> cells;   // 8-connected frontier cells
  Cell nearest;              // cluster cell closest to the agent
  double distance_m = 0.0;   // geodesic distance from the agent to `nearest`
};

class DistanceField;  // planner.hpp

// Frontier cells are explored, non-obstacle cells 4-adjacent to unexplored
// space. Clusters are 8-connected components ordered by ascending distance;
// clusters unreachable in `from_agent` are dropped.
std::vector<FrontierCluster> frontiers(const SemanticMap& map, const DistanceField& from_agent);

}  // namespace goat
