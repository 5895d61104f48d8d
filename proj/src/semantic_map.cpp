#include "goat/semantic_map.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "goat/planner.hpp"

namespace goat {

using nlohmann::json;

SemanticMap::SemanticMap(int category_count, int map_size, double cell_size)
    : categories_(category_count), size_(map_size), cell_size_(cell_size) {
  if (category_count < 1 || map_size < 3) throw MapError("invalid map dimensions");
  data_.assign(size_t(channels()) * map_size * map_size, 0);
  agent_cell_ = {map_size / 2, map_size / 2};
  set(current_channel(), agent_cell_, 1);
}

void SemanticMap::update(const std::vector<MapWrite>& writes, const std::vector<Cell>& obstacle_cells,
                         const std::vector<Cell>& free_cells, const Cell& agent) {
  for (const auto& w : writes) {
    if (w.category < 0 || w.category >= categories_) throw MapError("category out of range");
    auto it = instance_category_.find(w.instance_id);
    if (it != instance_category_.end() && it->second != w.category)
      throw MapError("instance " + std::to_string(w.instance_id) + " written with mismatched category");
    instance_category_[w.instance_id] = w.category;
  }

  // Cells observed free this step lose their obstacle bit (and any instance
  // id recorded there); explored bits are never cleared.
  for (const Cell& cell : free_cells) {
    if (!in_bounds(cell)) continue;
    set(obstacle_channel(), cell, 0);
    set(explored_channel(), cell, 1);
  }
  for (const Cell& cell : obstacle_cells) {
    if (!in_bounds(cell)) continue;
    set(obstacle_channel(), cell, 1);
    set(explored_channel(), cell, 1);
  }
  for (const auto& w : writes)
    for (const Cell& cell : w.cells) {
      if (!in_bounds(cell)) continue;
      set(w.category, cell, w.instance_id);
      set(obstacle_channel(), cell, 1);
      set(explored_channel(), cell, 1);
    }

  if (!in_bounds(agent)) throw MapError("agent outside map");
  set(current_channel(), agent_cell_, 0);
  set(current_channel(), agent, 1);
  set(past_channel(), agent, 1);
  set(explored_channel(), agent, 1);
  agent_cell_ = agent;
}

void SemanticMap::clear_instance_cells(int category, int instance_id, const std::vector<Cell>& cells,
                                       bool clear_obstacle) {
  for (const Cell& cell : cells) {
    if (!in_bounds(cell)) continue;
    if (at(category, cell) == instance_id) {
      set(category, cell, 0);
      if (clear_obstacle) set(obstacle_channel(), cell, 0);
    }
  }
}

BoolGrid SemanticMap::obstacle_grid() const {
  BoolGrid out(size_, size_);
  for (int r = 0; r < size_; ++r)
    for (int c = 0; c < size_; ++c) out.set({r, c}, at(obstacle_channel(), {r, c}) != 0);
  return out;
}

BoolGrid SemanticMap::explored_grid() const {
  BoolGrid out(size_, size_);
  for (int r = 0; r < size_; ++r)
    for (int c = 0; c < size_; ++c) out.set({r, c}, at(explored_channel(), {r, c}) != 0);
  return out;
}

void SemanticMap::save(const std::string& path) const {
  json header{{"version", 1}, {"kind", "semantic_map"}, {"K", channels()}, {"M", size_},
              {"C", categories_}, {"cell_size", cell_size_},
              {"agent", {agent_cell_.r, agent_cell_.c}}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MapError("cannot write " + path);
  out << header.dump() << "\n";
  for (int32_t v : data_) {
    unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF),
                              static_cast<unsigned char>((v >> 16) & 0xFF),
                              static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
  if (!out) throw MapError("write failed for " + path);
}

SemanticMap SemanticMap::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapError("cannot open " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw MapError("missing snapshot header");
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw MapError(std::string("bad snapshot header: ") + e.what());
  }
  if (header.value("version", 0) != 1) throw MapError("unsupported snapshot version");
  SemanticMap map(header.at("C").get<int>(), header.at("M").get<int>(),
                  header.at("cell_size").get<double>());
  if (header.contains("agent"))
    map.agent_cell_ = {header["agent"][0].get<int>(), header["agent"][1].get<int>()};
  for (int32_t& v : map.data_) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw MapError("truncated snapshot payload");
    v = int32_t(uint32_t(bytes[0]) | (uint32_t(bytes[1]) << 8) | (uint32_t(bytes[2]) << 16) |
                (uint32_t(bytes[3]) << 24));
  }
  return map;
}

std::vector<FrontierCluster> frontiers(const SemanticMap& map, const DistanceField& from_agent) {
  const int n = map.size();
  BoolGrid frontier(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      Cell cell{r, c};
      if (!map.explored(cell) || map.obstacle(cell)) continue;
      const Cell nbrs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const Cell& nb : nbrs)
        if (map.in_bounds(nb) && !map.explored(nb)) {
          frontier.set(cell, true);
          break;
        }
    }

  // 8-connected clustering.
  std::vector<FrontierCluster> clusters;
  BoolGrid seen(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      Cell seed{r, c};
      if (!frontier.at(seed) || seen.at(seed)) continue;
      FrontierCluster cluster;
      std::deque<Cell> queue{seed};
      seen.set(seed, true);
      while (!queue.empty()) {
        Cell cur = queue.front();
        queue.pop_front();
        cluster.cells.push_back(cur);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            Cell nb{cur.r + dr, cur.c + dc};
            if ((dr || dc) && frontier.in_bounds(nb) && frontier.at(nb) && !seen.at(nb)) {
              seen.set(nb, true);
              queue.push_back(nb);
            }
          }
      }
      double best = kInf;
      for (const Cell& cell : cluster.cells)
        if (from_agent.reachable(cell) && from_agent.at(cell) < best) {
          best = from_agent.at(cell);
          cluster.nearest = cell;
        }
      if (best == kInf) continue;  // unreachable cluster
      cluster.distance_m = best;
      clusters.push_back(std::move(cluster));
    }
  std::sort(clusters.begin(), clusters.end(),
            [](const FrontierCluster& a, const FrontierCluster& b) {
              if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
              return a.nearest < b.nearest;
            });
  return clusters;
}

}  // namespace goat
