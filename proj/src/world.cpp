#include "goat/world.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace goat {

using nlohmann::json;

std::vector<Cell> DynamicAgent::cells_at(int t) const {
  std::vector<Cell> out;
  auto center = center_at(t);
  if (!center) return out;
  for (int dr = -footprint_radius; dr <= footprint_radius; ++dr)
    for (int dc = -footprint_radius; dc <= footprint_radius; ++dc)
      out.push_back({center->r + dr, center->c + dc});
  return out;
}

const WorldObject* WorldSpec::object_by_id(int id) const {
  for (const auto& obj : objects)
    if (obj.id == id) return &obj;
  return nullptr;
}

bool WorldSpec::static_obstacle(const Cell& cell) const {
  return !grid.in_bounds(cell) || grid.at(cell);
}

void WorldSpec::finalize() {
  if (grid.rows < 3 || grid.cols < 3) throw WorldError("world grid too small");
  if (category_count < 2) throw WorldError("category_count must be >= 2 (last index is PERSON)");
  if (start.r == 0 && start.c == 0) start = {grid.rows / 2, grid.cols / 2};
  if (!grid.in_bounds(start) || grid.at(start)) throw WorldError("start cell is not free");

  blocked_ = grid;
  cell_to_object_.clear();
  std::unordered_map<int, bool> ids;
  for (const auto& obj : objects) {
    if (ids.count(obj.id)) throw WorldError("duplicate object id " + std::to_string(obj.id));
    ids[obj.id] = true;
    if (obj.category < 0 || obj.category >= person_category())
      throw WorldError("object " + std::to_string(obj.id) + " has invalid category " +
                       std::to_string(obj.category));
    if (obj.footprint.empty() || !is_4_connected(obj.footprint))
      throw WorldError("object " + std::to_string(obj.id) + " footprint empty or not 4-connected");
    for (const Cell& cell : obj.footprint) {
      if (!grid.in_bounds(cell) || grid.at(cell))
        throw WorldError("object " + std::to_string(obj.id) + " footprint on obstacle cell");
      if (cell_to_object_.count(cell))
        throw WorldError("object " + std::to_string(obj.id) + " overlaps object " +
                         std::to_string(cell_to_object_[cell]));
      cell_to_object_[cell] = obj.id;
      blocked_.set(cell, true);
    }
  }
  for (size_t p = 0; p < persons.size(); ++p)
    for (const Cell& w : persons[p].waypoints)
      if (!grid.in_bounds(w) || grid.at(w))
        throw WorldError("person " + std::to_string(p) + " waypoint on obstacle cell");
}

static WorldSpec world_from_json(const json& j) {
  WorldSpec world;
  const auto& cells = j.at("cells");
  world.grid.rows = int(cells.size());
  world.grid.cols = world.grid.rows > 0 ? int(cells[0].size()) : 0;
  world.grid.data.assign(size_t(world.grid.rows) * world.grid.cols, 0);
  for (int r = 0; r < world.grid.rows; ++r) {
    if (int(cells[r].size()) != world.grid.cols) throw WorldError("ragged cell rows");
    for (int c = 0; c < world.grid.cols; ++c)
      world.grid.set({r, c}, cells[r][c].get<int>() != 0);
  }
  world.cell_size_m = j.value("cell_size_m", 0.05);
  int max_cat = -1;
  for (const auto& jo : j.value("objects", json::array())) {
    WorldObject obj;
    obj.id = jo.at("id").get<int>();
    obj.category = jo.at("category").get<int>();
    obj.reflective = jo.value("reflective", false);
    for (const auto& jc : jo.at("footprint")) obj.footprint.push_back({jc[0].get<int>(), jc[1].get<int>()});
    max_cat = std::max(max_cat, obj.category);
    world.objects.push_back(std::move(obj));
  }
  for (const auto& jp : j.value("persons", json::array())) {
    DynamicAgent person;
    for (const auto& jc : jp.at("waypoints")) person.waypoints.push_back({jc[0].get<int>(), jc[1].get<int>()});
    if (jp.contains("active")) {
      person.active_from = jp["active"][0].get<int>();
      person.active_until = jp["active"][1].get<int>();
    }
    world.persons.push_back(std::move(person));
  }
  world.category_count = j.value("category_count", max_cat + 2);
  if (j.contains("start")) world.start = {j["start"][0].get<int>(), j["start"][1].get<int>()};
  world.finalize();
  return world;
}

WorldSpec parse_world_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw WorldError(std::string("world parse error: ") + e.what());
  }
  return world_from_json(j);
}

WorldSpec load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WorldError("cannot open world file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_world_json(ss.str());
}

std::string world_to_json(const WorldSpec& world) {
  json j;
  j["cell_size_m"] = world.cell_size_m;
  j["category_count"] = world.category_count;
  j["start"] = {world.start.r, world.start.c};
  json rows = json::array();
  for (int r = 0; r < world.grid.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < world.grid.cols; ++c) row.push_back(world.grid.at({r, c}) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  j["cells"] = std::move(rows);
  j["objects"] = json::array();
  for (const auto& obj : world.objects) {
    json jo{{"id", obj.id}, {"category", obj.category}, {"reflective", obj.reflective}};
    jo["footprint"] = json::array();
    for (const Cell& cell : obj.footprint) jo["footprint"].push_back({cell.r, cell.c});
    j["objects"].push_back(std::move(jo));
  }
  j["persons"] = json::array();
  for (const auto& person : world.persons) {
    json jp;
    jp["waypoints"] = json::array();
    for (const Cell& w : person.waypoints) jp["waypoints"].push_back({w.r, w.c});
    jp["active"] = {person.active_from, person.active_until};
    j["persons"].push_back(std::move(jp));
  }
  return j.dump(1);
}

}  // namespace goat
