#include "goat/instance_memory.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace goat {

using nlohmann::json;

int InstanceMemory::total_views() const {
  int n = 0;
  for (const auto& [id, inst] : instances_) n += int(inst.views.size());
  return n;
}

static void merge_cells(std::vector<Cell>& into, const std::vector<Cell>& from) {
  into.insert(into.end(), from.begin(), from.end());
  std::sort(into.begin(), into.end());
  into.erase(std::unique(into.begin(), into.end()), into.end());
}

int InstanceMemory::associate(const std::vector<Cell>& detection_cells, int category,
                              const ViewRecord& view) {
  if (detection_cells.empty()) throw MemoryError("empty detection footprint");
  std::vector<Cell> dilated = dilate_chebyshev(detection_cells, dilation_);
  std::unordered_set<Cell, CellHash> dilated_set(dilated.begin(), dilated.end());

  std::vector<int> matches;
  for (const auto& [id, inst] : instances_) {
    if (inst.category != category) continue;
    for (const Cell& cell : inst.cells)
      if (dilated_set.count(cell)) {
        matches.push_back(id);
        break;
      }
  }

  if (matches.empty()) {
    ObjectInstance inst;
    inst.id = next_id_++;
    inst.category = category;
    inst.cells = detection_cells;
    std::sort(inst.cells.begin(), inst.cells.end());
    inst.cells.erase(std::unique(inst.cells.begin(), inst.cells.end()), inst.cells.end());
    inst.views.push_back(view);
    inst.last_seen = view.step;
    int id = inst.id;
    instances_.emplace(id, std::move(inst));
    return id;
  }

  // All matched instances collapse into the lowest id, then absorb the
  // detection. Views are concatenated in ascending donor-id order.
  int target = *std::min_element(matches.begin(), matches.end());
  ObjectInstance& inst = instances_.at(target);
  std::sort(matches.begin(), matches.end());
  for (int id : matches) {
    if (id == target) continue;
    ObjectInstance& donor = instances_.at(id);
    merge_cells(inst.cells, donor.cells);
    inst.views.insert(inst.views.end(), donor.views.begin(), donor.views.end());
    inst.last_seen = std::max(inst.last_seen, donor.last_seen);
    instances_.erase(id);
  }
  merge_cells(inst.cells, detection_cells);
  inst.views.push_back(view);
  inst.last_seen = std::max(inst.last_seen, view.step);
  return target;
}

const ObjectInstance& InstanceMemory::instance(int id) const {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw MemoryError("unknown instance id " + std::to_string(id));
  return it->second;
}

const std::vector<ViewRecord>& InstanceMemory::views_of(int id) const { return instance(id).views; }

std::vector<int> InstanceMemory::instances_by_category(int category) const {
  std::vector<int> out;
  for (const auto& [id, inst] : instances_)
    if (inst.category == category) out.push_back(id);
  return out;  // std::map iteration is already ascending
}

void InstanceMemory::replace_cells(int id, const std::vector<Cell>& cells) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw MemoryError("unknown instance id " + std::to_string(id));
  it->second.cells = cells;
  std::sort(it->second.cells.begin(), it->second.cells.end());
}

void InstanceMemory::erase(int id) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw MemoryError("unknown instance id " + std::to_string(id));
  instances_.erase(it);
}

static json feature_to_json(const Feature& f) { return json(f); }

std::string InstanceMemory::dump_json() const {
  json j;
  j["dilation"] = dilation_;
  j["next_id"] = next_id_;
  j["instances"] = json::array();
  for (const auto& [id, inst] : instances_) {
    json ji{{"id", inst.id}, {"category", inst.category}, {"last_seen", inst.last_seen}};
    ji["cells"] = json::array();
    for (const Cell& cell : inst.cells) ji["cells"].push_back({cell.r, cell.c});
    ji["views"] = json::array();
    for (const ViewRecord& v : inst.views)
      ji["views"].push_back(json{{"bbox", feature_to_json(v.feature_bbox)},
                                 {"bbox_pad", feature_to_json(v.feature_bbox_pad)},
                                 {"full", feature_to_json(v.feature_full)},
                                 {"distance", v.distance_m},
                                 {"step", v.step}});
    j["instances"].push_back(std::move(ji));
  }
  return j.dump();
}

InstanceMemory InstanceMemory::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw MemoryError(std::string("memory dump parse error: ") + e.what());
  }
  InstanceMemory mem(j.value("dilation", 3));
  mem.next_id_ = j.value("next_id", 1);
  for (const auto& ji : j.value("instances", json::array())) {
    ObjectInstance inst;
    inst.id = ji.at("id").get<int>();
    inst.category = ji.at("category").get<int>();
    inst.last_seen = ji.value("last_seen", 0);
    for (const auto& jc : ji.at("cells")) inst.cells.push_back({jc[0].get<int>(), jc[1].get<int>()});
    for (const auto& jv : ji.value("views", json::array())) {
      ViewRecord v;
      v.feature_bbox = jv.at("bbox").get<Feature>();
      v.feature_bbox_pad = jv.at("bbox_pad").get<Feature>();
      v.feature_full = jv.at("full").get<Feature>();
      v.distance_m = jv.value("distance", 0.0);
      v.step = jv.value("step", 0);
      inst.views.push_back(std::move(v));
    }
    mem.next_id_ = std::max(mem.next_id_, inst.id + 1);
    mem.instances_.emplace(inst.id, std::move(inst));
  }
  return mem;
}

void InstanceMemory::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MemoryError("cannot write " + path);
  out << dump_json();
}

InstanceMemory InstanceMemory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MemoryError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace goat
