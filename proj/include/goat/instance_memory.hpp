#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "goat/features.hpp"
#include "goat/geometry.hpp"

namespace goat {

struct ViewRecord {
  Feature feature_bbox;
  Feature feature_bbox_pad;
  Feature feature_full;
  double distance_m = 0.0;
  int step = 0;
};

struct ObjectInstance {
  int id = 0;
  int category = 0;
  std::vector<Cell> cells;  // sorted, unique
  std::vector<ViewRecord> views;
  int last_seen = 0;
};

class MemoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Clusters detections across time into object instances: a detection joins
// every existing instance of the same category whose cells intersect the
// detection's p-dilated footprint; multiple hits merge into the lowest id.
class InstanceMemory {
 public:
  explicit InstanceMemory(int dilation = 3) : dilation_(dilation) {}

  int dilation() const { return dilation_; }
  const std::map<int, ObjectInstance>& instances() const { return instances_; }
  size_t size() const { return instances_.size(); }
  int total_views() const;

  // Returns the instance id the detection was absorbed into (possibly new).
  int associate(const std::vector<Cell>& detection_cells, int category, const ViewRecord& view);

  const ObjectInstance& instance(int id) const;
  const std::vector<ViewRecord>& views_of(int id) const;
  std::vector<int> instances_by_category(int category) const;

  // Replaces an instance's footprint (dynamic objects that moved).
  void replace_cells(int id, const std::vector<Cell>& cells);

  // Drops an instance entirely (e.g. a spurious detection disproved by a
  // close-up look). Unknown ids throw.
  void erase(int id);

  std::string dump_json() const;
  static InstanceMemory from_json(const std::string& text);
  void save(const std::string& path) const;
  static InstanceMemory load(const std::string& path);

 private:
  int dilation_ = 3;
  int next_id_ = 1;
  std::map<int, ObjectInstance> instances_;
};

}  // namespace goat
