// Python bindings for the navigation core: world loading, episode
// evaluation, the matching benchmark, planning, and an embodied Agent.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "goat/eval.hpp"
#include "goat/matching.hpp"
#include "goat/perception.hpp"

namespace py = pybind11;
using namespace goat;

namespace {

GoalModality modality_from_string(const std::string& name) {
  if (name == "category") return GoalModality::kCategory;
  if (name == "image") return GoalModality::kImage;
  if (name == "language") return GoalModality::kLanguage;
  throw std::invalid_argument("unknown modality: " + name);
}

py::dict row_to_dict(const ResultRow& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["goal_index"] = r.goal_index;
  d["modality"] = to_string(r.modality);
  d["success"] = r.success;
  d["steps"] = r.steps;
  d["path_m"] = r.path_m;
  d["geodesic_m"] = r.geodesic_m;
  d["spl"] = r.spl;
  return d;
}

ResultRow row_from_dict(const py::dict& d) {
  ResultRow r;
  r.episode = d["episode"].cast<int>();
  r.goal_index = d["goal_index"].cast<int>();
  r.modality = modality_from_string(d["modality"].cast<std::string>());
  r.success = d["success"].cast<bool>();
  r.steps = d["steps"].cast<int>();
  r.path_m = d["path_m"].cast<double>();
  r.geodesic_m = d["geodesic_m"].cast<double>();
  r.spl = d["spl"].cast<double>();
  return r;
}

std::vector<ResultRow> rows_from_list(const py::list& rows) {
  std::vector<ResultRow> out;
  for (const auto& item : rows) out.push_back(row_from_dict(item.cast<py::dict>()));
  return out;
}

py::list suite_rows(const WorldSpec& world, const std::string& method, int episodes,
                    uint64_t seed) {
  EpisodeConfig config;
  auto results = run_suite(world, variant_from_string(method), episodes, seed, config);
  py::list out;
  for (const ResultRow& r : flatten(results)) out.append(row_to_dict(r));
  return out;
}

GoalSpec goal_from_args(const std::string& modality, int category,
                        const std::vector<double>& feature) {
  GoalSpec goal;
  goal.modality = modality_from_string(modality);
  goal.category = category;
  goal.goal_feature = feature;
  return goal;
}

}  // namespace

PYBIND11_MODULE(goatnav, m) {
  m.doc() = "Lifelong multimodal navigation on a deterministic 2D gridworld";

  py::class_<WorldSpec>(m, "World")
      .def_property_readonly("rows", [](const WorldSpec& w) { return w.grid.rows; })
      .def_property_readonly("cols", [](const WorldSpec& w) { return w.grid.cols; })
      .def_property_readonly("cell_size_m", [](const WorldSpec& w) { return w.cell_size_m; })
      .def_property_readonly("category_count", [](const WorldSpec& w) { return w.category_count; })
      .def_property_readonly("object_count", [](const WorldSpec& w) { return w.objects.size(); })
      .def_property_readonly("person_count", [](const WorldSpec& w) { return w.persons.size(); });

  m.def("load_world", &load_world, py::arg("path"), "Load a world fixture from JSON.");
  m.def("parse_world_json", &parse_world_json, py::arg("text"));

  py::class_<GoalOutcome>(m, "GoalOutcome")
      .def_readonly("stopped", &GoalOutcome::stopped)
      .def_readonly("steps", &GoalOutcome::steps)
      .def_readonly("path_length_m", &GoalOutcome::path_length_m)
      .def_readonly("matched_instance", &GoalOutcome::matched_instance);

  py::class_<Agent>(m, "Agent")
      .def(py::init([](const WorldSpec& world, const std::string& method, uint64_t seed) {
             EpisodeConfig config;
             return new Agent(world, variant_from_string(method), config, seed);
           }),
           py::arg("world"), py::arg("method") = "goat", py::arg("seed") = 0,
           py::keep_alive<1, 2>())
      .def(
          "run_goal",
          [](Agent& agent, const std::string& modality, int category,
             const std::vector<double>& feature, int goal_index) {
            return agent.run_goal(goal_from_args(modality, category, feature), goal_index);
          },
          py::arg("modality"), py::arg("category") = 0,
          py::arg("feature") = std::vector<double>{}, py::arg("goal_index") = 0)
      .def_property_readonly("time", &Agent::time)
      .def_property_readonly("instance_count", [](const Agent& a) { return a.memory().size(); })
      .def("trajectory_cells", [](const Agent& a) {
        py::list out;
        for (const TrajectoryStep& s : a.trajectory())
          out.append(py::make_tuple(s.t, s.goal_index, s.world_cell.r, s.world_cell.c));
        return out;
      });

  m.def("run_suite", &suite_rows, py::arg("world"), py::arg("method") = "goat",
        py::arg("episodes") = 1, py::arg("seed") = 0,
        "Run seeded evaluation episodes; returns flat result rows as dicts.");
  m.def(
      "results_csv", [](const py::list& rows) { return results_csv(rows_from_list(rows)); },
      py::arg("rows"));
  m.def(
      "results_json", [](const py::list& rows) { return results_json(rows_from_list(rows)); },
      py::arg("rows"));
  m.def(
      "report_json", [](const py::list& rows) { return report_json(rows_from_list(rows)); },
      py::arg("rows"));

  m.def(
      "infill_depth",
      [](const std::vector<double>& sensed, const std::vector<bool>& dropped,
         const std::vector<double>& estimate) {
        InfillResult r = infill_depth(sensed, dropped, estimate);
        py::dict d;
        d["depth"] = r.depth;
        if (r.grounding) {
          d["scale"] = r.grounding->scale;
          d["offset"] = r.grounding->offset;
        }
        return d;
      },
      py::arg("sensed"), py::arg("dropped"), py::arg("estimate"),
      "Least-squares depth grounding and dropout infill.");

  m.def(
      "distance_field",
      [](const std::vector<std::vector<bool>>& obstacles,
         const std::vector<std::pair<int, int>>& goal_cells, double cell_size,
         int inflation_radius) -> std::optional<std::vector<std::vector<double>>> {
        int rows = int(obstacles.size());
        int cols = rows ? int(obstacles[0].size()) : 0;
        BoolGrid grid(rows, cols);
        for (int r = 0; r < rows; ++r) {
          if (int(obstacles[size_t(r)].size()) != cols)
            throw std::invalid_argument("ragged obstacle grid");
          for (int c = 0; c < cols; ++c) grid.set({r, c}, obstacles[size_t(r)][size_t(c)]);
        }
        std::vector<Cell> goals;
        for (const auto& [r, c] : goal_cells) goals.push_back({r, c});
        auto field = plan(grid, goals, PlanConfig{cell_size, inflation_radius});
        if (!field) return std::nullopt;
        std::vector<std::vector<double>> out(size_t(rows), std::vector<double>(size_t(cols), 0.0));
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) out[size_t(r)][size_t(c)] = field->at({r, c});
        return out;
      },
      py::arg("obstacles"), py::arg("goal_cells"), py::arg("cell_size") = 0.05,
      py::arg("inflation_radius") = 3,
      "Fast-marching geodesic distance field; None when no goal cell is in bounds.");

  m.def(
      "run_matching_benchmark",
      [](const std::map<std::string, std::string>& dump_paths, const std::string& annotations) {
        std::map<std::string, InstanceMemory> dumps;
        for (const auto& [name, path] : dump_paths) dumps.emplace(name, InstanceMemory::load(path));
        py::list out;
        for (const BenchmarkRow& row : run_matching_benchmark(dumps, load_annotations(annotations))) {
          py::dict d;
          d["modality"] = to_string(row.modality);
          d["method"] = to_string(row.config.method);
          d["threshold"] = row.config.threshold;
          d["subsample_by_category"] = row.config.subsample_by_category;
          d["context"] = to_string(row.config.context);
          d["aggregation"] = to_string(row.config.aggregation);
          d["goals"] = row.goals;
          d["success_rate"] = row.success_rate;
          out.append(d);
        }
        return out;
      },
      py::arg("dumps"), py::arg("annotations"),
      "Offline matching-strategy grid over saved memory dumps.");
}
