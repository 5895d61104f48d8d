#include "goat/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "goat/planner.hpp"

namespace goat {

using nlohmann::json;

EpisodeSpec generate_episode(const WorldSpec& world, uint64_t seed, const EpisodeConfig& config) {
  if (world.objects.size() < 5)
    throw WorldError("episode generation needs at least 5 goal-eligible objects, world has " +
                     std::to_string(world.objects.size()));
  Rng rng(hash_mix(seed, 0xE915ULL));

  EpisodeSpec spec;
  spec.seed = seed;
  spec.budget_per_goal = config.budget_per_goal;

  int n = 5 + int(rng.uniform_int(6));
  GoalModality order[3] = {GoalModality::kCategory, GoalModality::kImage, GoalModality::kLanguage};
  for (int i = 2; i > 0; --i) std::swap(order[i], order[int(rng.uniform_int(uint64_t(i + 1)))]);
  std::vector<GoalModality> modalities;
  for (int m = 0; m < 3; ++m) {
    int count = n / 3 + (m < n % 3 ? 1 : 0);
    modalities.insert(modalities.end(), size_t(count), order[m]);
  }
  for (int i = n - 1; i > 0; --i)
    std::swap(modalities[size_t(i)], modalities[rng.uniform_int(uint64_t(i + 1))]);

  int object_categories = world.category_count - 1;  // PERSON is never a goal
  for (int g = 0; g < n; ++g) {
    const WorldObject& target = world.objects[rng.uniform_int(world.objects.size())];
    GoalSpec goal;
    goal.modality = modalities[size_t(g)];
    goal.category = target.category;
    goal.goal_id = target.id;
    if (goal.modality != GoalModality::kCategory) {
      double sigma =
          goal.modality == GoalModality::kImage ? config.sigma_image : config.sigma_language;
      goal.goal_feature = perturbed(target.latent_feature(), sigma, rng);
      // imperfect category extraction from the goal image / description
      if (object_categories > 1 && rng.bernoulli(config.p_category_misextract)) {
        int wrong = int(rng.uniform_int(uint64_t(object_categories - 1)));
        if (wrong >= target.category) ++wrong;
        goal.category = wrong;
      }
    }
    spec.goals.push_back(std::move(goal));
  }
  return spec;
}

double spl_of(bool success, double geodesic_m, double path_m) {
  if (!success) return 0.0;
  double denom = std::max(path_m, geodesic_m);
  if (denom <= 0.0) return 1.0;
  return geodesic_m / denom;
}

namespace {

std::vector<Cell> acceptable_cells(const WorldSpec& world, const GoalSpec& goal) {
  std::vector<Cell> cells;
  if (goal.modality == GoalModality::kCategory) {
    for (const auto& obj : world.objects)
      if (obj.category == goal.category)
        cells.insert(cells.end(), obj.footprint.begin(), obj.footprint.end());
  } else if (const WorldObject* obj = world.object_by_id(goal.goal_id)) {
    cells = obj->footprint;
  }
  return cells;
}

}  // namespace

EpisodeResult run_episode(const WorldSpec& world, const EpisodeSpec& spec, MethodVariant variant,
                          const EpisodeConfig& config, int episode_index) {
  EpisodeConfig cfg = config;
  cfg.budget_per_goal = spec.budget_per_goal;
  Agent agent(world, variant, cfg, spec.seed);
  PlanConfig truth_pc{world.cell_size_m, 0};

  EpisodeResult result;
  result.episode = episode_index;
  for (size_t g = 0; g < spec.goals.size(); ++g) {
    const GoalSpec& goal = spec.goals[g];
    // Oracle geodesic on the ground-truth grid, from wherever the agent
    // stands at hand-off.
    std::vector<Cell> truth_cells = acceptable_cells(world, goal);
    std::optional<DistanceField> truth = plan(world.blocked_grid(), truth_cells, truth_pc);

    GoalOutcome outcome = agent.run_goal(goal, int(g));

    GoalResult gr;
    gr.goal_index = int(g) + 1;
    gr.modality = goal.modality;
    gr.steps = outcome.steps;
    gr.path_length_m = outcome.path_length_m;
    gr.stopped = outcome.stopped;
    gr.matched_instance = outcome.matched_instance;
    Cell start_cell = point_to_cell(outcome.start_state.position, world.cell_size_m);
    Cell end_cell = point_to_cell(outcome.end_state.position, world.cell_size_m);
    if (truth && truth->reachable(start_cell)) gr.geodesic_m = truth->at(start_cell);
    gr.success = outcome.stopped && outcome.steps <= spec.budget_per_goal && truth &&
                 truth->reachable(end_cell) && truth->at(end_cell) < cfg.stop_distance_m;
    gr.spl = spl_of(gr.success, gr.geodesic_m, gr.path_length_m);
    result.goals.push_back(gr);
  }
  result.trajectory = agent.trajectory();
  return result;
}

std::vector<EpisodeResult> run_suite(const WorldSpec& world, MethodVariant variant, int episodes,
                                     uint64_t seed, const EpisodeConfig& config, int workers) {
  std::vector<EpisodeResult> results{size_t(episodes)};
  if (workers <= 0) workers = int(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, episodes);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int e = next.fetch_add(1); e < episodes; e = next.fetch_add(1)) {
      EpisodeSpec spec = generate_episode(world, seed + uint64_t(e), config);
      results[size_t(e)] = run_episode(world, spec, variant, config, e);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

std::vector<ResultRow> flatten(const std::vector<EpisodeResult>& episodes) {
  std::vector<ResultRow> rows;
  for (const auto& ep : episodes)
    for (const auto& gr : ep.goals)
      rows.push_back({ep.episode, gr.goal_index, gr.modality, gr.success, gr.steps,
                      gr.path_length_m, gr.geodesic_m, gr.spl});
  return rows;
}

Stat mean_two_std(const std::vector<double>& values) {
  Stat s;
  s.count = int(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  var /= double(values.size());
  s.two_std = 2.0 * std::sqrt(var);
  return s;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "episode,goal_index,modality,success,steps,path_m,geodesic_m,spl\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%d,%d,%.6f,%.6f,%.6f\n", r.episode, r.goal_index,
                  to_string(r.modality).c_str(), r.success ? 1 : 0, r.steps, r.path_m,
                  r.geodesic_m, r.spl);
    out << buf;
  }
  return out.str();
}

std::string results_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"episode", r.episode},
                   {"goal_index", r.goal_index},
                   {"modality", to_string(r.modality)},
                   {"success", r.success},
                   {"steps", r.steps},
                   {"path_m", r.path_m},
                   {"geodesic_m", r.geodesic_m},
                   {"spl", r.spl}});
  return arr.dump(2) + "\n";
}

std::vector<ResultRow> parse_results_json(const std::string& text) {
  json arr = json::parse(text);
  std::vector<ResultRow> rows;
  for (const auto& j : arr) {
    ResultRow r;
    r.episode = j.at("episode").get<int>();
    r.goal_index = j.at("goal_index").get<int>();
    std::string m = j.at("modality").get<std::string>();
    r.modality = m == "image"      ? GoalModality::kImage
                 : m == "language" ? GoalModality::kLanguage
                                   : GoalModality::kCategory;
    r.success = j.at("success").get<bool>();
    r.steps = j.at("steps").get<int>();
    r.path_m = j.at("path_m").get<double>();
    r.geodesic_m = j.at("geodesic_m").get<double>();
    r.spl = j.at("spl").get<double>();
    rows.push_back(r);
  }
  return rows;
}

namespace {

json stat_json(const Stat& sr, const Stat& spl) {
  return {{"count", sr.count},
          {"success_rate", sr.mean},
          {"success_rate_2std", sr.two_std},
          {"spl", spl.mean},
          {"spl_2std", spl.two_std}};
}

json group_json(const std::vector<ResultRow>& rows) {
  std::vector<double> sr, spl;
  for (const auto& r : rows) {
    sr.push_back(r.success ? 1.0 : 0.0);
    spl.push_back(r.spl);
  }
  return stat_json(mean_two_std(sr), mean_two_std(spl));
}

}  // namespace

std::string report_json(const std::vector<ResultRow>& rows) {
  json report;
  int episodes = 0;
  for (const auto& r : rows) episodes = std::max(episodes, r.episode + 1);
  report["episodes"] = episodes;
  report["goals"] = rows.size();
  report["overall"] = group_json(rows);

  json by_modality = json::object();
  for (GoalModality m :
       {GoalModality::kCategory, GoalModality::kImage, GoalModality::kLanguage}) {
    std::vector<ResultRow> sub;
    for (const auto& r : rows)
      if (r.modality == m) sub.push_back(r);
    if (!sub.empty()) by_modality[to_string(m)] = group_json(sub);
  }
  report["by_modality"] = by_modality;

  int max_index = 0;
  for (const auto& r : rows) max_index = std::max(max_index, r.goal_index);
  json curve = json::array();
  for (int i = 1; i <= max_index; ++i) {
    std::vector<ResultRow> sub;
    for (const auto& r : rows)
      if (r.goal_index == i) sub.push_back(r);
    if (sub.empty()) continue;
    json entry = group_json(sub);
    entry["goal_index"] = i;
    curve.push_back(entry);
  }
  report["by_goal_index"] = curve;

  // Real-home reference averages, for context only; desk-scale numbers are
  // not expected to match them.
  report["reference"] = {{"system", "real-home average"},
                         {"success_rate", 83.0},
                         {"spl", 0.642},
                         {"note", "context only, not a target"}};
  return report.dump(2) + "\n";
}

std::string to_string(MethodVariant variant) {
  switch (variant) {
    case MethodVariant::kGoat: return "goat";
    case MethodVariant::kNoInstances: return "no-instances";
    case MethodVariant::kNoMemory: return "no-memory";
    case MethodVariant::kCow: return "cow";
  }
  return "?";
}

MethodVariant variant_from_string(const std::string& name) {
  if (name == "goat") return MethodVariant::kGoat;
  if (name == "no-instances" || name == "goat_no_instances") return MethodVariant::kNoInstances;
  if (name == "no-memory" || name == "goat_no_memory") return MethodVariant::kNoMemory;
  if (name == "cow" || name == "cow_baseline") return MethodVariant::kCow;
  throw std::invalid_argument("unknown method variant: " + name);
}

}  // namespace goat
