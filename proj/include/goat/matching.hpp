#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "goat/instance_memory.hpp"
#include "goat/planner.hpp"

namespace goat {

enum class GoalModality { kCategory, kImage, kLanguage };

struct GoalSpec {
  GoalModality modality = GoalModality::kCategory;
  int category = 0;        // extracted category (may be wrong for image/language)
  Feature goal_feature;    // empty for category goals
  int goal_id = -1;        // ground-truth object id, evaluation only
};

enum class MatchMethod { kCosine, kKeypointProxy };
enum class ViewContext { kBbox, kBboxPad, kFull };
enum class Aggregation { kMax, kMedian, kAvg, kAvgTopK };

struct MatchConfig {
  MatchMethod method = MatchMethod::kCosine;
  std::optional<double> threshold = 0.75;  // nullopt = no threshold
  bool subsample_by_category = true;
  ViewContext context = ViewContext::kBboxPad;
  Aggregation aggregation = Aggregation::kMax;
  int top_k = 2;  // for kAvgTopK
};

struct MatchResult {
  std::optional<int> instance_id;
  double score = 0.0;
  std::map<int, double> per_instance_scores;
};

// Similarity of a goal feature against one stored view. Cosine is clamped
// to [0, 1]; the keypoint proxy additionally decays with view distance,
// mimicking keypoint counts dropping for far-away sightings.
double score_view(const GoalSpec& goal, const ViewRecord& view, const MatchConfig& config);

double aggregate_scores(std::vector<double> scores, Aggregation aggregation, int top_k = 2);

// Goal localization over the instance memory. Category goals pick the
// geodesically nearest instance of the category (no scoring); feature goals
// aggregate view scores per instance and take the argmax, gated by the
// exploration threshold until the environment is fully explored.
MatchResult localize_goal(const GoalSpec& goal, const InstanceMemory& memory,
                          const MatchConfig& config, bool fully_explored,
                          const DistanceField* agent_field = nullptr);

// ---- Offline matching benchmark ----

struct BenchmarkCase {
  std::string dump;  // memory dump file name (may be empty for single-dump runs)
  GoalSpec goal;
  int truth_instance = -1;
};

struct BenchmarkRow {
  MatchConfig config;
  GoalModality modality;
  double success_rate = 0.0;
  int goals = 0;
};

std::vector<BenchmarkCase> load_annotations(const std::string& path);

// Runs every config in the design grid (method x threshold on/off x
// sub-sampling x context x aggregation), split by goal modality.
std::vector<BenchmarkRow> run_matching_benchmark(
    const std::map<std::string, InstanceMemory>& dumps, const std::vector<BenchmarkCase>& cases);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

std::string to_string(MatchMethod m);
std::string to_string(ViewContext c);
std::string to_string(Aggregation a);
std::string to_string(GoalModality m);

}  // namespace goat
