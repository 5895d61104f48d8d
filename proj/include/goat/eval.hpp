#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "goat/pipeline.hpp"

namespace goat {

struct EpisodeSpec {
  std::string world_path;  // informational; episodes run on in-memory worlds
  uint64_t seed = 0;
  std::vector<GoalSpec> goals;  // 5-10, modalities balanced within one
  int budget_per_goal = 200;
};

struct GoalResult {
  int goal_index = 0;  // 1-based position in the sequence
  GoalModality modality = GoalModality::kCategory;
  bool success = false;
  int steps = 0;
  double path_length_m = 0.0;
  double geodesic_m = 0.0;  // from the previous goal's hand-off position
  double spl = 0.0;
  bool stopped = false;
  std::optional<int> matched_instance;
};

struct EpisodeResult {
  int episode = 0;
  std::vector<GoalResult> goals;
  std::vector<TrajectoryStep> trajectory;
};

// Flat row as emitted to results.csv / results.json.
struct ResultRow {
  int episode = 0;
  int goal_index = 0;
  GoalModality modality = GoalModality::kCategory;
  bool success = false;
  int steps = 0;
  double path_m = 0.0;
  double geodesic_m = 0.0;
  double spl = 0.0;
};

struct Stat {
  double mean = 0.0;
  double two_std = 0.0;
  int count = 0;
};

// Random goal sequence over the world's objects. Image/language goals get
// features perturbed from the target's latent; the extracted category is
// wrong with probability p_category_misextract. Throws WorldError when the
// world has fewer than 5 goal-eligible objects.
EpisodeSpec generate_episode(const WorldSpec& world, uint64_t seed,
                             const EpisodeConfig& config = {});

double spl_of(bool success, double geodesic_m, double path_m);

EpisodeResult run_episode(const WorldSpec& world, const EpisodeSpec& spec, MethodVariant variant,
                          const EpisodeConfig& config, int episode_index = 0);

// N episodes with seeds seed..seed+N-1, run on a worker pool; results are
// ordered by episode index regardless of scheduling.
std::vector<EpisodeResult> run_suite(const WorldSpec& world, MethodVariant variant, int episodes,
                                     uint64_t seed, const EpisodeConfig& config, int workers = 0);

std::vector<ResultRow> flatten(const std::vector<EpisodeResult>& episodes);
Stat mean_two_std(const std::vector<double>& values);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string results_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_json(const std::string& text);

// Aggregate report: overall / per-modality / per-goal-index SR and SPL with
// two-standard-deviation error bars, plus a real-home reference row for
// context.
std::string report_json(const std::vector<ResultRow>& rows);

std::string to_string(MethodVariant variant);
MethodVariant variant_from_string(const std::string& name);

}  // namespace goat
