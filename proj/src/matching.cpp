#include "goat/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace goat {

using nlohmann::json;

double score_view(const GoalSpec& goal, const ViewRecord& view, const MatchConfig& config) {
  if (goal.modality == GoalModality::kCategory || goal.goal_feature.empty())
    throw std::invalid_argument("category goals bypass view scoring");
  const Feature& feat = config.context == ViewContext::kBbox      ? view.feature_bbox
                        : config.context == ViewContext::kBboxPad ? view.feature_bbox_pad
                                                                  : view.feature_full;
  double cos = std::clamp(cosine(goal.goal_feature, feat), 0.0, 1.0);
  if (config.method == MatchMethod::kKeypointProxy)
    cos *= std::min(1.0, 1.0 / std::max(view.distance_m, 1e-9));
  return cos;
}

double aggregate_scores(std::vector<double> scores, Aggregation aggregation, int top_k) {
  if (scores.empty()) throw std::invalid_argument("aggregate over empty score list");
  switch (aggregation) {
    case Aggregation::kMax:
      return *std::max_element(scores.begin(), scores.end());
    case Aggregation::kMedian: {
      std::sort(scores.begin(), scores.end());
      size_t n = scores.size();
      return n % 2 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    }
    case Aggregation::kAvg: {
      double s = 0.0;
      for (double v : scores) s += v;
      return s / double(scores.size());
    }
    case Aggregation::kAvgTopK: {
      if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
      std::sort(scores.begin(), scores.end(), std::greater<double>());
      size_t k = std::min(size_t(top_k), scores.size());
      double s = 0.0;
      for (size_t i = 0; i < k; ++i) s += scores[i];
      return s / double(k);
    }
  }
  return 0.0;
}

MatchResult localize_goal(const GoalSpec& goal, const InstanceMemory& memory,
                          const MatchConfig& config, bool fully_explored,
                          const DistanceField* agent_field) {
  MatchResult result;
  std::vector<int> candidates;
  if (config.subsample_by_category || goal.modality == GoalModality::kCategory) {
    candidates = memory.instances_by_category(goal.category);
  } else {
    for (const auto& [id, inst] : memory.instances()) candidates.push_back(id);
  }
  if (candidates.empty()) return result;

  if (goal.modality == GoalModality::kCategory) {
    // Nearest instance by geodesic distance; id order breaks ties (and
    // stands in when no distance field is available). Instance cells are
    // occupied, so the field usually has no value on them: probe outward
    // in Chebyshev rings until traversable cells appear.
    int best = -1;
    double best_dist = kInf;
    for (int id : candidates) {
      double dist = 0.0;
      if (agent_field) {
        dist = kInf;
        const std::vector<Cell>& cells = memory.instance(id).cells;
        for (int ring = 0; ring <= 8 && dist == kInf; ++ring)
          for (const Cell& cell : ring ? dilate_chebyshev(cells, ring) : cells)
            if (agent_field->reachable(cell)) dist = std::min(dist, agent_field->at(cell));
      }
      if (best < 0 || dist < best_dist) {
        best = id;
        best_dist = dist;
      }
    }
    if (best >= 0) {
      result.instance_id = best;
      result.score = 1.0;
    }
    return result;
  }

  int best = -1;
  double best_score = -1.0;
  for (int id : candidates) {
    const auto& views = memory.views_of(id);
    if (views.empty()) continue;
    std::vector<double> scores;
    scores.reserve(views.size());
    for (const ViewRecord& v : views) scores.push_back(score_view(goal, v, config));
    double agg = aggregate_scores(std::move(scores), config.aggregation, config.top_k);
    result.per_instance_scores[id] = agg;
    if (agg > best_score) {  // ties keep the lower id (map iterates ascending)
      best_score = agg;
      best = id;
    }
  }
  if (best < 0) return result;
  if (!fully_explored && config.threshold && best_score < *config.threshold) return result;
  result.instance_id = best;
  result.score = best_score;
  return result;
}

std::vector<BenchmarkCase> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotations: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str());
  std::vector<BenchmarkCase> cases;
  for (const auto& jc : j) {
    BenchmarkCase bc;
    bc.dump = jc.value("dump", "");
    bc.truth_instance = jc.at("truth_instance").get<int>();
    const auto& jg = jc.at("goal");
    std::string modality = jg.value("modality", "image");
    bc.goal.modality = modality == "language" ? GoalModality::kLanguage
                       : modality == "category" ? GoalModality::kCategory
                                                : GoalModality::kImage;
    bc.goal.category = jg.at("category").get<int>();
    if (jg.contains("feature")) bc.goal.goal_feature = jg["feature"].get<Feature>();
    cases.push_back(std::move(bc));
  }
  return cases;
}

std::vector<BenchmarkRow> run_matching_benchmark(
    const std::map<std::string, InstanceMemory>& dumps, const std::vector<BenchmarkCase>& cases) {
  for (const auto& bc : cases) {
    auto it = bc.dump.empty() ? dumps.begin() : dumps.find(bc.dump);
    if (it == dumps.end()) throw std::runtime_error("annotation references unknown dump " + bc.dump);
    if (!it->second.instances().count(bc.truth_instance))
      throw std::runtime_error("annotation references unknown instance " +
                               std::to_string(bc.truth_instance));
  }

  const MatchMethod methods[] = {MatchMethod::kCosine, MatchMethod::kKeypointProxy};
  const bool thresholded[] = {true, false};
  const bool subsampling[] = {false, true};
  const ViewContext contexts[] = {ViewContext::kBbox, ViewContext::kBboxPad, ViewContext::kFull};
  const Aggregation aggregations[] = {Aggregation::kMax, Aggregation::kMedian, Aggregation::kAvg,
                                      Aggregation::kAvgTopK};
  const GoalModality modalities[] = {GoalModality::kImage, GoalModality::kLanguage};

  std::vector<BenchmarkRow> rows;
  for (GoalModality modality : modalities)
    for (MatchMethod method : methods)
      for (bool with_threshold : thresholded)
        for (bool subsample : subsampling)
          for (ViewContext context : contexts)
            for (Aggregation aggregation : aggregations) {
              MatchConfig config;
              config.method = method;
              config.threshold = with_threshold
                                     ? std::optional<double>(method == MatchMethod::kCosine ? 0.75 : 0.2)
                                     : std::nullopt;
              config.subsample_by_category = subsample;
              config.context = context;
              config.aggregation = aggregation;
              int total = 0, hits = 0;
              for (const auto& bc : cases) {
                if (bc.goal.modality != modality) continue;
                const InstanceMemory& mem =
                    bc.dump.empty() ? dumps.begin()->second : dumps.at(bc.dump);
                ++total;
                MatchResult r = localize_goal(bc.goal, mem, config, /*fully_explored=*/false);
                if (r.instance_id && *r.instance_id == bc.truth_instance) ++hits;
              }
              if (total == 0) continue;
              BenchmarkRow row;
              row.config = config;
              row.modality = modality;
              row.goals = total;
              row.success_rate = double(hits) / double(total);
              rows.push_back(row);
            }
  return rows;
}

std::string to_string(MatchMethod m) { return m == MatchMethod::kCosine ? "cosine" : "keypoint_proxy"; }
std::string to_string(ViewContext c) {
  switch (c) {
    case ViewContext::kBbox: return "bbox";
    case ViewContext::kBboxPad: return "bbox_pad";
    case ViewContext::kFull: return "full";
  }
  return "?";
}
std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kMax: return "max";
    case Aggregation::kMedian: return "median";
    case Aggregation::kAvg: return "avg";
    case Aggregation::kAvgTopK: return "avg_top_2";
  }
  return "?";
}
std::string to_string(GoalModality m) {
  switch (m) {
    case GoalModality::kCategory: return "category";
    case GoalModality::kImage: return "image";
    case GoalModality::kLanguage: return "language";
  }
  return "?";
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "modality,method,threshold,subsample_by_category,context,aggregation,goals,success_rate\n";
  for (const auto& row : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", row.success_rate);
    out << to_string(row.modality) << ',' << to_string(row.config.method) << ','
        << (row.config.threshold ? std::to_string(*row.config.threshold) : std::string("none")) << ','
        << (row.config.subsample_by_category ? "by_category" : "all_instances") << ','
        << to_string(row.config.context) << ',' << to_string(row.config.aggregation) << ','
        << row.goals << ',' << buf << "\n";
  }
  return out.str();
}

}  // namespace goat
