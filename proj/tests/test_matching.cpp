#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "goat/matching.hpp"
#include "goat/rng.hpp"

using namespace goat;

namespace {

ViewRecord view_with(const Feature& f, double distance, int step = 0) {
  ViewRecord v;
  v.feature_bbox = f;
  v.feature_bbox_pad = f;
  v.feature_full = f;
  v.distance_m = distance;
  v.step = step;
  return v;
}

GoalSpec feature_goal(GoalModality modality, int category, const Feature& f) {
  GoalSpec g;
  g.modality = modality;
  g.category = category;
  g.goal_feature = f;
  return g;
}

}  // namespace

TEST_CASE("score_view: identical features give 1, orthogonal give 0") {
  Feature f = unit_feature(1);
  MatchConfig cfg;
  cfg.method = MatchMethod::kCosine;
  cfg.context = ViewContext::kBbox;
  GoalSpec goal = feature_goal(GoalModality::kImage, 0, f);
  CHECK(score_view(goal, view_with(f, 1.0), cfg) == doctest::Approx(1.0));

  Feature g(kFeatureDim, 0.0);
  // build a vector orthogonal to f
  g[0] = f[1];
  g[1] = -f[0];
  g = normalized(g);
  GoalSpec goal2 = feature_goal(GoalModality::kImage, 0, g);
  Feature h = f;
  for (int i = 2; i < kFeatureDim; ++i) h[i] = 0.0;
  h = normalized(h);
  CHECK(score_view(goal2, view_with(h, 1.0), cfg) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("keypoint proxy scales by inverse distance beyond 1 m") {
  Feature f = unit_feature(2);
  Feature g = unit_feature(3);
  // craft a view whose cosine against the goal is 0.8
  Feature mix(kFeatureDim);
  double c = 0.8, s = std::sqrt(1.0 - c * c);
  // Gram-Schmidt: component of g orthogonal to f
  Feature perp(kFeatureDim);
  double fg = dot(f, g);
  for (int i = 0; i < kFeatureDim; ++i) perp[i] = g[i] - fg * f[i];
  perp = normalized(perp);
  for (int i = 0; i < kFeatureDim; ++i) mix[i] = c * f[i] + s * perp[i];

  MatchConfig cfg;
  cfg.method = MatchMethod::kKeypointProxy;
  cfg.context = ViewContext::kBbox;
  GoalSpec goal = feature_goal(GoalModality::kImage, 0, f);
  CHECK(score_view(goal, view_with(mix, 4.0), cfg) == doctest::Approx(0.2));
  // within 1 m the factor saturates at 1
  CHECK(score_view(goal, view_with(mix, 0.5), cfg) == doctest::Approx(0.8));
}

TEST_CASE("category goals reject view scoring") {
  GoalSpec goal;
  goal.modality = GoalModality::kCategory;
  MatchConfig cfg;
  CHECK_THROWS_AS(score_view(goal, view_with(unit_feature(1), 1.0), cfg), std::invalid_argument);
}

TEST_CASE("aggregation: max, median, avg, avg_top_k") {
  std::vector<double> s{0.2, 0.9, 0.4};
  CHECK(aggregate_scores(s, Aggregation::kMax, 2) == doctest::Approx(0.9));
  CHECK(aggregate_scores(s, Aggregation::kMedian, 2) == doctest::Approx(0.4));
  CHECK(aggregate_scores(s, Aggregation::kAvg, 2) == doctest::Approx(0.5));
  CHECK(aggregate_scores(s, Aggregation::kAvgTopK, 2) == doctest::Approx(0.65));
  // even length median = mean of the middle two
  CHECK(aggregate_scores({0.1, 0.2, 0.6, 0.9}, Aggregation::kMedian, 2) == doctest::Approx(0.4));
  // k capped at list length
  CHECK(aggregate_scores({0.5}, Aggregation::kAvgTopK, 4) == doctest::Approx(0.5));
  CHECK_THROWS_AS(aggregate_scores({}, Aggregation::kMax, 2), std::invalid_argument);
}

TEST_CASE("aggregation bounds: results stay within [min, max] of the scores") {
  Rng rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    int n = 1 + int(rng.uniform_int(9));
    for (int i = 0; i < n; ++i) s.push_back(rng.uniform());
    double lo = *std::min_element(s.begin(), s.end());
    double hi = *std::max_element(s.begin(), s.end());
    for (Aggregation a : {Aggregation::kMax, Aggregation::kMedian, Aggregation::kAvg,
                          Aggregation::kAvgTopK}) {
      double v = aggregate_scores(s, a, 2);
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
    CHECK(aggregate_scores(s, Aggregation::kMax, 2) == doctest::Approx(hi));
  }
}

TEST_CASE("category goal picks the only instance; empty memory gives none") {
  InstanceMemory mem(3);
  GoalSpec goal;
  goal.modality = GoalModality::kCategory;
  goal.category = 2;
  MatchConfig cfg;
  CHECK_FALSE(localize_goal(goal, mem, cfg, false).instance_id.has_value());
  mem.associate({{10, 10}}, 2, view_with(unit_feature(5), 1.0));
  auto r = localize_goal(goal, mem, cfg, false);
  REQUIRE(r.instance_id.has_value());
  CHECK(*r.instance_id == 1);
}

TEST_CASE("threshold gates during exploration, argmax after full exploration") {
  InstanceMemory mem(3);
  Feature target = unit_feature(10);
  Rng rng(1);
  Feature weak = perturbed(target, 2.0, rng);  // heavily corrupted view
  // ensure the score lands below 0.75
  mem.associate({{10, 10}}, 0, view_with(weak, 1.0));
  GoalSpec goal = feature_goal(GoalModality::kLanguage, 0, target);
  MatchConfig cfg;
  cfg.method = MatchMethod::kCosine;
  cfg.threshold = 0.75;
  auto exploring = localize_goal(goal, mem, cfg, false);
  REQUIRE(exploring.per_instance_scores.count(1) == 1);
  REQUIRE(exploring.per_instance_scores.at(1) < 0.75);
  CHECK_FALSE(exploring.instance_id.has_value());
  auto done = localize_goal(goal, mem, cfg, true);
  REQUIRE(done.instance_id.has_value());
  CHECK(*done.instance_id == 1);
}

TEST_CASE("threshold monotonicity: raising it never adds matches") {
  Rng rng(82);
  InstanceMemory mem(3);
  for (int i = 0; i < 6; ++i)
    mem.associate({{10 * i, 10 * i}}, 0, view_with(unit_feature(uint64_t(100 + i)), 1.0));
  GoalSpec goal = feature_goal(GoalModality::kLanguage, 0, unit_feature(100));
  MatchConfig cfg;
  cfg.method = MatchMethod::kCosine;
  bool matched_before = true;
  for (double t : {0.0, 0.2, 0.4, 0.6, 0.8, 1.01}) {
    cfg.threshold = t;
    bool matched = localize_goal(goal, mem, cfg, false).instance_id.has_value();
    CHECK((matched_before || !matched));  // once lost, never regained
    matched_before = matched;
  }
}

TEST_CASE("ties break toward the lower instance id") {
  InstanceMemory mem(3);
  Feature f = unit_feature(11);
  mem.associate({{10, 10}}, 0, view_with(f, 1.0));
  mem.associate({{50, 50}}, 0, view_with(f, 1.0));  // identical score
  GoalSpec goal = feature_goal(GoalModality::kImage, 0, f);
  MatchConfig cfg;
  cfg.method = MatchMethod::kCosine;
  cfg.threshold = 0.5;
  auto r = localize_goal(goal, mem, cfg, false);
  REQUIRE(r.instance_id.has_value());
  CHECK(*r.instance_id == 1);
}

TEST_CASE("subsampling safety: agrees with all-instances when that pick is in-category") {
  Rng rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    InstanceMemory mem(3);
    for (int i = 0; i < 8; ++i) {
      int cat = int(rng.uniform_int(3));
      mem.associate({{8 * i, 8 * i}}, cat,
                    view_with(object_latent(i, cat), rng.uniform(0.5, 3.0)));
    }
    int target_cat = int(rng.uniform_int(3));
    GoalSpec goal = feature_goal(GoalModality::kLanguage, target_cat,
                                 perturbed(object_latent(int(rng.uniform_int(8)), target_cat), 0.4, rng));
    MatchConfig all_cfg;
    all_cfg.method = MatchMethod::kCosine;
    all_cfg.threshold = std::nullopt;
    all_cfg.subsample_by_category = false;
    MatchConfig sub_cfg = all_cfg;
    sub_cfg.subsample_by_category = true;
    auto all_r = localize_goal(goal, mem, all_cfg, false);
    auto sub_r = localize_goal(goal, mem, sub_cfg, false);
    if (all_r.instance_id && mem.instance(*all_r.instance_id).category == target_cat) {
      REQUIRE(sub_r.instance_id.has_value());
      CHECK(*sub_r.instance_id == *all_r.instance_id);
    }
  }
}

TEST_CASE("benchmark: exact features at close range score 100% in every config") {
  InstanceMemory mem(3);
  for (int i = 0; i < 4; ++i) {
    Feature latent = object_latent(i, i % 2);
    mem.associate({{20 * i, 20 * i}}, i % 2, view_with(latent, 0.8, i));
  }
  std::map<std::string, InstanceMemory> dumps;
  dumps.emplace("scene", mem);
  std::vector<BenchmarkCase> cases;
  for (int i = 0; i < 4; ++i)
    for (GoalModality m : {GoalModality::kImage, GoalModality::kLanguage}) {
      BenchmarkCase bc;
      bc.dump = "scene";
      bc.truth_instance = i + 1;
      bc.goal = feature_goal(m, i % 2, object_latent(i, i % 2));
      cases.push_back(bc);
    }
  auto rows = run_matching_benchmark(dumps, cases);
  REQUIRE_FALSE(rows.empty());
  CHECK(rows.size() == 2 * 2 * 2 * 2 * 3 * 4);
  for (const auto& row : rows) {
    CHECK(row.goals == 4);
    CHECK(row.success_rate == doctest::Approx(1.0));
  }
}

TEST_CASE("benchmark: unknown dump or instance in annotations is rejected") {
  std::map<std::string, InstanceMemory> dumps;
  InstanceMemory mem(3);
  mem.associate({{1, 1}}, 0, view_with(unit_feature(1), 1.0));
  dumps.emplace("scene", mem);
  BenchmarkCase bad_dump;
  bad_dump.dump = "elsewhere";
  bad_dump.truth_instance = 1;
  bad_dump.goal = feature_goal(GoalModality::kImage, 0, unit_feature(1));
  CHECK_THROWS_AS(run_matching_benchmark(dumps, {bad_dump}), std::runtime_error);
  BenchmarkCase bad_inst = bad_dump;
  bad_inst.dump = "scene";
  bad_inst.truth_instance = 99;
  CHECK_THROWS_AS(run_matching_benchmark(dumps, {bad_inst}), std::runtime_error);
}

TEST_CASE("benchmark CSV has the pinned header and one row per config") {
  InstanceMemory mem(3);
  mem.associate({{1, 1}}, 0, view_with(object_latent(0, 0), 0.5));
  std::map<std::string, InstanceMemory> dumps;
  dumps.emplace("scene", mem);
  BenchmarkCase bc;
  bc.dump = "scene";
  bc.truth_instance = 1;
  bc.goal = feature_goal(GoalModality::kImage, 0, object_latent(0, 0));
  auto rows = run_matching_benchmark(dumps, {bc});
  std::string csv = benchmark_csv(rows);
  CHECK(csv.rfind("modality,method,threshold,subsample_by_category,context,aggregation,goals,"
                  "success_rate\n", 0) == 0);
  size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == rows.size() + 1);
}
