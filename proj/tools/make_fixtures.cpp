// Generates the committed fixture worlds under fixtures/, plus the offline
// matching benchmark (instance memory dumps and goal annotations).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <json.hpp>

#include "goat/eval.hpp"
#include "goat/world.hpp"

namespace fs = std::filesystem;
using goat::Cell;

namespace {

void fill(goat::BoolGrid& g, int r0, int c0, int r1, int c1, bool v) {
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) g.set({r, c}, v);
}

void border(goat::BoolGrid& g, int thickness) {
  fill(g, 0, 0, thickness - 1, g.cols - 1, true);
  fill(g, g.rows - thickness, 0, g.rows - 1, g.cols - 1, true);
  fill(g, 0, 0, g.rows - 1, thickness - 1, true);
  fill(g, 0, g.cols - thickness, g.rows - 1, g.cols - 1, true);
}

std::vector<Cell> rect(int r0, int c0, int r1, int c1) {
  std::vector<Cell> cells;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) cells.push_back({r, c});
  return cells;
}

goat::WorldObject object(int id, int category, int r0, int c0, int r1, int c1,
                         bool reflective = false) {
  return {id, category, rect(r0, c0, r1, c1), reflective};
}

// Waypoint helpers: one waypoint per simulation step.
void stay(std::vector<Cell>& w, Cell cell, int steps) {
  for (int i = 0; i < steps; ++i) w.push_back(cell);
}
void walk(std::vector<Cell>& w, Cell from, Cell to) {
  Cell cur = from;
  w.push_back(cur);
  while (cur != to) {
    if (cur.r != to.r) cur.r += to.r > cur.r ? 1 : -1;
    else cur.c += to.c > cur.c ? 1 : -1;
    w.push_back(cur);
  }
}

// Six-room home: two full-height interior walls and one full-width wall,
// all with wide doorways.
goat::WorldSpec home_a() {
  goat::WorldSpec w;
  w.grid = goat::BoolGrid(288, 288);
  border(w.grid, 2);
  fill(w.grid, 2, 94, 285, 95, true);    // west interior wall
  fill(w.grid, 2, 190, 285, 191, true);  // east interior wall
  fill(w.grid, 142, 2, 143, 285, true);  // mid horizontal wall
  fill(w.grid, 36, 94, 53, 95, false);   // doorways
  fill(w.grid, 180, 94, 197, 95, false);
  fill(w.grid, 72, 190, 89, 191, false);
  fill(w.grid, 228, 190, 245, 191, false);
  fill(w.grid, 142, 24, 143, 41, false);
  fill(w.grid, 142, 132, 143, 149, false);
  fill(w.grid, 142, 240, 143, 257, false);

  w.objects = {
      object(1, 0, 14, 14, 19, 19),
      object(2, 1, 120, 12, 125, 18),
      object(3, 2, 60, 72, 66, 78, true),
      object(4, 0, 17, 168, 22, 174),
      object(5, 3, 108, 108, 114, 113),
      object(6, 1, 24, 264, 30, 270),
      object(7, 2, 120, 204, 125, 210, true),
      object(8, 0, 240, 17, 245, 23),
      object(9, 4, 168, 60, 174, 66),
      object(10, 2, 264, 132, 270, 138),
      object(11, 3, 180, 158, 185, 164, true),
      object(12, 0, 204, 252, 210, 258),
      object(13, 1, 270, 216, 275, 222),
      object(14, 4, 162, 270, 167, 276),
  };
  w.category_count = 6;

  goat::DynamicAgent person;
  walk(person.waypoints, {72, 120}, {72, 156});
  walk(person.waypoints, {72, 155}, {72, 121});
  person.active_from = 0;
  person.active_until = 1 << 20;
  w.persons = {person};
  w.finalize();
  return w;
}

// Four-room home with an open hallway in the middle.
goat::WorldSpec home_b() {
  goat::WorldSpec w;
  w.grid = goat::BoolGrid(288, 288);
  border(w.grid, 2);
  fill(w.grid, 2, 120, 114, 121, true);     // upper wall
  fill(w.grid, 174, 120, 285, 121, true);   // lower wall
  fill(w.grid, 114, 2, 115, 96, true);      // west stub
  fill(w.grid, 114, 145, 115, 285, true);   // east stub
  fill(w.grid, 174, 2, 175, 96, true);
  fill(w.grid, 174, 145, 175, 285, true);
  fill(w.grid, 36, 120, 53, 121, false);    // doorway in the upper wall
  fill(w.grid, 240, 120, 257, 121, false);  // doorway in the lower wall
  fill(w.grid, 114, 36, 115, 53, false);
  fill(w.grid, 114, 216, 115, 233, false);
  fill(w.grid, 174, 36, 175, 53, false);
  fill(w.grid, 174, 216, 175, 233, false);

  w.objects = {
      object(1, 0, 18, 18, 23, 24),
      object(2, 0, 18, 240, 23, 246),
      object(3, 1, 72, 48, 78, 54, true),
      object(4, 1, 72, 180, 78, 186),
      object(5, 2, 240, 24, 246, 30),
      object(6, 2, 240, 252, 246, 258, true),
      object(7, 3, 204, 72, 209, 78),
      object(8, 3, 204, 204, 209, 210),
      object(9, 4, 132, 36, 137, 42),
      object(10, 4, 132, 240, 137, 246),
      object(11, 0, 270, 132, 275, 138),
      object(12, 1, 14, 132, 19, 138, true),
  };
  w.category_count = 6;

  goat::DynamicAgent person;
  walk(person.waypoints, {144, 108}, {144, 132});
  walk(person.waypoints, {144, 131}, {144, 109});
  person.active_from = 0;
  person.active_until = 1 << 20;
  w.persons = {person};
  w.finalize();
  return w;
}

// L-shaped home: a large open area plus two closed rooms.
goat::WorldSpec home_c() {
  goat::WorldSpec w;
  w.grid = goat::BoolGrid(288, 288);
  border(w.grid, 2);
  fill(w.grid, 2, 2, 95, 95, true);         // solid block makes the L shape
  fill(w.grid, 192, 96, 193, 285, true);    // south rooms wall
  fill(w.grid, 194, 190, 285, 191, true);   // divider between the two rooms
  fill(w.grid, 192, 120, 193, 137, false);  // doorways
  fill(w.grid, 192, 228, 193, 245, false);

  w.objects = {
      object(1, 0, 24, 120, 29, 126),
      object(2, 0, 24, 240, 29, 246),
      object(3, 1, 120, 24, 126, 30),
      object(4, 1, 72, 192, 78, 198, true),
      object(5, 2, 240, 24, 246, 30),
      object(6, 2, 156, 144, 162, 150),
      object(7, 3, 240, 120, 245, 126),
      object(8, 3, 240, 252, 245, 258, true),
      object(9, 4, 144, 72, 149, 78),
      object(10, 4, 222, 144, 227, 150),
      object(11, 0, 120, 264, 125, 270),
      object(12, 1, 270, 72, 275, 78),
      object(13, 2, 36, 168, 41, 174, true),
      object(14, 3, 168, 216, 173, 222),
      object(15, 4, 14, 204, 19, 210),
      object(16, 0, 266, 204, 271, 210),
  };
  w.category_count = 6;

  goat::DynamicAgent person;
  walk(person.waypoints, {144, 120}, {168, 120});
  walk(person.waypoints, {167, 120}, {145, 120});
  person.active_from = 0;
  person.active_until = 1 << 20;
  w.persons = {person};
  w.finalize();
  return w;
}

// Three rooms in a row, no persons. Small enough for fast unit tests.
goat::WorldSpec rooms_small() {
  goat::WorldSpec w;
  w.grid = goat::BoolGrid(160, 160);
  border(w.grid, 2);
  fill(w.grid, 2, 52, 157, 53, true);
  fill(w.grid, 2, 106, 157, 107, true);
  fill(w.grid, 60, 52, 77, 53, false);
  fill(w.grid, 90, 106, 107, 107, false);

  w.objects = {
      object(1, 0, 15, 15, 20, 20),
      object(2, 0, 130, 15, 135, 20),
      object(3, 1, 70, 10, 75, 15, true),
      object(4, 1, 15, 70, 20, 75),
      object(5, 2, 130, 70, 135, 75),
      object(6, 2, 70, 90, 75, 95),
      object(7, 3, 15, 130, 20, 135, true),
      object(8, 3, 130, 130, 135, 135),
      object(9, 0, 70, 140, 75, 145),
      object(10, 1, 110, 120, 115, 125),
      object(11, 2, 40, 40, 45, 45),
      object(12, 3, 100, 30, 105, 35),
  };
  w.category_count = 5;
  w.start = {80, 80};
  w.finalize();
  return w;
}

// Two halves joined by a short corridor (blocked by a person early on) and
// a longer passage to the south.
goat::WorldSpec corridor() {
  goat::WorldSpec w;
  w.grid = goat::BoolGrid(160, 200);
  border(w.grid, 2);
  fill(w.grid, 2, 118, 157, 121, true);     // dividing wall
  fill(w.grid, 72, 118, 84, 121, false);    // short corridor
  fill(w.grid, 130, 118, 145, 121, false);  // southern passage

  w.objects = {
      object(1, 0, 40, 170, 45, 175),    // right room, north
      object(2, 1, 115, 170, 120, 175),  // right room, south
      object(3, 2, 40, 30, 45, 35),      // left room, north
      object(4, 3, 115, 30, 120, 35),    // left room, south
      object(5, 0, 70, 130, 74, 134),    // right room, beside the corridor
  };
  w.category_count = 5;
  w.start = {80, 100};

  goat::DynamicAgent person;
  stay(person.waypoints, {78, 120}, 60);      // parks in the corridor
  walk(person.waypoints, {78, 120}, {78, 140});
  walk(person.waypoints, {78, 140}, {60, 140});
  stay(person.waypoints, {60, 140}, 200);     // waits in the right room
  person.active_from = 0;
  person.active_until = int(person.waypoints.size());
  w.persons = {person};
  w.finalize();
  return w;
}

void emit(const fs::path& dir, const std::string& name, const goat::WorldSpec& world) {
  std::ofstream out(dir / name, std::ios::binary);
  out << goat::world_to_json(world) << "\n";
  std::cout << "wrote " << (dir / name).string() << "\n";
}

// The matching benchmark works on memories accumulated by real runs: one
// episode per home, memory dumped as-is, and for every object that survived
// in memory an image-style and a language-style goal annotation.
void emit_benchmark(const fs::path& dir, uint64_t seed, uint64_t noise_seed) {
  fs::create_directories(dir / "dumps");
  nlohmann::json annotations = nlohmann::json::array();
  goat::Rng rng(goat::hash_mix(noise_seed, 0xBE9C4));
  for (const std::string name : {"home_a", "home_b", "home_c"}) {
    goat::WorldSpec world = name == "home_a" ? home_a() : name == "home_b" ? home_b() : home_c();
    goat::EpisodeConfig config;
    goat::EpisodeSpec episode = goat::generate_episode(world, seed, config);
    goat::Agent agent(world, goat::MethodVariant::kGoat, config, seed);
    for (size_t g = 0; g < episode.goals.size(); ++g) agent.run_goal(episode.goals[g], int(g));
    agent.memory().save((dir / "dumps" / (name + ".json")).string());
    std::cout << "wrote " << (dir / "dumps" / (name + ".json")).string() << "\n";

    for (const goat::WorldObject& obj : world.objects) {
      if (obj.category == world.person_category()) continue;
      // the instance this object ended up as (merges collapse ids; ghosts
      // of other categories are not candidates here); objects split over
      // several live instances have no well-defined identity and are skipped
      int truth = -1;
      int live = 0;
      for (int id : agent.instance_ids_for_object(obj.id)) {
        if (!agent.memory().instances().count(id)) continue;
        const auto& inst = agent.memory().instance(id);
        if (inst.category != obj.category) continue;
        ++live;
        truth = id;
      }
      if (truth < 0 || live > 1) continue;
      // One error direction per object: the language description errs the
      // same way as the goal image, only more strongly. This keeps the
      // fidelity ordering between the two modalities per case.
      goat::Feature direction(goat::kFeatureDim);
      for (double& v : direction) v = rng.gaussian();
      goat::Feature latent = obj.latent_feature();
      for (auto [modality, sigma] :
           {std::pair{"image", config.sigma_image}, std::pair{"language", config.sigma_language}}) {
        goat::Feature f = latent;
        double scale = sigma / std::sqrt(double(f.size()));
        for (size_t i = 0; i < f.size(); ++i) f[i] += scale * direction[i];
        nlohmann::json jc;
        jc["dump"] = name;
        jc["truth_instance"] = truth;
        jc["goal"] = {{"modality", modality},
                      {"category", obj.category},
                      {"feature", goat::normalized(f)}};
        annotations.push_back(std::move(jc));
      }
    }
  }
  std::ofstream out(dir / "annotations.json", std::ios::binary);
  out << annotations.dump(1) << "\n";
  std::cout << "wrote " << (dir / "annotations.json").string() << " (" << annotations.size()
            << " cases)\n";
}

}  // namespace

int main(int argc, char** argv) {
  fs::path dir = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(dir);
  try {
    emit(dir, "home_a.json", home_a());
    emit(dir, "home_b.json", home_b());
    emit(dir, "home_c.json", home_c());
    emit(dir, "rooms_small.json", rooms_small());
    emit(dir, "corridor.json", corridor());
    emit_benchmark(dir / "benchmark", 42, 66);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
