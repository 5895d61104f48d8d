#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "goat/eval.hpp"
#include "goat/matching.hpp"

namespace fs = std::filesystem;

namespace {

int log_level() {
  const char* env = std::getenv("GOAT_LOG");
  if (!env || !*env) return 0;
  try {
    return std::stoi(env);
  } catch (...) {
    return 1;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& world_path, const std::string& method, int episodes, uint64_t seed,
            const std::string& out_dir) {
  goat::WorldSpec world = goat::load_world(world_path);
  goat::MethodVariant variant = goat::variant_from_string(method);
  goat::EpisodeConfig config;
  if (log_level() >= 1)
    std::cerr << "running " << episodes << " episode(s) of " << goat::to_string(variant) << " on "
              << world_path << " (seed " << seed << ")\n";

  std::vector<goat::EpisodeResult> results =
      goat::run_suite(world, variant, episodes, seed, config);
  std::vector<goat::ResultRow> rows = goat::flatten(results);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "results.csv", goat::results_csv(rows));
  write_file(fs::path(out_dir) / "results.json", goat::results_json(rows));
  if (log_level() >= 1) {
    int ok = 0;
    for (const auto& r : rows) ok += r.success ? 1 : 0;
    std::cerr << ok << "/" << rows.size() << " goals succeeded\n";
  }
  if (log_level() >= 2) std::cerr << goat::results_csv(rows);
  return 0;
}

int cmd_ablate(const std::string& dumps_dir, const std::string& annotations,
               const std::string& out_csv) {
  std::map<std::string, goat::InstanceMemory> dumps;
  for (const auto& entry : fs::directory_iterator(dumps_dir)) {
    if (entry.path().extension() != ".json") continue;
    dumps.emplace(entry.path().stem().string(), goat::InstanceMemory::load(entry.path().string()));
  }
  if (dumps.empty()) throw std::runtime_error("no memory dumps (*.json) in " + dumps_dir);
  if (log_level() >= 1) std::cerr << "loaded " << dumps.size() << " memory dump(s)\n";

  std::vector<goat::BenchmarkCase> cases = goat::load_annotations(annotations);
  std::vector<goat::BenchmarkRow> rows = goat::run_matching_benchmark(dumps, cases);
  write_file(out_csv, goat::benchmark_csv(rows));
  if (log_level() >= 1) std::cerr << rows.size() << " benchmark configurations written\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_path) {
  std::vector<goat::ResultRow> rows =
      goat::parse_results_json(read_file(fs::path(in_dir) / "results.json"));
  write_file(out_path, goat::report_json(rows));
  if (log_level() >= 1) std::cerr << "report over " << rows.size() << " goal results\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifelong multimodal navigation testbed"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run evaluation episodes");
  std::string world_path, method = "goat", out_dir = "out";
  int episodes = 1;
  uint64_t seed = 0;
  run->add_option("--world", world_path, "world JSON file")->required();
  run->add_option("--method", method, "goat|no-instances|no-memory|cow");
  run->add_option("--episodes", episodes, "number of episodes")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out_dir, "output directory")->required();

  auto* ablate = app.add_subcommand("ablate-matching", "run the goal matching design grid");
  std::string dumps_dir, annotations, table_out;
  ablate->add_option("--dumps", dumps_dir, "directory of instance memory dumps")->required();
  ablate->add_option("--annotations", annotations, "annotations JSON")->required();
  ablate->add_option("--out", table_out, "output CSV")->required();

  auto* report = app.add_subcommand("report", "aggregate results into a report");
  std::string in_dir, report_out;
  report->add_option("--in", in_dir, "directory containing results.json")->required();
  report->add_option("--out", report_out, "output report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(world_path, method, episodes, seed, out_dir);
    if (ablate->parsed()) return cmd_ablate(dumps_dir, annotations, table_out);
    if (report->parsed()) return cmd_report(in_dir, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
