#include "doctest.h"

#include "copier/harness.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace copier;
using namespace copier::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "copier-harness-test" / name;
  fs::remove_all(p);
  return p;
}

RunConfig small_grid() {
  RunConfig cfg = RunConfig::defaults();
  cfg.set("env", "grid");
  cfg.set("instances", "10");
  cfg.set("iterations", "3");
  cfg.set("diagnostics", "true");
  return cfg;
}

RunConfig small_mvc() {
  RunConfig cfg = RunConfig::defaults();
  cfg.set("env", "mvc");
  cfg.set("instances", "10");
  cfg.set("seed", "7");
  cfg.set("mvc.n_min", "8");
  cfg.set("mvc.n_max", "12");
  cfg.set("mvc.node_budget", "10");
  cfg.set("iterations", "2");
  cfg.set("rollouts_a", "2");
  cfg.set("rollouts_b", "2");
  return cfg;
}

}  // namespace

TEST_CASE("config parsing, overrides and typed reads") {
  RunConfig cfg = RunConfig::defaults();
  std::stringstream in("# comment\n\n  seed = 42 \niterations=7\ngrid.mask_b = walls , dist\n");
  cfg.read(in);
  CHECK(cfg.get_seed("seed") == 42);
  CHECK(cfg.get_int("iterations") == 7);
  CHECK(cfg.get_list("grid.mask_b") == std::vector<std::string>{"walls", "dist"});
  CHECK(cfg.get_bool("mvc.fallback"));

  std::stringstream out;
  cfg.write(out);
  RunConfig back = RunConfig::defaults();
  back.read(out);
  CHECK(back.values() == cfg.values());

  CHECK_THROWS_AS(cfg.set("no.such.key", "1"), std::invalid_argument);
  std::stringstream bad("seed 3\n");
  CHECK_THROWS_AS(cfg.read(bad), std::invalid_argument);
  cfg.set("iterations", "7x");
  CHECK_THROWS_AS(cfg.get_int("iterations"), std::invalid_argument);
  cfg.set("seed", "-1");
  CHECK_THROWS_AS(cfg.get_seed("seed"), std::invalid_argument);
  cfg.set("diagnostics", "maybe");
  CHECK_THROWS_AS(cfg.get_bool("diagnostics"), std::invalid_argument);
}

TEST_CASE("run modes") {
  for (RunMode m : {RunMode::copier, RunMode::single_a, RunMode::single_b}) CHECK(parse_run_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_run_mode("single-C"), std::invalid_argument);
}

TEST_CASE("split sizes sum to the instance count") {
  for (int n = 1; n <= 150; ++n) {
    const SplitSizes s = split_sizes(n);
    CHECK(s.train + s.validation + s.test == n);
    CHECK(s.train >= 1);
    CHECK(s.validation >= 0);
    CHECK(s.test >= 0);
  }
  const SplitSizes s = split_sizes(66);
  CHECK(s.train == 33);
  CHECK(s.validation == 13);
  CHECK(s.test == 20);
  CHECK_THROWS_AS(split_sizes(0), std::invalid_argument);
}

TEST_CASE("manifest round trip and validation") {
  const std::vector<ManifestEntry> m = {{"g000", "instances/g000.graph", "train"}, {"g001", "instances/g001.graph", "test"}};
  std::stringstream ss;
  write_manifest(ss, m);
  const auto back = read_manifest(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].id == "g001");
  CHECK(back[1].file == "instances/g001.graph");
  CHECK(back[1].split == "test");

  std::stringstream no_header("g000,x,train\n");
  CHECK_THROWS_AS(read_manifest(no_header), std::invalid_argument);
  std::stringstream bad_split("id,file,split\ng000,x,holdout\n");
  CHECK_THROWS_AS(read_manifest(bad_split), std::invalid_argument);
}

TEST_CASE("instance generation is deterministic and validated") {
  RunConfig cfg = small_mvc();
  const InstanceSet a = generate_instances(cfg), b = generate_instances(cfg);
  REQUIRE(a.instances.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a.graphs[i]->edges == b.graphs[i]->edges);
    CHECK(a.graphs[i]->n >= 8);
    CHECK(a.graphs[i]->n <= 12);
  }
  CHECK(a.split("train").size() == 5);
  CHECK(a.split("validation").size() == 2);
  CHECK(a.split("test").size() == 3);

  cfg.set("mvc.p", "1.5");
  CHECK_THROWS_AS(generate_instances(cfg), std::invalid_argument);

  RunConfig grid = small_grid();
  const InstanceSet g = generate_instances(grid);
  std::set<std::string> starts;
  for (const auto& inst : g.instances) starts.insert(inst->view_a->state_token());
  CHECK(starts.size() == 10);
  CHECK(starts.count("4,4") == 0);
  grid.set("instances", "25");
  CHECK_THROWS_AS(generate_instances(grid), std::invalid_argument);
}

TEST_CASE("initial policies match the environment's views") {
  const Policy ga = initial_policy(small_grid(), View::A);
  CHECK(ga.head == Head::state);
  CHECK(ga.features == 10);
  CHECK(ga.actions == 4);
  CHECK(initial_policy(small_grid(), View::B).features == 5);
  const Policy mb = initial_policy(small_mvc(), View::B);
  CHECK(mb.head == Head::candidate);
  CHECK(mb.features == mvc::kNodeFeatures);
  RunConfig tab = small_mvc();
  tab.set("a.arch", "tabular");
  CHECK_THROWS_AS(initial_policy(tab, View::A), std::invalid_argument);
}

TEST_CASE("bootstrap labels teach the optimal actions") {
  RunConfig cfg = small_grid();
  cfg.set("bootstrap.labels", "24");
  cfg.set("bootstrap.epochs", "300");
  const auto [a, b] = bootstrap_policies(cfg, initial_policy(cfg, View::A), initial_policy(cfg, View::B));
  const grid::GridConfig gc = grid_config(cfg);
  const auto sets = grid::optimal_action_sets(gc, grid::value_iteration(gc));
  int right = 0;
  for (const auto& [token, actions] : sets) {
    const auto act = greedy_action(a, grid::observe_cell(gc, gc.mask_a, grid::parse_cell_token(token)));
    right += std::find(actions.begin(), actions.end(), act) != actions.end();
  }
  CHECK(right == 24);
  cfg.set("bootstrap.labels", "0");
  const auto [a0, b0] = bootstrap_policies(cfg, initial_policy(cfg, View::A), initial_policy(cfg, View::B));
  CHECK(a0.params == initial_policy(cfg, View::A).params);
}

TEST_CASE("identical policies on both grid views agree everywhere") {
  RunConfig cfg = small_grid();
  cfg.set("grid.mask_b", "row,col");
  cfg.set("grid.noise", "0.2");
  const InstanceSet set = generate_instances(cfg);
  const Policy p = initial_policy(cfg, View::A);
  const GridBound gb = grid_bound(cfg, set.instances, p, p, 5, 3);
  long agree = 0;
  for (long n : gb.stats.n_agree) agree += n;
  CHECK(gb.stats.total > 0);
  CHECK(agree == gb.stats.total);
}

TEST_CASE("single-view history leaves exchange columns empty") {
  const RunConfig cfg = small_grid();
  const InstanceSet set = generate_instances(cfg);
  const TrainOutcome t = train(cfg, set, RunMode::single_a);
  CHECK(t.has_a);
  CHECK_FALSE(t.has_b);
  std::stringstream ss;
  write_history_csv(ss, "r", t);
  std::string header, row;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header.rfind("run_id,iteration,instance,view,eta_hat,direction,", 0) == 0);
  CHECK(row.find(",A,") != std::string::npos);
  CHECK(row.find(",,,,,") != std::string::npos);
  int rows = 1;
  while (std::getline(ss, row)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("evaluation rows take the better view") {
  const RunConfig cfg = small_mvc();
  const InstanceSet set = generate_instances(cfg);
  const TrainOutcome t = train(cfg, set, RunMode::copier);
  const auto rows = evaluate(cfg, set, t);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.final_reward == std::max(r.reward_a, r.reward_b));
    CHECK(r.solution_size == -static_cast<int>(r.final_reward));
  }
  std::stringstream ss;
  write_evaluation_csv(ss, "r", rows);
  std::string line, last;
  int n = 0;
  while (std::getline(ss, line)) ++n, last = line;
  CHECK(n == 5);
  CHECK(last.rfind("r,mean,", 0) == 0);
}

TEST_CASE("run directory commands are byte-reproducible and complete") {
  for (const RunConfig& cfg : {small_grid(), small_mvc()}) {
    const fs::path one = scratch("one"), two = scratch("two");
    for (const auto& dir : {one, two}) {
      cmd_generate(cfg, dir.string());
      CHECK(missing_outputs(dir.string(), RunMode::copier).size() == 4);
      cmd_train(cfg, dir.string(), RunMode::copier);
      cmd_evaluate(cfg, dir.string(), RunMode::copier);
      CHECK(missing_outputs(dir.string(), RunMode::copier).empty());
    }
    for (const char* f : {"config.txt", "manifest.csv", "history.csv", "evaluation.csv", "checkpoints/policy_a.txt",
                          "checkpoints/policy_b.txt"})
      CHECK(slurp(one / f) == slurp(two / f));
    CHECK_FALSE(slurp(one / "history.csv").empty());

    // Reloading the written instances reproduces the evaluation.
    const auto rows = cmd_evaluate(cfg, one.string(), RunMode::copier);
    CHECK(slurp(one / "evaluation.csv") == slurp(two / "evaluation.csv"));
    CHECK_FALSE(rows.empty());
  }
}

TEST_CASE("evaluation needs its checkpoints") {
  const RunConfig cfg = small_grid();
  const fs::path dir = scratch("nockpt");
  cmd_generate(cfg, dir.string());
  CHECK_THROWS_AS(cmd_evaluate(cfg, dir.string(), RunMode::single_b), std::invalid_argument);
  cmd_train(cfg, dir.string(), RunMode::single_a);
  CHECK_NOTHROW(cmd_evaluate(cfg, dir.string(), RunMode::single_a));
  CHECK(missing_outputs(dir.string(), RunMode::single_a).empty());
  CHECK(missing_outputs(dir.string(), RunMode::copier) == std::vector<std::string>{"checkpoints/policy_b.txt"});
}

TEST_CASE("number formatting") {
  CHECK(format_number(std::nan("")) == "");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(-3) == "-3");
  CHECK(format_number(0.1) == "0.1");
}
