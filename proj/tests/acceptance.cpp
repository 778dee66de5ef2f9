// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "oracles.hpp"

#include "copier/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace copier;
using namespace copier::harness;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ------------------------------------------------------------- criterion 1

Outcome example_graph_cover() {
  auto g = std::make_shared<const mvc::Graph>(mvc::example_graph());
  mvc::MvcOptions opt;
  opt.node_budget = 20;
  auto inst = std::make_shared<const TwoViewInstance>(mvc::make_mvc_instance(g, "example", opt));
  CopierConfig cc;
  cc.iterations = 10;
  cc.rollouts_a = 4;
  cc.rollouts_b = 4;
  cc.seed = 11;
  cc.update_a.learning_rate = cc.update_b.learning_rate = 0.05;
  const Policy a = Policy::random(Architecture::linear, Head::candidate, mvc::kGraphCandidateFeatures, 0, 0, 1);
  const Policy b = Policy::random(Architecture::linear, Head::candidate, mvc::kNodeFeatures, 0, 0, 2);
  const TrainResult r = copier_train(uniform_sampler({inst}), a, b, cc);
  const FinalResult f = copier_final(r.policy_a, r.policy_b, *inst, {0});
  const auto size = mvc::cover_size(f.best);
  std::vector<int> cover(static_cast<std::size_t>(g->n), 0);
  if (f.view == View::A) {
    for (int v : mvc::cover_from_graph_trajectory(*g, f.best)) cover[static_cast<std::size_t>(v)] = 1;
  } else if (const auto inc = mvc::incumbent_from_token(f.best.final_state)) {
    cover = *inc;
  }
  Outcome o;
  o.pass = size && *size == 3 && mvc::is_cover(*g, cover) && oracle::min_cover(g->n, g->edges) == 3;
  o.detail = "cover size " + (size ? std::to_string(*size) : std::string("none")) + " from view " + to_string(f.view);
  return o;
}

// ------------------------------------------------------------- criterion 2

Outcome bnb_matches_enumeration() {
  Rng rng(2);
  int matches = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 11));
    const mvc::Graph g = mvc::generate_er_graph(n, uniform(rng, 0.15, 0.7), rng());
    // Expand open nodes in random order: optimality must not depend on the order.
    mvc::BnbTree tree(std::make_shared<const mvc::IlpInstance>(mvc::build_ilp(g)), 0);
    while (!tree.done()) {
      const auto& open = tree.open();
      mvc::bnb_expand(tree, open[uniform_index(rng, open.size())]);
    }
    const int best = oracle::min_cover(g.n, g.edges);
    if (tree.has_incumbent() && tree.incumbent_objective() == -best && mvc::is_cover(g, tree.incumbent()) &&
        static_cast<int>(mvc::solve_cover(g, 0).size()) == best)
      ++matches;
  }
  return {matches == 50, std::to_string(matches) + "/50 graphs (n <= 12) exact"};
}

// ------------------------------------------------------------- criterion 3

Outcome lp_matches_half_integral() {
  Rng rng(3);
  double worst = 0;
  int solved = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 9));
    const mvc::Graph g = mvc::generate_er_graph(n, uniform(rng, 0.2, 0.8), rng());
    const auto s = lp::solve_lp(mvc::build_ilp(g).problem);
    if (s.status != lp::Status::optimal) continue;
    ++solved;
    worst = std::max(worst, std::abs(s.objective + oracle::half_integral_lp_min(g.n, g.edges)));
  }
  return {solved == 100 && worst <= 1e-7, std::to_string(solved) + "/100 optimal, max |error| " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------- criterion 4

Outcome pac_triple() {
  DisagreementStats s(2);
  s.n_a = {20000, 20000};
  s.n_b = {20000, 20000};
  s.n_agree = {20000, 20000};
  s.total = 40000;
  const BoundReport r = pac_disagreement_bound(s, 32, 32, 0.05);
  const auto want = oracle::pac(64, 2, 0.05, 20000, 1.0, 0.0);
  double worst = 0;
  for (int i = 0; i < 2; ++i)
    worst = std::max({worst, std::abs(r.eps[i] - want.eps), std::abs(r.zeta[i] - want.zeta), std::abs(r.b[i] - want.b)});
  const bool reference = std::abs(want.eps - 0.034908) <= 1e-6 && std::abs(want.zeta - 0.930184) <= 1e-6 &&
                         std::abs(want.b - 0.037528) <= 1e-6;
  return {reference && worst <= 1e-6,
          "eps " + fmt("%.6f", r.eps[0]) + " zeta " + fmt("%.6f", r.zeta[0]) + " b " + fmt("%.6f", r.b[0])};
}

// ------------------------------------------------------------- criterion 5

// 3x3 grid with the goal in the centre, so every action is optimal somewhere.
// A sees row and column, B sees only the four wall bits; each view alone
// determines the optimal action, as the bound's independence assumption needs
// the views to carry separate evidence about it.
RunConfig bound_trial_config(int trial) {
  RunConfig cfg = RunConfig::defaults();
  cfg.set("env", "grid");
  cfg.set("seed", std::to_string(1000 + trial));
  cfg.set("grid.width", "3");
  cfg.set("grid.height", "3");
  cfg.set("grid.goal_row", "1");
  cfg.set("grid.goal_col", "1");
  cfg.set("grid.mask_a", "row,col");
  cfg.set("grid.mask_b", "walls");
  cfg.set("grid.noise", "0.1");
  cfg.set("grid.horizon", "20");
  cfg.set("instances", "8");
  cfg.set("mode", "shared_action");
  cfg.set("a.lr", "0.1");
  cfg.set("b.lr", "0.1");
  cfg.set("rollouts_a", "4");
  cfg.set("rollouts_b", "4");
  // Training lengths vary across trials so the policy pairs range from
  // untrained to converged.
  cfg.set("iterations", std::to_string(1 + 40 * (trial % 6)));
  return cfg;
}

Outcome bound_validity() {
  int qualifying = 0, holds = 0, holds_strict = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const RunConfig cfg = bound_trial_config(trial);
    InstanceSet set = generate_instances(cfg);
    for (auto& e : set.manifest) e.split = "train";
    const TrainOutcome t = train(cfg, set, RunMode::copier);
    const std::uint64_t seed = derive_seed(cfg.get_seed("seed"), {700});
    const int rollouts = 4000;
    const GridBound gb = grid_bound(cfg, set.instances, t.policy_a, t.policy_b, rollouts, seed);
    if (!gb.report.all_valid) continue;
    ++qualifying;
    if (gb.epsilon_a <= gb.report.max_b) ++holds;
    // Also against the single lowest-index optimal policy, for reference only.
    const grid::GridConfig gc = grid_config(cfg);
    std::vector<Trajectory> runs;
    for (std::size_t i = 0; i < set.instances.size(); ++i)
      for (int r = 0; r < rollouts; ++r)
        runs.push_back(greedy_trajectory(t.policy_a, *set.instances[i]->view_a,
                                         derive_seed(seed, {i, static_cast<std::uint64_t>(r)})));
    const double strict = measure_policy_error(t.policy_a, grid::optimal_actions(gc, grid::value_iteration(gc)), runs);
    if (strict <= gb.report.max_b) ++holds_strict;
  }
  const double rate = qualifying ? static_cast<double>(holds) / qualifying : 0.0;
  return {qualifying >= 10 && rate >= 0.95,
          std::to_string(holds) + "/" + std::to_string(qualifying) + " qualifying trials with eps_A <= max b (" +
              fmt("%.3f", rate) + "); against the lowest-index optimal policy " + std::to_string(holds_strict) + "/" +
              std::to_string(qualifying)};
}

// ------------------------------------------------------------- criterion 6

Vector random_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng, -1, 1);
  return v;
}

Observation random_obs(const Policy& p, Rng& rng) {
  Observation o;
  if (p.head == Head::state) {
    o.state = random_vector(rng, p.features);
    for (int i = 0; i < p.actions; ++i) o.actions.push_back(std::to_string(i));
  } else {
    const int rows = 1 + static_cast<int>(uniform_index(rng, 6));
    o.candidates = Matrix(rows, p.features);
    for (int r = 0; r < rows; ++r) o.candidates.row(r) = random_vector(rng, p.features).transpose();
    for (int i = 0; i < rows; ++i) o.actions.push_back(std::to_string(i));
  }
  return o;
}

Vector central_difference(const Policy& p, const std::function<double(const Policy&)>& f) {
  const double h = 1e-6;
  Vector g(p.params.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    Vector up = p.params, dn = p.params;
    up[i] += h;
    dn[i] -= h;
    g[i] = (f(p.with_params(up)) - f(p.with_params(dn))) / (2 * h);
  }
  return g;
}

double relative_error(const Vector& got, const Vector& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-8);
}

Outcome gradients() {
  Rng rng(6);
  const struct {
    Architecture arch;
    Head head;
  } kinds[] = {{Architecture::tabular, Head::state}, {Architecture::linear, Head::state}, {Architecture::mlp, Head::state},
               {Architecture::linear, Head::candidate}, {Architecture::mlp, Head::candidate}};
  double worst = 0;
  int cases = 0;
  for (const auto& kd : kinds)
    for (int t = 0; t < 100; ++t) {
      Policy p = Policy::zeros(kd.arch, kd.head, 4, kd.head == Head::state ? 3 : 0, kd.arch == Architecture::mlp ? 5 : 0);
      p = p.with_params(random_vector(rng, p.params.size()));
      const Observation o = random_obs(p, rng);
      const std::size_t a = uniform_index(rng, o.num_choices());
      const Vector score = log_prob_gradient(p, o, a);
      const Vector score_fd = central_difference(p, [&](const Policy& q) {
        return std::log(action_distribution(q, o)[static_cast<Eigen::Index>(a)]);
      });
      std::vector<Demo> demos;
      for (int i = 0; i < 4; ++i) {
        Demo d;
        d.obs = random_obs(p, rng);
        d.choice = uniform_index(rng, d.obs.num_choices());
        demos.push_back(d);
      }
      const Vector bc = behavior_cloning_loss(p, demos).gradient;
      const Vector bc_fd =
          central_difference(p, [&](const Policy& q) { return behavior_cloning_loss(q, demos).loss; });
      worst = std::max({worst, relative_error(score, score_fd), relative_error(bc, bc_fd)});
      ++cases;
    }
  return {worst <= 1e-4, std::to_string(cases) + " cases over 5 architecture/head pairs, max relative error " +
                             fmt("%.2e", worst)};
}

// ------------------------------------------------------------- criteria 7, 8

struct PreservationTally {
  long exchanged = 0;
  long preserved = 0;
};

void tally(const TrainOutcome& t, PreservationTally& p) {
  for (const auto& r : t.history.records) {
    p.exchanged += r.exchanged;
    p.preserved += r.preserved;
  }
}

double mean_final(const std::vector<EvalRow>& rows) {
  double s = 0;
  for (const auto& r : rows) s += r.final_reward;
  return s / static_cast<double>(rows.size());
}

RunConfig grid_improvement_config(int seed) {
  RunConfig cfg = RunConfig::defaults();
  cfg.set("env", "grid");
  cfg.set("seed", std::to_string(seed));
  cfg.set("instances", "24");
  cfg.set("iterations", "30");
  cfg.set("grid.noise", "0");
  return cfg;
}

RunConfig mvc_improvement_config() {
  RunConfig cfg = RunConfig::defaults();
  cfg.set("env", "mvc");
  cfg.set("seed", "7");
  cfg.set("instances", "66");  // 33 train, 13 validation, 20 test
  cfg.set("mvc.node_budget", "30");
  cfg.set("iterations", "20");
  cfg.set("rollouts_a", "8");
  cfg.set("rollouts_b", "4");
  return cfg;
}

Outcome grid_improvement(PreservationTally& pres) {
  double copier_sum = 0, single_sum = 0, range_sum = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const RunConfig cfg = grid_improvement_config(seed);
    const InstanceSet set = generate_instances(cfg);
    const TrainOutcome co = train(cfg, set, RunMode::copier);
    tally(co, pres);
    const double c = mean_final(evaluate(cfg, set, co));
    const double sa = mean_final(evaluate(cfg, set, train(cfg, set, RunMode::single_a)));
    const double sb = mean_final(evaluate(cfg, set, train(cfg, set, RunMode::single_b)));
    copier_sum += c;
    single_sum += std::max(sa, sb);
    // Return range over the test starts: optimal return down to the return of
    // a run that never reaches the goal within the horizon.
    const grid::GridConfig gc = grid_config(cfg);
    const auto vt = grid::value_iteration(gc);
    double r = 0;
    const auto test = set.split("test");
    for (const auto& inst : test)
      r += vt.value[grid::cell_index(gc, grid::parse_cell_token(inst->view_a->state_token()))] -
           gc.step_reward * gc.horizon();
    range_sum += r / static_cast<double>(test.size());
  }
  const double copier_mean = copier_sum / 10, single_mean = single_sum / 10, range = range_sum / 10;
  return {copier_mean >= single_mean - 0.01 * range,
          "grid: copier " + fmt("%.4f", copier_mean) + " vs best single view " + fmt("%.4f", single_mean) +
              " (1% of range " + fmt("%.3f", 0.01 * range) + ")"};
}

Outcome mvc_improvement(PreservationTally& pres) {
  const RunConfig cfg = mvc_improvement_config();
  const InstanceSet set = generate_instances(cfg);
  const TrainOutcome co = train(cfg, set, RunMode::copier);
  tally(co, pres);
  const auto copier_rows = evaluate(cfg, set, co);
  // Baseline: the two views trained alone, then the same best-of-both selection.
  TrainOutcome single;
  single.mode = RunMode::copier;
  single.policy_a = train(cfg, set, RunMode::single_a).policy_a;
  single.policy_b = train(cfg, set, RunMode::single_b).policy_b;
  single.has_a = single.has_b = true;
  const auto single_rows = evaluate(cfg, set, single);
  auto mean_size = [](const std::vector<EvalRow>& rows, bool& ok) {
    double s = 0;
    for (const auto& r : rows) {
      ok = ok && r.solution_size >= 0;
      s += r.solution_size;
    }
    return s / static_cast<double>(rows.size());
  };
  bool ok = copier_rows.size() == 20 && single_rows.size() == 20;
  const double c = mean_size(copier_rows, ok), s = mean_size(single_rows, ok);
  return {ok && c <= s, "mvc: copier mean cover " + fmt("%.3f", c) + " vs single-view pair " + fmt("%.3f", s) +
                            " on " + std::to_string(copier_rows.size()) + " test graphs"};
}

// ------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void full_run(const RunConfig& cfg, const fs::path& dir) {
  fs::remove_all(dir);
  cmd_generate(cfg, dir.string());
  cmd_train(cfg, dir.string(), RunMode::copier);
  cmd_evaluate(cfg, dir.string(), RunMode::copier);
}

Outcome reproducibility(const fs::path& work) {
  RunConfig grid_cfg = grid_improvement_config(3);
  grid_cfg.set("diagnostics", "true");
  RunConfig mvc_cfg = mvc_improvement_config();
  mvc_cfg.set("instances", "12");
  mvc_cfg.set("iterations", "4");
  mvc_cfg.set("diagnostics", "true");
  int files = 0, identical = 0;
  for (const auto& [name, cfg] : {std::pair{"grid", grid_cfg}, std::pair{"mvc", mvc_cfg}}) {
    const fs::path one = work / (std::string(name) + "-1"), two = work / (std::string(name) + "-2");
    full_run(cfg, one);
    full_run(cfg, two);
    if (!missing_outputs(one.string(), RunMode::copier).empty()) continue;
    for (const char* f : {"manifest.csv", "history.csv", "evaluation.csv"}) {
      ++files;
      const std::string x = slurp(one / f);
      if (!x.empty() && x == slurp(two / f)) ++identical;
    }
  }
  return {files == 6 && identical == files, std::to_string(identical) + "/6 CSV files byte-identical across reruns"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "copier-acceptance";
  fs::create_directories(work);
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_seconds, const std::function<Outcome()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < limit_seconds;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << ' ' << id << ' ' << name << ": " << o.detail << " ["
              << fmt("%.2f", secs) << " s, limit " << fmt("%.0f", limit_seconds) << " s]" << std::endl;
  };

  PreservationTally grid_pres, mvc_pres;
  report(1, "example graph cover", 5, example_graph_cover);
  report(2, "branch and bound optimality", 120, bnb_matches_enumeration);
  report(3, "LP relaxation oracle", 60, lp_matches_half_integral);
  report(4, "PAC bound reference values", 1, pac_triple);
  report(5, "PAC bound empirical validity", 300, bound_validity);
  report(6, "gradient correctness", 60, gradients);
  Outcome grid_part, mvc_part;
  report(7, "co-training improvement", 1800, [&] {
    grid_part = grid_improvement(grid_pres);
    mvc_part = mvc_improvement(mvc_pres);
    return Outcome{grid_part.pass && mvc_part.pass, grid_part.detail + "; " + mvc_part.detail};
  });
  report(8, "reward preservation", 1, [&] {
    const bool grid_ok = grid_pres.exchanged > 0 && grid_pres.preserved == grid_pres.exchanged;
    const bool mvc_ok = mvc_pres.exchanged > 0 && mvc_pres.preserved == mvc_pres.exchanged;
    return Outcome{grid_ok && mvc_ok, "grid " + std::to_string(grid_pres.preserved) + "/" +
                                          std::to_string(grid_pres.exchanged) + ", mvc " +
                                          std::to_string(mvc_pres.preserved) + "/" + std::to_string(mvc_pres.exchanged) +
                                          " exchanged trajectories kept their total reward"};
  });
  report(9, "reproducibility", 600, [&] { return reproducibility(work); });
  return failures == 0 ? 0 : 1;
}
