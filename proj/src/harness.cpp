#include "copier/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace copier::harness {

namespace {

const std::vector<std::pair<std::string, std::string>>& default_values() {
  static const std::vector<std::pair<std::string, std::string>> v = {
      {"run_id", "run"},
      {"env", "grid"},
      {"seed", "1"},
      {"instances", "20"},
      {"mvc.n_min", "20"},
      {"mvc.n_max", "40"},
      {"mvc.p", "0.15"},
      {"mvc.node_budget", "50"},
      {"mvc.fallback", "true"},
      {"grid.width", "5"},
      {"grid.height", "5"},
      {"grid.goal_row", "4"},
      {"grid.goal_col", "4"},
      {"grid.noise", "0"},
      {"grid.step_reward", "-1"},
      {"grid.goal_reward", "0"},
      {"grid.gamma", "1"},
      {"grid.horizon", "0"},
      {"grid.mask_a", "row,col"},
      {"grid.mask_b", "dist,walls"},
      {"iterations", "20"},
      {"rollouts_a", "8"},
      {"rollouts_b", "8"},
      {"mode", "general"},
      {"diagnostics", "false"},
      {"a.arch", "linear"},
      {"a.hidden", "8"},
      {"a.update", "rl_with_il"},
      {"a.lambda", "1"},
      {"a.lr", "0.05"},
      {"a.surrogate", "nll"},
      {"a.gamma", "1"},
      {"b.arch", "linear"},
      {"b.hidden", "8"},
      {"b.update", "rl_with_il"},
      {"b.lambda", "1"},
      {"b.lr", "0.05"},
      {"b.surrogate", "nll"},
      {"b.gamma", "1"},
      {"bootstrap.labels", "0"},
      {"bootstrap.epochs", "100"},
      {"bootstrap.lr", "0.5"},
      {"eval.seeds", "1"},
      {"eval.sample", "false"},
      {"eval.bound_rollouts", "50"},
      {"sigma", "0.05"},
  };
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T, typename Parse>
T parse_value(const std::string& key, const std::string& text, Parse parse) {
  std::size_t used = 0;
  T v{};
  try {
    v = parse(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != text.size()) throw std::invalid_argument("config: " + key + " = '" + text + "' is not a valid number");
  return v;
}

bool is_grid(const RunConfig& cfg) {
  const std::string& env = cfg.get("env");
  if (env == "grid") return true;
  if (env == "mvc") return false;
  throw std::invalid_argument("config: env must be mvc or grid, got '" + env + "'");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return is;
}

UpdateConfig update_config(const RunConfig& cfg, const std::string& prefix) {
  UpdateConfig u;
  u.mode = parse_update_mode(cfg.get(prefix + "update"));
  u.lambda = cfg.get_double(prefix + "lambda");
  u.learning_rate = cfg.get_double(prefix + "lr");
  u.surrogate = parse_surrogate(cfg.get(prefix + "surrogate"));
  u.gamma = cfg.get_double(prefix + "gamma");
  u.validate();
  return u;
}

std::string instance_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return std::string(buf);
}

std::shared_ptr<const TwoViewInstance> grid_instance(const grid::GridConfig& gc, grid::Cell start,
                                                     const std::string& id) {
  auto inst = std::make_shared<TwoViewInstance>(grid::make_two_view_grid(gc, start));
  inst->id = id;
  return inst;
}

std::vector<std::uint64_t> eval_seeds(const RunConfig& cfg) {
  const int n = cfg.get_int("eval.seeds");
  if (n < 1) throw std::invalid_argument("config: eval.seeds must be at least 1");
  std::vector<std::uint64_t> seeds;
  for (int j = 0; j < n; ++j) seeds.push_back(derive_seed(cfg.get_seed("seed"), {400, static_cast<std::uint64_t>(j)}));
  return seeds;
}

std::string cell(bool present, double x) { return present ? format_number(x) : ""; }

}  // namespace

// ------------------------------------------------------------------ RunConfig

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (const auto& [k, v] : default_values()) c.values_[k] = v;
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second = value;
}

void RunConfig::read(std::istream& is) {
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void RunConfig::load(const std::string& path) {
  auto is = open_in(path);
  read(is);
}

void RunConfig::write(std::ostream& os) const {
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  return parse_value<int>(key, get(key), [](const std::string& s, std::size_t* n) { return std::stoi(s, n); });
}

double RunConfig::get_double(const std::string& key) const {
  return parse_value<double>(key, get(key), [](const std::string& s, std::size_t* n) { return std::stod(s, n); });
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const std::string& s = get(key);
  if (s.empty() || s[0] == '-') throw std::invalid_argument("config: " + key + " must be a nonnegative integer");
  return parse_value<std::uint64_t>(key, s, [](const std::string& t, std::size_t* n) { return std::stoull(t, n); });
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: " + key + " must be true or false");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::copier: return "copier";
    case RunMode::single_a: return "single-A";
    case RunMode::single_b: return "single-B";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "copier") return RunMode::copier;
  if (s == "single-A") return RunMode::single_a;
  if (s == "single-B") return RunMode::single_b;
  throw std::invalid_argument("unknown mode '" + s + "' (copier, single-A or single-B)");
}

// ------------------------------------------------------------------ manifest

SplitSizes split_sizes(int n) {
  if (n < 1) throw std::invalid_argument("split_sizes: need at least one instance");
  SplitSizes s;
  s.train = std::max(1, n / 2);
  s.validation = std::min(n - s.train, n / 5);
  s.test = n - s.train - s.validation;
  return s;
}

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& entries) {
  os << "id,file,split\n";
  for (const auto& e : entries) os << e.id << ',' << e.file << ',' << e.split << '\n';
}

std::vector<ManifestEntry> read_manifest(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "id,file,split")
    throw std::invalid_argument("manifest: missing header id,file,split");
  std::vector<ManifestEntry> out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(trim(line));
    ManifestEntry e;
    if (!std::getline(ss, e.id, ',') || !std::getline(ss, e.file, ',') || !std::getline(ss, e.split))
      throw std::invalid_argument("manifest: bad row '" + line + "'");
    if (e.split != "train" && e.split != "validation" && e.split != "test")
      throw std::invalid_argument("manifest: unknown split '" + e.split + "'");
    out.push_back(e);
  }
  return out;
}

// ------------------------------------------------------------------ settings

grid::GridConfig grid_config(const RunConfig& cfg) {
  grid::GridConfig c;
  c.width = cfg.get_int("grid.width");
  c.height = cfg.get_int("grid.height");
  c.goal = {cfg.get_int("grid.goal_row"), cfg.get_int("grid.goal_col")};
  c.start = c.goal == grid::Cell{0, 0} ? grid::Cell{c.height - 1, c.width - 1} : grid::Cell{0, 0};
  c.noise = cfg.get_double("grid.noise");
  c.step_reward = cfg.get_double("grid.step_reward");
  c.goal_reward = cfg.get_double("grid.goal_reward");
  c.gamma = cfg.get_double("grid.gamma");
  c.horizon_cap = cfg.get_int("grid.horizon");
  c.mask_a = grid::feature_mask(c, cfg.get_list("grid.mask_a"));
  c.mask_b = grid::feature_mask(c, cfg.get_list("grid.mask_b"));
  c.validate();
  return c;
}

mvc::MvcOptions mvc_options(const RunConfig& cfg) {
  mvc::MvcOptions o;
  o.node_budget = cfg.get_int("mvc.node_budget");
  o.round_up_fallback = cfg.get_bool("mvc.fallback");
  o.gamma_graph = cfg.get_double("a.gamma");
  o.gamma_ilp = cfg.get_double("b.gamma");
  if (o.node_budget < 1) throw std::invalid_argument("config: mvc.node_budget must be positive");
  return o;
}

CopierConfig copier_config(const RunConfig& cfg) {
  CopierConfig c;
  c.iterations = cfg.get_int("iterations");
  c.rollouts_a = cfg.get_int("rollouts_a");
  c.rollouts_b = cfg.get_int("rollouts_b");
  c.update_a = update_config(cfg, "a.");
  c.update_b = update_config(cfg, "b.");
  c.mode = parse_exchange_mode(cfg.get("mode"));
  c.seed = derive_seed(cfg.get_seed("seed"), {200});
  c.diagnostics = cfg.get_bool("diagnostics");
  c.validate();
  return c;
}

Policy initial_policy(const RunConfig& cfg, View view) {
  const std::string prefix = view == View::A ? "a." : "b.";
  const Architecture arch = parse_architecture(cfg.get(prefix + "arch"));
  const int hidden = arch == Architecture::mlp ? cfg.get_int(prefix + "hidden") : 0;
  const std::uint64_t seed = derive_seed(cfg.get_seed("seed"), {300, view == View::A ? 0u : 1u});
  if (is_grid(cfg)) {
    const grid::GridConfig gc = grid_config(cfg);
    const int d = static_cast<int>((view == View::A ? gc.mask_a : gc.mask_b).size());
    return Policy::random(arch, Head::state, d, grid::kActions, hidden, seed);
  }
  if (arch == Architecture::tabular) throw std::invalid_argument("config: mvc views need a linear or mlp policy");
  const int d = view == View::A ? mvc::kGraphCandidateFeatures : mvc::kNodeFeatures;
  return Policy::random(arch, Head::candidate, d, 0, hidden, seed);
}

// ------------------------------------------------------------------ instances

std::vector<std::shared_ptr<const TwoViewInstance>> InstanceSet::split(const std::string& name) const {
  std::vector<std::shared_ptr<const TwoViewInstance>> out;
  for (std::size_t i = 0; i < manifest.size(); ++i)
    if (manifest[i].split == name) out.push_back(instances[i]);
  return out;
}

std::vector<std::shared_ptr<const mvc::Graph>> InstanceSet::split_graphs(const std::string& name) const {
  std::vector<std::shared_ptr<const mvc::Graph>> out;
  for (std::size_t i = 0; i < manifest.size() && i < graphs.size(); ++i)
    if (manifest[i].split == name) out.push_back(graphs[i]);
  return out;
}

namespace {

std::vector<ManifestEntry> make_manifest(int n, const std::string& prefix, const std::string& ext) {
  const SplitSizes s = split_sizes(n);
  std::vector<ManifestEntry> m;
  for (int i = 0; i < n; ++i) {
    const std::string id = prefix + instance_id(i);
    const char* split = i < s.train ? "train" : i < s.train + s.validation ? "validation" : "test";
    m.push_back({id, "instances/" + id + ext, split});
  }
  return m;
}

}  // namespace

InstanceSet generate_instances(const RunConfig& cfg) {
  const int n = cfg.get_int("instances");
  const std::uint64_t seed = cfg.get_seed("seed");
  InstanceSet set;
  if (is_grid(cfg)) {
    const grid::GridConfig gc = grid_config(cfg);
    std::vector<grid::Cell> cells;
    for (int r = 0; r < gc.height; ++r)
      for (int c = 0; c < gc.width; ++c)
        if (!(grid::Cell{r, c} == gc.goal)) cells.push_back({r, c});
    if (n < 1 || n > static_cast<int>(cells.size()))
      throw std::invalid_argument("config: grid instances must lie in [1, " + std::to_string(cells.size()) + "]");
    // Distinct start cells: a partial Fisher-Yates shuffle.
    Rng rng(derive_seed(seed, {100}));
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i) + uniform_index(rng, cells.size() - static_cast<std::size_t>(i));
      std::swap(cells[static_cast<std::size_t>(i)], cells[j]);
    }
    set.manifest = make_manifest(n, "s", ".start");
    for (int i = 0; i < n; ++i)
      set.instances.push_back(grid_instance(gc, cells[static_cast<std::size_t>(i)], set.manifest[static_cast<std::size_t>(i)].id));
    return set;
  }
  const int n_min = cfg.get_int("mvc.n_min"), n_max = cfg.get_int("mvc.n_max");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("config: need 1 <= mvc.n_min <= mvc.n_max");
  const double p = cfg.get_double("mvc.p");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("config: mvc.p must lie in [0, 1]");
  const mvc::MvcOptions opt = mvc_options(cfg);
  set.manifest = make_manifest(n, "g", ".graph");
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng rng(derive_seed(seed, {100, idx}));
    const int size = n_min + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n_max - n_min + 1)));
    auto g = std::make_shared<const mvc::Graph>(mvc::generate_er_graph(size, p, derive_seed(seed, {101, idx})));
    set.graphs.push_back(g);
    set.instances.push_back(
        std::make_shared<TwoViewInstance>(mvc::make_mvc_instance(g, set.manifest[static_cast<std::size_t>(i)].id, opt)));
  }
  return set;
}

InstanceSet cmd_generate(const RunConfig& cfg, const std::string& dir) {
  InstanceSet set = generate_instances(cfg);
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "instances", ec);
  if (ec) throw std::runtime_error("cannot create " + (root / "instances").string() + ": " + ec.message());
  {
    auto os = open_out(root / "config.txt");
    cfg.write(os);
  }
  {
    auto os = open_out(root / "manifest.csv");
    write_manifest(os, set.manifest);
  }
  for (std::size_t i = 0; i < set.manifest.size(); ++i) {
    auto os = open_out(root / set.manifest[i].file);
    if (is_grid(cfg)) {
      const auto start = grid::parse_cell_token(set.instances[i]->view_a->state_token());
      os << "start " << start.row << ' ' << start.col << '\n';
    } else {
      mvc::write_graph(os, *set.graphs[i]);
    }
  }
  return set;
}

InstanceSet load_instances(const RunConfig& cfg, const std::string& dir) {
  const fs::path root(dir);
  InstanceSet set;
  {
    auto is = open_in(root / "manifest.csv");
    set.manifest = read_manifest(is);
  }
  const bool grid_env = is_grid(cfg);
  const grid::GridConfig gc = grid_env ? grid_config(cfg) : grid::GridConfig{};
  const mvc::MvcOptions opt = grid_env ? mvc::MvcOptions{} : mvc_options(cfg);
  for (const auto& e : set.manifest) {
    auto is = open_in(root / e.file);
    if (grid_env) {
      std::string word;
      grid::Cell start;
      if (!(is >> word >> start.row >> start.col) || word != "start")
        throw std::invalid_argument(e.file + ": expected 'start <row> <col>'");
      set.instances.push_back(grid_instance(gc, start, e.id));
    } else {
      auto g = std::make_shared<const mvc::Graph>(mvc::read_graph(is));
      set.graphs.push_back(g);
      set.instances.push_back(std::make_shared<TwoViewInstance>(mvc::make_mvc_instance(g, e.id, opt)));
    }
  }
  return set;
}

std::pair<Policy, Policy> bootstrap_policies(const RunConfig& cfg, Policy a, Policy b) {
  const int labels = cfg.get_int("bootstrap.labels");
  if (labels <= 0 || !is_grid(cfg)) return {std::move(a), std::move(b)};
  const grid::GridConfig gc = grid_config(cfg);
  const auto optimal = grid::optimal_actions(gc, grid::value_iteration(gc));
  std::vector<std::pair<std::string, std::size_t>> pool(optimal.begin(), optimal.end());
  if (labels > static_cast<int>(pool.size()))
    throw std::invalid_argument("config: bootstrap.labels exceeds the number of non-goal cells");
  Rng rng(derive_seed(cfg.get_seed("seed"), {600}));
  std::vector<Demo> demos_a, demos_b;
  for (int i = 0; i < labels; ++i) {
    const auto j = static_cast<std::size_t>(i) + uniform_index(rng, pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    const auto& [token, action] = pool[static_cast<std::size_t>(i)];
    const grid::Cell c = grid::parse_cell_token(token);
    demos_a.push_back({token, grid::observe_cell(gc, gc.mask_a, c), action, {}});
    demos_b.push_back({token, grid::observe_cell(gc, gc.mask_b, c), action, {}});
  }
  const double lr = cfg.get_double("bootstrap.lr");
  const int epochs = cfg.get_int("bootstrap.epochs");
  return {pretrain_behavior_cloning(a, demos_a, lr, epochs), pretrain_behavior_cloning(b, demos_b, lr, epochs)};
}

// ------------------------------------------------------------------ training

TrainOutcome train(const RunConfig& cfg, const InstanceSet& set, RunMode mode) {
  const auto pool = set.split("train");
  if (pool.empty()) throw std::invalid_argument("train: the manifest has no training instances");
  const CopierConfig cc = copier_config(cfg);
  auto [a, b] = bootstrap_policies(cfg, initial_policy(cfg, View::A), initial_policy(cfg, View::B));
  const InstanceSampler sampler = uniform_sampler(pool);
  TrainOutcome out;
  out.mode = mode;
  switch (mode) {
    case RunMode::copier: {
      TrainResult r = copier_train(sampler, a, b, cc);
      out.policy_a = std::move(r.policy_a);
      out.policy_b = std::move(r.policy_b);
      out.has_a = out.has_b = true;
      out.history = std::move(r.history);
      break;
    }
    case RunMode::single_a: {
      SingleViewResult r = train_single_view(sampler, a, View::A, cc);
      out.policy_a = std::move(r.policy);
      out.has_a = true;
      out.history = std::move(r.history);
      break;
    }
    case RunMode::single_b: {
      SingleViewResult r = train_single_view(sampler, b, View::B, cc);
      out.policy_b = std::move(r.policy);
      out.has_b = true;
      out.history = std::move(r.history);
      break;
    }
  }
  return out;
}

namespace {

const char* kHistoryHeader =
    "run_id,iteration,instance,view,eta_hat,direction,demos_received,dropped,exchanged,preserved,"
    "alpha_hat,beta_hat_d1,beta_hat_d2,delta_hat_1,delta_hat_2,wall_time,status";

void history_row(std::ostream& os, const std::string& run_id, const TrainRecord& r, View view, bool exchange) {
  const bool a = view == View::A;
  os << run_id << ',' << r.iteration << ',' << r.instance << ',' << to_string(view) << ','
     << format_number(a ? r.eta_hat_a : r.eta_hat_b) << ',';
  if (exchange)
    os << r.direction << ',' << (a ? r.demos_b_to_a : r.demos_a_to_b) << ',' << r.dropped << ',' << r.exchanged << ','
       << r.preserved << ',';
  else
    os << ",,,,,";
  if (r.diagnostics) {
    const auto& d = *r.diagnostics;
    os << format_number(a ? d.alpha_hat_a : d.alpha_hat_b) << ',' << format_number(d.beta_hat_d1) << ','
       << format_number(d.beta_hat_d2) << ',' << format_number(d.delta_hat_1) << ',' << format_number(d.delta_hat_2)
       << ',';
  } else {
    os << ",,,,,";
  }
  // Wall time stays empty so that repeated runs write identical bytes.
  os << ",ok\n";
}

}  // namespace

void write_history_csv(std::ostream& os, const std::string& run_id, const TrainOutcome& outcome) {
  os << kHistoryHeader << '\n';
  const bool exchange = outcome.mode == RunMode::copier;
  for (const auto& r : outcome.history.records) {
    if (outcome.has_a) history_row(os, run_id, r, View::A, exchange);
    if (outcome.has_b) history_row(os, run_id, r, View::B, exchange);
  }
}

// ------------------------------------------------------------------ evaluation

GridBound grid_bound(const RunConfig& cfg, const std::vector<std::shared_ptr<const TwoViewInstance>>& instances,
                     const Policy& a, const Policy& b, int rollouts, std::uint64_t seed) {
  if (rollouts < 1) throw std::invalid_argument("grid_bound: need at least one rollout");
  const grid::GridConfig gc = grid_config(cfg);
  const auto sets = grid::optimal_action_sets(gc, grid::value_iteration(gc));
  std::vector<Trajectory> all;
  GridBound out;
  out.stats = DisagreementStats(grid::kActions);
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (int r = 0; r < rollouts; ++r) {
      Trajectory t = greedy_trajectory(a, *instances[i]->view_a,
                                       derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)}));
      // B sees the same cell through its own mask, which is what the A->B
      // mapping does; rendering it here also covers runs cut off by the horizon.
      for (const auto& s : t.steps) {
        const Observation ob = grid::observe_cell(gc, gc.mask_b, grid::parse_cell_token(s.state));
        out.stats.add(greedy_action(a, s.obs), greedy_action(b, ob));
      }
      all.push_back(std::move(t));
    }
  out.epsilon_a = measure_policy_error(a, sets, all);
  out.report = pac_disagreement_bound(out.stats, a.description_bits(), b.description_bits(), cfg.get_double("sigma"));
  return out;
}

std::vector<EvalRow> evaluate(const RunConfig& cfg, const InstanceSet& set, const TrainOutcome& trained) {
  const auto seeds = eval_seeds(cfg);
  const bool sample = cfg.get_bool("eval.sample");
  const bool grid_env = is_grid(cfg);
  const int bound_rollouts = cfg.get_int("eval.bound_rollouts");
  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < set.manifest.size(); ++i) {
    if (set.manifest[i].split != "test") continue;
    const TwoViewInstance& inst = *set.instances[i];
    EvalRow row;
    row.instance = inst.id;
    Trajectory best;
    if (trained.has_a && trained.has_b) {
      const FinalResult f = copier_final(trained.policy_a, trained.policy_b, inst, seeds, sample);
      row.has_a = row.has_b = true;
      row.reward_a = f.best_a.total_reward();
      row.reward_b = f.best_b.total_reward();
      row.final_view = f.view;
      best = f.best;
    } else {
      const View v = trained.has_a ? View::A : View::B;
      best = best_rollout(v == View::A ? trained.policy_a : trained.policy_b, inst.env(v), seeds, sample);
      (v == View::A ? row.has_a : row.has_b) = true;
      (v == View::A ? row.reward_a : row.reward_b) = best.total_reward();
      row.final_view = v;
    }
    row.final_reward = best.total_reward();
    if (!grid_env && best.solved) {
      if (const auto size = mvc::cover_size(best)) row.solution_size = *size;
    }
    if (grid_env && trained.has_a && trained.has_b && bound_rollouts > 0) {
      const GridBound gb = grid_bound(cfg, {set.instances[i]}, trained.policy_a, trained.policy_b, bound_rollouts,
                                      derive_seed(cfg.get_seed("seed"), {500, static_cast<std::uint64_t>(i)}));
      row.has_bound = true;
      row.epsilon_a = gb.epsilon_a;
      row.max_b = gb.report.max_b;
      row.bound_valid = gb.report.all_valid;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_evaluation_csv(std::ostream& os, const std::string& run_id, const std::vector<EvalRow>& rows) {
  os << "run_id,instance,reward_a,reward_b,final_reward,final_view,solution_size,epsilon_a,max_b,bound_valid\n";
  double sum_a = 0, sum_b = 0, sum_final = 0, sum_size = 0, sum_eps = 0, sum_b_max = 0;
  int sizes = 0, bounds = 0, valid = 0;
  for (const auto& r : rows) {
    os << run_id << ',' << r.instance << ',' << cell(r.has_a, r.reward_a) << ',' << cell(r.has_b, r.reward_b) << ','
       << format_number(r.final_reward) << ',' << to_string(r.final_view) << ','
       << (r.solution_size >= 0 ? std::to_string(r.solution_size) : "") << ',' << cell(r.has_bound, r.epsilon_a)
       << ',' << cell(r.has_bound, r.max_b) << ',' << (r.has_bound ? (r.bound_valid ? "1" : "0") : "") << '\n';
    sum_a += r.reward_a;
    sum_b += r.reward_b;
    sum_final += r.final_reward;
    if (r.solution_size >= 0) sum_size += r.solution_size, ++sizes;
    if (r.has_bound) {
      ++bounds;
      sum_eps += r.epsilon_a;
      if (r.bound_valid) sum_b_max += r.max_b, ++valid;
    }
  }
  if (rows.empty()) return;
  const double n = static_cast<double>(rows.size());
  const bool has_a = rows.front().has_a, has_b = rows.front().has_b;
  const double nan = std::nan("");
  os << run_id << ",mean," << cell(has_a, sum_a / n) << ',' << cell(has_b, sum_b / n) << ','
     << format_number(sum_final / n) << ",," << format_number(sizes ? sum_size / sizes : nan) << ','
     << format_number(bounds ? sum_eps / bounds : nan) << ',' << format_number(valid ? sum_b_max / valid : nan) << ','
     << format_number(bounds ? static_cast<double>(valid) / bounds : nan) << '\n';
}

// ------------------------------------------------------------------ commands

namespace {

const char* checkpoint_name(View v) { return v == View::A ? "checkpoints/policy_a.txt" : "checkpoints/policy_b.txt"; }

}  // namespace

TrainOutcome cmd_train(const RunConfig& cfg, const std::string& dir, RunMode mode) {
  const fs::path root(dir);
  const InstanceSet set = load_instances(cfg, dir);
  {
    auto os = open_out(root / "config.txt");
    cfg.write(os);
  }
  const std::string run_id = cfg.get("run_id");
  TrainOutcome out;
  try {
    out = train(cfg, set, mode);
  } catch (const std::exception& e) {
    auto os = open_out(root / "history.csv");
    os << kHistoryHeader << '\n';
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    os << run_id << ",,,,,,,,,,,,,,,,aborted: " << msg << '\n';
    std::cerr << "train aborted: " << e.what() << '\n';
    throw;
  }
  {
    auto os = open_out(root / "history.csv");
    write_history_csv(os, run_id, out);
  }
  fs::create_directories(root / "checkpoints");
  if (out.has_a) save_policy((root / checkpoint_name(View::A)).string(), out.policy_a);
  if (out.has_b) save_policy((root / checkpoint_name(View::B)).string(), out.policy_b);
  return out;
}

std::vector<EvalRow> cmd_evaluate(const RunConfig& cfg, const std::string& dir, RunMode mode) {
  const fs::path root(dir);
  const InstanceSet set = load_instances(cfg, dir);
  TrainOutcome trained;
  trained.mode = mode;
  trained.has_a = mode != RunMode::single_b;
  trained.has_b = mode != RunMode::single_a;
  for (View v : {View::A, View::B}) {
    if (!(v == View::A ? trained.has_a : trained.has_b)) continue;
    const fs::path p = root / checkpoint_name(v);
    if (!fs::exists(p)) throw std::invalid_argument("missing checkpoint " + p.string());
    (v == View::A ? trained.policy_a : trained.policy_b) = load_policy(p.string());
  }
  const auto rows = evaluate(cfg, set, trained);
  auto os = open_out(root / "evaluation.csv");
  write_evaluation_csv(os, cfg.get("run_id"), rows);
  return rows;
}

std::vector<std::string> missing_outputs(const std::string& dir, RunMode mode) {
  std::vector<std::string> required = {"config.txt", "manifest.csv", "history.csv", "evaluation.csv"};
  if (mode != RunMode::single_b) required.emplace_back(checkpoint_name(View::A));
  if (mode != RunMode::single_a) required.emplace_back(checkpoint_name(View::B));
  std::vector<std::string> missing;
  for (const auto& f : required)
    if (!fs::exists(fs::path(dir) / f)) missing.push_back(f);
  return missing;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (x == 0) x = 0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace copier::harness
