#include "copier/mvc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace copier::mvc {

namespace {

constexpr double kBoundTolerance = 1e-9;

std::string bits(const std::vector<int>& x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) s[i] = '1';
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_integral(const Vector& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (std::abs(x[j] - std::round(x[j])) > kIntegralityTolerance) return false;
  return true;
}

std::vector<int> rounded(const Vector& x) {
  std::vector<int> r(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) r[static_cast<std::size_t>(j)] = static_cast<int>(std::lround(x[j]));
  return r;
}

int most_fractional(const Vector& x) {
  int best = -1;
  double frac = kIntegralityTolerance;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
    if (f > frac) {
      frac = f;
      best = static_cast<int>(j);
    }
  }
  return best;
}

/// Open node ids ordered by key; this order defines choice indices.
std::vector<int> sorted_open(const BnbTree& tree) {
  std::vector<int> ids = tree.open();
  std::vector<std::pair<std::string, int>> keyed;
  keyed.reserve(ids.size());
  for (int id : ids) keyed.emplace_back(tree.node(id).key(), id);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = keyed[i].second;
  return ids;
}

std::string tree_token(const BnbTree& tree) {
  std::string canon;
  for (int id : sorted_open(tree)) {
    canon += tree.node(id).key();
    canon += '|';
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return std::string("t") + buf + ";inc=" + (tree.has_incumbent() ? bits(tree.incumbent()) : "none");
}

}  // namespace

// --------------------------------------------------------------------- graphs

void Graph::validate() const {
  if (n < 0) throw std::invalid_argument("graph: negative vertex count");
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("graph: edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range");
    if (u == v) throw std::invalid_argument("graph: self-loop at " + std::to_string(u));
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second)
      throw std::invalid_argument("graph: duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

Graph example_graph() { return Graph{5, {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 4}}}; }

Graph generate_er_graph(int n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_er_graph: n must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("generate_er_graph: p must lie in [0, 1]");
  Rng rng(seed);
  Graph g{n, {}};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) g.edges.emplace_back(u, v);
  return g;
}

void write_graph(std::ostream& os, const Graph& g) {
  os << "p " << g.n << ' ' << g.edges.size() << '\n';
  for (auto [u, v] : g.edges) os << "e " << u << ' ' << v << '\n';
}

Graph read_graph(std::istream& is) {
  std::string tag;
  Graph g;
  std::size_t m = 0;
  if (!(is >> tag >> g.n >> m) || tag != "p") throw std::runtime_error("graph file: expected 'p <n> <m>'");
  for (std::size_t i = 0; i < m; ++i) {
    int u, v;
    if (!(is >> tag >> u >> v) || tag != "e")
      throw std::runtime_error("graph file: expected edge line " + std::to_string(i + 1));
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  g.validate();
  return g;
}

bool is_cover(const Graph& g, const std::vector<int>& x) {
  if (static_cast<int>(x.size()) != g.n) return false;
  for (auto [u, v] : g.edges)
    if (!x[u] && !x[v]) return false;
  return true;
}

int brute_force_min_cover(const Graph& g) {
  if (g.n > 24) throw std::invalid_argument("brute_force_min_cover: n too large");
  std::vector<std::uint32_t> masks;
  for (auto [u, v] : g.edges) masks.push_back((1u << u) | (1u << v));
  int best = g.n;
  for (std::uint32_t s = 0; s < (1u << g.n); ++s) {
    const int size = __builtin_popcount(s);
    if (size >= best) continue;
    bool ok = true;
    for (auto m : masks)
      if (!(s & m)) {
        ok = false;
        break;
      }
    if (ok) best = size;
  }
  return best;
}

// ----------------------------------------------------------------- graph view

GraphState GraphState::initial(std::shared_ptr<const Graph> g) {
  GraphState s;
  s.selected.assign(static_cast<std::size_t>(g->n), 0);
  s.graph = std::move(g);
  return s;
}

bool GraphState::is_terminal() const {
  for (auto [u, v] : graph->edges)
    if (!selected[u] && !selected[v]) return false;
  return true;
}

std::string GraphState::token() const {
  std::string s = "g";
  for (char c : selected) s += c ? '1' : '0';
  return s;
}

std::vector<int> GraphState::legal_actions() const {
  std::vector<int> out;
  for (int v = 0; v < graph->n; ++v)
    if (!selected[v]) out.push_back(v);
  return out;
}

GraphStepResult graph_step(const GraphState& state, int vertex) {
  if (vertex < 0 || vertex >= state.graph->n)
    throw std::invalid_argument("graph_step: vertex " + std::to_string(vertex) + " out of range");
  if (state.selected[vertex]) throw std::invalid_argument("graph_step: vertex " + std::to_string(vertex) + " already selected");
  GraphStepResult r{state, -1.0, false};
  r.state.selected[vertex] = 1;
  r.terminal = r.state.is_terminal();
  return r;
}

GraphEnv::GraphEnv(std::shared_ptr<const Graph> g, double gamma)
    : state_(GraphState::initial(std::move(g))), gamma_(gamma) {
  state_.graph->validate();
}

MdpSpec GraphEnv::spec() const { return {View::A, gamma_, std::max(1, state_.graph->n)}; }

std::unique_ptr<Environment> GraphEnv::clone() const { return std::make_unique<GraphEnv>(*this); }

bool GraphEnv::terminal() const { return state_.is_terminal(); }

std::string GraphEnv::state_token() const { return state_.token(); }

Observation GraphEnv::observe() const {
  const Graph& g = *state_.graph;
  const double n = std::max(1, g.n);
  std::vector<int> degree(g.n, 0), uncovered(g.n, 0);
  int open_edges = 0;
  for (auto [u, v] : g.edges) {
    ++degree[u];
    ++degree[v];
    if (!state_.selected[u] && !state_.selected[v]) {
      ++uncovered[u];
      ++uncovered[v];
      ++open_edges;
    }
  }
  // Flags vertices adjacent to a vertex whose only uncovered edge they share;
  // some minimum cover of the remaining edges always contains them.
  std::vector<int> leaf_neighbor(g.n, 0);
  for (auto [u, v] : g.edges) {
    if (state_.selected[u] || state_.selected[v]) continue;
    if (uncovered[v] == 1) leaf_neighbor[u] = 1;
    if (uncovered[u] == 1) leaf_neighbor[v] = 1;
  }
  const auto legal = state_.legal_actions();
  Observation obs;
  int picked = 0;
  for (char c : state_.selected) picked += c ? 1 : 0;
  obs.state = Vector(kGraphStateFeatures);
  obs.state << picked / n, open_edges / static_cast<double>(std::max<std::size_t>(1, g.edges.size())), 1.0;
  obs.candidates = Matrix(static_cast<Eigen::Index>(legal.size()), kGraphCandidateFeatures);
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const int v = legal[i];
    obs.candidates.row(static_cast<Eigen::Index>(i)) << degree[v] / n, uncovered[v] / n, leaf_neighbor[v];
    obs.actions.push_back("v" + std::to_string(v));
  }
  return obs;
}

double GraphEnv::step(std::size_t choice, Rng&) {
  const auto legal = state_.legal_actions();
  if (choice >= legal.size()) throw std::invalid_argument("graph view: choice out of range");
  return select(legal[choice]);
}

double GraphEnv::select(int vertex) {
  auto r = graph_step(state_, vertex);
  state_ = std::move(r.state);
  return r.reward;
}

// ------------------------------------------------------------------ ILP view

IlpInstance build_ilp(const Graph& g) {
  g.validate();
  IlpInstance ilp;
  ilp.problem = lp::ProblemD::with_variables(g.n);
  ilp.problem.objective.setConstant(-1.0);
  ilp.problem.upper.setOnes();
  ilp.problem.constraints = Matrix::Zero(static_cast<Eigen::Index>(g.edges.size()), g.n);
  ilp.problem.rhs = Vector::Ones(static_cast<Eigen::Index>(g.edges.size()));
  ilp.problem.senses.assign(g.edges.size(), lp::Sense::greater_equal);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    ilp.problem.constraints(static_cast<Eigen::Index>(i), g.edges[i].first) = 1.0;
    ilp.problem.constraints(static_cast<Eigen::Index>(i), g.edges[i].second) = 1.0;
  }
  ilp.integer.assign(static_cast<std::size_t>(g.n), true);
  return ilp;
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::open: return "open";
    case NodeStatus::expanded: return "expanded";
    case NodeStatus::pruned: return "pruned";
    case NodeStatus::integral_leaf: return "integral_leaf";
    case NodeStatus::infeasible: return "infeasible";
  }
  return "?";
}

std::string BnbNode::key() const {
  std::string k(static_cast<std::size_t>(lower.size()), '-');
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (lower[j] == upper[j]) k[static_cast<std::size_t>(j)] = lower[j] == 0 ? '0' : '1';
  }
  return k;
}

struct BnbAccess {
  static BnbNode& node(BnbTree& t, int id) { return t.nodes_.at(static_cast<std::size_t>(id)); }
  static void close(BnbTree& t, int id, NodeStatus s) { t.close(id, s); }
  static int add(BnbTree& t, int parent, int var, int value) { return t.add_node(parent, var, value); }
  static void count_expansion(BnbTree& t) { ++t.expanded_; }
  static void accept(BnbTree& t, double objective, std::vector<int> x) {
    t.has_incumbent_ = true;
    t.incumbent_objective_ = objective;
    t.incumbent_ = std::move(x);
  }
};

BnbTree::BnbTree(std::shared_ptr<const IlpInstance> ilp, int budget) : ilp_(std::move(ilp)), budget_(budget) {
  ilp_->problem.validate();
  add_node(-1, -1, -1);
  if (ilp_->problem.num_variables() == 0 && !open_.empty()) {
    // Nothing to decide: the empty assignment is the solution.
    close(0, NodeStatus::integral_leaf);
    has_incumbent_ = true;
  }
}

const BnbNode& BnbTree::node(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) throw std::invalid_argument("no node " + std::to_string(id));
  return nodes_[static_cast<std::size_t>(id)];
}

int BnbTree::add_node(int parent, int var, int value) {
  BnbNode nd;
  nd.id = static_cast<int>(nodes_.size());
  nd.parent = parent;
  if (parent < 0) {
    nd.lower = ilp_->problem.lower;
    nd.upper = ilp_->problem.upper;
  } else {
    const BnbNode& p = nodes_[static_cast<std::size_t>(parent)];
    nd.depth = p.depth + 1;
    nd.lower = p.lower;
    nd.upper = p.upper;
    nd.lower[var] = value;
    nd.upper[var] = value;
  }
  nd.branch_var = var;
  nd.branch_value = value;
  lp::ProblemD prob = ilp_->problem;
  prob.lower = nd.lower;
  prob.upper = nd.upper;
  nd.lp = lp::solve_lp(prob);
  if (nd.lp.status == lp::Status::optimal) {
    nd.status = NodeStatus::open;
    open_.push_back(nd.id);
  } else {
    nd.status = NodeStatus::infeasible;
  }
  nodes_.push_back(std::move(nd));
  return nodes_.back().id;
}

void BnbTree::close(int id, NodeStatus s) {
  auto it = std::find(open_.begin(), open_.end(), id);
  if (it == open_.end()) throw std::invalid_argument("node " + std::to_string(id) + " is not open");
  open_.erase(it);
  nodes_[static_cast<std::size_t>(id)].status = s;
}

double BnbTree::best_open_bound() const {
  double best = -std::numeric_limits<double>::infinity();
  for (int id : open_) best = std::max(best, nodes_[static_cast<std::size_t>(id)].lp.objective);
  return best;
}

bool BnbTree::done() const {
  if (open_.empty() || budget_exhausted()) return true;
  return has_incumbent_ && best_open_bound() <= incumbent_objective_ + kBoundTolerance;
}

namespace {

void check_expandable(const BnbTree& tree, int node_id) {
  if (tree.node(node_id).status != NodeStatus::open)
    throw std::invalid_argument("bnb_expand: node " + std::to_string(node_id) + " is " +
                                to_string(tree.node(node_id).status));
  if (tree.budget_exhausted()) throw std::logic_error("bnb_expand: node budget exhausted");
}

double integral_objective(const BnbTree& tree, const std::vector<int>& x) {
  double obj = 0;
  for (std::size_t j = 0; j < x.size(); ++j) obj += tree.ilp().problem.objective[static_cast<Eigen::Index>(j)] * x[j];
  return obj;
}

// Accepts an integral solution; returns the reward (new objective minus the
// previous incumbent objective, sentinel 0 before the first one).
double accept(BnbTree& tree, int node_id, std::vector<int> x) {
  const double obj = integral_objective(tree, x);
  const double reward = obj - tree.incumbent_objective();
  BnbAccess::accept(tree, obj, std::move(x));
  BnbAccess::close(tree, node_id, NodeStatus::integral_leaf);
  return reward;
}

void branch(BnbTree& tree, int node_id, int var) {
  BnbAccess::close(tree, node_id, NodeStatus::expanded);
  BnbAccess::add(tree, node_id, var, 0);
  BnbAccess::add(tree, node_id, var, 1);
}

}  // namespace

ExpandResult bnb_expand(BnbTree& tree, int node_id) {
  check_expandable(tree, node_id);
  BnbAccess::count_expansion(tree);
  const BnbNode& nd = tree.node(node_id);
  ExpandResult r;
  if (tree.has_incumbent() && nd.lp.objective <= tree.incumbent_objective() + kBoundTolerance) {
    BnbAccess::close(tree, node_id, NodeStatus::pruned);
  } else if (is_integral(nd.lp.x)) {
    r.reward = accept(tree, node_id, rounded(nd.lp.x));
  } else {
    branch(tree, node_id, most_fractional(nd.lp.x));
  }
  r.done = tree.done();
  return r;
}

std::pair<double, int> bnb_expand_toward(BnbTree& tree, int node_id, const std::vector<int>& target) {
  check_expandable(tree, node_id);
  const BnbNode& nd = tree.node(node_id);
  if (static_cast<Eigen::Index>(target.size()) != nd.lp.x.size())
    throw std::invalid_argument("bnb_expand_toward: target has the wrong length");
  if (tree.has_incumbent() && nd.lp.objective <= tree.incumbent_objective() + kBoundTolerance)
    throw std::logic_error("bnb_expand_toward: node on the target path would be pruned");
  BnbAccess::count_expansion(tree);
  int var = -1;
  if (is_integral(nd.lp.x)) {
    const auto x = rounded(nd.lp.x);
    if (x == target) return {accept(tree, node_id, x), -1};
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] != target[j]) {
        var = static_cast<int>(j);
        break;
      }
  } else {
    var = most_fractional(nd.lp.x);
  }
  branch(tree, node_id, var);
  const int child = static_cast<int>(tree.nodes().size()) - 2 + target[static_cast<std::size_t>(var)];
  if (tree.node(child).status != NodeStatus::open)
    throw std::logic_error("bnb_expand_toward: target is not feasible under the node's fixings");
  return {0.0, child};
}

double bnb_round_up_fallback(BnbTree& tree) {
  if (tree.has_incumbent_) return 0.0;
  const BnbNode& root = tree.node(0);
  if (root.lp.status != lp::Status::optimal) return 0.0;
  Vector x = root.lp.x;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    x[j] = std::min(root.upper[j], std::ceil(x[j] - kIntegralityTolerance));
  if (lp::max_violation(tree.ilp().problem, x) > kBoundTolerance) return 0.0;
  const auto assignment = rounded(x);
  const double obj = integral_objective(tree, assignment);
  BnbAccess::accept(tree, obj, assignment);
  return obj;
}

Vector bnb_node_features(const BnbTree& tree, int node_id) {
  const BnbNode& nd = tree.node(node_id);
  if (nd.lp.status != lp::Status::optimal) throw std::invalid_argument("bnb_node_features: node has no LP solution");
  const double n = std::max<double>(1.0, static_cast<double>(nd.lp.x.size()));
  double frac = 0;
  for (Eigen::Index j = 0; j < nd.lp.x.size(); ++j) frac = std::max(frac, std::min(nd.lp.x[j], 1.0 - nd.lp.x[j]));
  const double inc = tree.incumbent_objective();
  const double bound = tree.open().empty() ? nd.lp.objective : tree.best_open_bound();
  Vector f(kNodeFeatures);
  f << nd.lp.objective, nd.depth / n, std::max(0.0, frac), inc, bound, bound - inc,
      tree.budget() > 0 ? static_cast<double>(tree.expanded()) / tree.budget() : 0.0,
      nd.branch_value == 1 ? 1.0 : 0.0;
  return f;
}

IlpEnv::IlpEnv(std::shared_ptr<const IlpInstance> ilp, int budget, double gamma, bool fallback)
    : tree_(std::move(ilp), budget), gamma_(gamma), fallback_(fallback) {}

MdpSpec IlpEnv::spec() const { return {View::B, gamma_, tree_.budget() > 0 ? tree_.budget() : (1 << 20)}; }

std::unique_ptr<Environment> IlpEnv::clone() const { return std::make_unique<IlpEnv>(*this); }

bool IlpEnv::terminal() const { return tree_.done(); }

std::string IlpEnv::state_token() const { return tree_token(tree_); }

Observation IlpEnv::observe() const {
  const auto ids = sorted_open(tree_);
  Observation obs;
  const double n = std::max<double>(1.0, static_cast<double>(tree_.ilp().problem.num_variables()));
  const double inc = tree_.incumbent_objective();
  const double bound = ids.empty() ? 0.0 : tree_.best_open_bound();
  obs.state = Vector(kTreeStateFeatures);
  obs.state << inc, bound, bound - inc,
      tree_.budget() > 0 ? static_cast<double>(tree_.expanded()) / tree_.budget() : 0.0,
      static_cast<double>(ids.size()) / n;
  obs.candidates = Matrix(static_cast<Eigen::Index>(ids.size()), kNodeFeatures);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    obs.candidates.row(static_cast<Eigen::Index>(i)) = bnb_node_features(tree_, ids[i]).transpose();
    obs.actions.push_back(tree_.node(ids[i]).key());
  }
  return obs;
}

double IlpEnv::step(std::size_t choice, Rng&) {
  const auto ids = sorted_open(tree_);
  if (choice >= ids.size()) throw std::invalid_argument("ILP view: choice out of range");
  double reward = bnb_expand(tree_, ids[choice]).reward;
  if (fallback_ && tree_.done()) reward += bnb_round_up_fallback(tree_);
  return reward;
}

std::optional<std::vector<int>> incumbent_from_token(const std::string& token) {
  const auto pos = token.find(";inc=");
  if (pos == std::string::npos) throw std::invalid_argument("not an ILP-view state token: " + token);
  const std::string b = token.substr(pos + 5);
  if (b == "none") return std::nullopt;
  std::vector<int> x;
  for (char c : b) {
    if (c != '0' && c != '1') throw std::invalid_argument("malformed incumbent in token: " + token);
    x.push_back(c == '1');
  }
  return x;
}

// ------------------------------------------------------------------ mappings

std::vector<int> map_solution(const Graph& g, SolutionDirection dir, const std::vector<int>& value) {
  if (dir == SolutionDirection::assignment_to_cover) {
    if (static_cast<int>(value.size()) != g.n) throw std::invalid_argument("map_solution: assignment has wrong length");
    for (int x : value)
      if (x != 0 && x != 1) throw std::invalid_argument("map_solution: assignment is not 0/1");
    if (!is_cover(g, value)) throw std::invalid_argument("map_solution: assignment violates an edge constraint");
    std::vector<int> cover;
    for (int v = 0; v < g.n; ++v)
      if (value[v]) cover.push_back(v);
    return cover;
  }
  std::vector<int> x(static_cast<std::size_t>(g.n), 0);
  for (int v : value) {
    if (v < 0 || v >= g.n) throw std::invalid_argument("map_solution: vertex out of range");
    if (x[v]) throw std::invalid_argument("map_solution: repeated vertex");
    x[v] = 1;
  }
  if (!is_cover(g, x)) throw std::invalid_argument("map_solution: vertex set is not a cover");
  return x;
}

Trajectory cover_to_graph_trajectory(std::shared_ptr<const Graph> g, const std::vector<int>& cover, double gamma) {
  std::vector<int> sorted = cover;
  std::sort(sorted.begin(), sorted.end());
  map_solution(*g, SolutionDirection::cover_to_assignment, sorted);
  GraphEnv env(std::move(g), gamma);
  Trajectory t;
  t.view = View::A;
  for (int v : sorted) {
    Step s;
    s.state = env.state_token();
    s.obs = env.observe();
    const auto legal = env.state().legal_actions();
    s.choice = static_cast<std::size_t>(std::find(legal.begin(), legal.end(), v) - legal.begin());
    s.action = "v" + std::to_string(v);
    s.reward = env.select(v);
    t.steps.push_back(std::move(s));
  }
  t.final_state = env.state_token();
  t.complete = env.terminal();
  t.solved = true;
  return t;
}

Trajectory cover_to_ilp_dive(std::shared_ptr<const IlpInstance> ilp, const std::vector<int>& cover, int budget,
                             double gamma) {
  const auto n = static_cast<std::size_t>(ilp->problem.num_variables());
  std::vector<int> target(n, 0);
  for (int v : cover) target.at(static_cast<std::size_t>(v)) = 1;
  IlpEnv env(std::move(ilp), budget, gamma, false);
  Trajectory t;
  t.view = View::B;
  int node = env.terminal() ? -1 : 0;
  if (node == 0 && env.tree().node(0).status != NodeStatus::open)
    throw std::logic_error("cover_to_ilp_dive: root relaxation infeasible");
  while (node >= 0) {
    Step s;
    s.state = env.state_token();
    s.obs = env.observe();
    const auto ids = sorted_open(env.tree());
    s.choice = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), node) - ids.begin());
    s.action = env.tree().node(node).key();
    auto [reward, child] = bnb_expand_toward(env.tree(), node, target);
    s.reward = reward;
    t.steps.push_back(std::move(s));
    node = child;
  }
  t.final_state = env.state_token();
  t.complete = true;
  t.solved = env.solved();
  return t;
}

std::vector<int> cover_from_graph_trajectory(const Graph& g, const Trajectory& traj) {
  std::vector<int> x(static_cast<std::size_t>(g.n), 0);
  for (const auto& s : traj.steps) {
    if (s.action.size() < 2 || s.action[0] != 'v') throw std::invalid_argument("not a graph-view action: " + s.action);
    x.at(static_cast<std::size_t>(std::stoi(s.action.substr(1)))) = 1;
  }
  return map_solution(g, SolutionDirection::assignment_to_cover, x);
}

TwoViewInstance make_mvc_instance(std::shared_ptr<const Graph> g, std::string id, const MvcOptions& opt) {
  auto ilp = std::make_shared<const IlpInstance>(build_ilp(*g));
  TwoViewInstance inst;
  inst.id = std::move(id);
  inst.view_a = std::make_shared<GraphEnv>(g, opt.gamma_graph);
  inst.view_b = std::make_shared<IlpEnv>(ilp, opt.node_budget, opt.gamma_ilp, opt.round_up_fallback);
  inst.a_to_b = {Direction::a_to_b, [g, ilp, opt](const Trajectory& t) {
                   return cover_to_ilp_dive(ilp, cover_from_graph_trajectory(*g, t), opt.node_budget, opt.gamma_ilp);
                 }};
  inst.b_to_a = {Direction::b_to_a, [g, opt](const Trajectory& t) {
                   const auto x = incumbent_from_token(t.final_state);
                   if (!x) throw std::invalid_argument("ILP-view trajectory found no integral solution");
                   return cover_to_graph_trajectory(
                       g, map_solution(*g, SolutionDirection::assignment_to_cover, *x), opt.gamma_graph);
                 }};
  return inst;
}

std::vector<int> solve_cover(const Graph& g, int budget) {
  BnbTree tree(std::make_shared<const IlpInstance>(build_ilp(g)), budget);
  while (!tree.done()) {
    int pick = -1;
    for (int id : tree.open()) {
      if (pick < 0) {
        pick = id;
        continue;
      }
      const auto& a = tree.node(id);
      const auto& b = tree.node(pick);
      if (a.depth > b.depth || (a.depth == b.depth && a.lp.objective > b.lp.objective) ||
          (a.depth == b.depth && a.lp.objective == b.lp.objective && a.id < b.id))
        pick = id;
    }
    bnb_expand(tree, pick);
  }
  if (!tree.has_incumbent()) {
    std::vector<int> all(static_cast<std::size_t>(g.n));
    for (int v = 0; v < g.n; ++v) all[v] = v;
    return all;
  }
  return map_solution(g, SolutionDirection::assignment_to_cover, tree.incumbent());
}

std::optional<int> cover_size(const Trajectory& traj) {
  if (!traj.complete || !traj.solved) return std::nullopt;
  return static_cast<int>(std::lround(-traj.total_reward()));
}

}  // namespace copier::mvc
