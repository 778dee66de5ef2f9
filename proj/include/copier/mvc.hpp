#pragma once

// Minimum vertex cover in two views.
//
// View A (graph): actions select an unselected vertex, reward -1 each; the
// episode ends once the selection covers every edge.
//
// View B (ILP): the integer program  max -sum x_v  s.t. x_u + x_v >= 1 per edge,
// x in {0,1}^n  is searched by branch-and-bound. Actions choose which open node
// to expand next. The reward is 0 unless the expansion produces a better
// integral solution, in which case it is (new objective - previous incumbent
// objective), with the incumbent objective starting at the sentinel 0. The
// rewards of a run therefore telescope to the final incumbent objective, which
// equals the graph view's -|cover| for the same solution.

#include "copier/lp.hpp"
#include "copier/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace copier::mvc {

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  ///< u < v, no duplicates

  void validate() const;
  std::vector<std::vector<int>> adjacency() const;
};

/// The 5-vertex example graph (0-indexed; its minimum cover is {1, 2, 3}).
Graph example_graph();

/// Erdos-Renyi G(n, p); every unordered pair is kept independently with probability p.
Graph generate_er_graph(int n, double p, std::uint64_t seed);

/// `p <n> <m>` then m lines `e <u> <v>`, 0-indexed.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);

bool is_cover(const Graph& g, const std::vector<int>& assignment);
/// Exhaustive minimum cover size; n <= 24.
int brute_force_min_cover(const Graph& g);

// ---------------------------------------------------------------- graph view

struct GraphState {
  std::shared_ptr<const Graph> graph;
  std::vector<char> selected;

  static GraphState initial(std::shared_ptr<const Graph> g);
  bool is_terminal() const;
  std::string token() const;
  std::vector<int> legal_actions() const;
};

struct GraphStepResult {
  GraphState state;
  double reward = 0;
  bool terminal = false;
};

/// Adds `vertex` to the selection. Throws std::invalid_argument if it is already selected.
GraphStepResult graph_step(const GraphState& state, int vertex);

constexpr int kGraphCandidateFeatures = 3;  ///< degree/n, uncovered incident edges/n, has an uncovered leaf neighbour
constexpr int kGraphStateFeatures = 3;      ///< selected/n, uncovered edges/m, 1

class GraphEnv final : public Environment {
 public:
  GraphEnv(std::shared_ptr<const Graph> g, double gamma = 1.0);

  MdpSpec spec() const override;
  std::unique_ptr<Environment> clone() const override;
  bool terminal() const override;
  std::string state_token() const override;
  Observation observe() const override;
  double step(std::size_t choice, Rng& rng) override;

  const GraphState& state() const { return state_; }
  /// Selects a vertex by id regardless of terminal status (used by mappings).
  double select(int vertex);

 private:
  GraphState state_;
  double gamma_;
};

// ----------------------------------------------------------------- ILP view

struct IlpInstance {
  lp::ProblemD problem;
  std::vector<bool> integer;
};

IlpInstance build_ilp(const Graph& g);

enum class NodeStatus { open, expanded, pruned, integral_leaf, infeasible };
const char* to_string(NodeStatus s);

struct BnbNode {
  int id = 0;
  int parent = -1;
  int depth = 0;
  int branch_var = -1;    ///< variable fixed when this node was created
  int branch_value = -1;  ///< value it was fixed to
  Vector lower;
  Vector upper;
  lp::SolutionD lp;
  NodeStatus status = NodeStatus::open;

  /// One char per variable: '0'/'1' when fixed, '-' when free.
  std::string key() const;
};

constexpr double kIntegralityTolerance = 1e-6;

class BnbTree {
 public:
  /// Creates the root and solves its relaxation. budget <= 0 means unlimited.
  BnbTree(std::shared_ptr<const IlpInstance> ilp, int budget);

  const IlpInstance& ilp() const { return *ilp_; }
  const std::vector<BnbNode>& nodes() const { return nodes_; }
  const BnbNode& node(int id) const;
  const std::vector<int>& open() const { return open_; }

  bool has_incumbent() const { return has_incumbent_; }
  /// Sentinel 0 until the first integral solution is found.
  double incumbent_objective() const { return incumbent_objective_; }
  const std::vector<int>& incumbent() const { return incumbent_; }
  int budget() const { return budget_; }
  int expanded() const { return expanded_; }
  bool budget_exhausted() const { return budget_ > 0 && expanded_ >= budget_; }
  /// Best LP bound among open nodes; -inf when none are open.
  double best_open_bound() const;
  /// Open set empty, budget spent, or no open node can beat the incumbent.
  bool done() const;

 private:
  friend struct BnbAccess;
  friend double bnb_round_up_fallback(BnbTree& tree);
  int add_node(int parent, int var, int value);
  void close(int id, NodeStatus s);

  std::shared_ptr<const IlpInstance> ilp_;
  std::vector<BnbNode> nodes_;
  std::vector<int> open_;
  bool has_incumbent_ = false;
  double incumbent_objective_ = 0.0;
  std::vector<int> incumbent_;
  int budget_;
  int expanded_ = 0;
};

struct ExpandResult {
  double reward = 0;
  bool done = false;
};

/// Expands open node `node_id`: prune (infeasible or LP bound <= incumbent),
/// accept an improving integral solution, or branch on the most fractional
/// variable (lowest index on ties). Children have their relaxations solved on
/// creation. Throws std::invalid_argument if the node is not open and
/// std::logic_error if the budget is exhausted.
ExpandResult bnb_expand(BnbTree& tree, int node_id);

/// Like bnb_expand, but steers towards `target` (a feasible 0/1 assignment
/// consistent with the node's fixings): an integral relaxation that differs
/// from the target is branched on its first differing variable instead of
/// being accepted. Returns the reward and the id of the child on the target's
/// side (-1 once the target has been accepted).
std::pair<double, int> bnb_expand_toward(BnbTree& tree, int node_id, const std::vector<int>& target);

/// If the tree holds no incumbent, rounds the root relaxation up and, when
/// that is feasible, installs it as the incumbent. Returns the reward of doing
/// so (its objective minus the sentinel 0), or 0 if nothing changed.
double bnb_round_up_fallback(BnbTree& tree);

/// Node feature layout, kNodeFeatures entries:
///   0 LP objective, 1 depth / n, 2 max fractionality min(x, 1-x),
///   3 incumbent objective (sentinel 0), 4 best open LP bound,
///   5 gap = best bound - incumbent, 6 fraction of budget used,
///   7 1 if the node's branching fixed a variable to 1.
constexpr int kNodeFeatures = 8;
Vector bnb_node_features(const BnbTree& tree, int node_id);

constexpr int kTreeStateFeatures = 5;  ///< incumbent, best bound, gap, budget fraction, open/n

class IlpEnv final : public Environment {
 public:
  /// With `fallback`, an episode that ends without an integral solution closes
  /// with bnb_round_up_fallback, so every finished episode carries a solution.
  IlpEnv(std::shared_ptr<const IlpInstance> ilp, int budget, double gamma = 1.0, bool fallback = true);

  MdpSpec spec() const override;
  std::unique_ptr<Environment> clone() const override;
  bool terminal() const override;
  std::string state_token() const override;
  Observation observe() const override;
  double step(std::size_t choice, Rng& rng) override;
  bool solved() const override { return tree_.has_incumbent(); }

  const BnbTree& tree() const { return tree_; }
  BnbTree& tree() { return tree_; }

 private:
  BnbTree tree_;
  double gamma_;
  bool fallback_;
};

/// Parses the incumbent recorded in an ILP trajectory's final state token.
std::optional<std::vector<int>> incumbent_from_token(const std::string& token);

// ---------------------------------------------------------------- mappings

enum class SolutionDirection { assignment_to_cover, cover_to_assignment };

/// Assignment (0/1 per vertex) to the sorted cover {v : x_v = 1}, or a cover to
/// its indicator. Throws std::invalid_argument if the input is not feasible.
std::vector<int> map_solution(const Graph& g, SolutionDirection dir, const std::vector<int>& value);

/// Graph-view trajectory selecting `cover` in ascending vertex order.
Trajectory cover_to_graph_trajectory(std::shared_ptr<const Graph> g, const std::vector<int>& cover,
                                     double gamma = 1.0);

/// ILP-view branch-and-bound dive ending at the indicator of `cover`.
Trajectory cover_to_ilp_dive(std::shared_ptr<const IlpInstance> ilp, const std::vector<int>& cover,
                             int budget, double gamma = 1.0);

/// Cover selected by a complete graph-view trajectory (sorted).
std::vector<int> cover_from_graph_trajectory(const Graph& g, const Trajectory& traj);

struct MvcOptions {
  int node_budget = 500;
  double gamma_graph = 1.0;
  double gamma_ilp = 1.0;
  bool round_up_fallback = true;
};

/// Both views of one graph plus the trajectory mappings between them.
TwoViewInstance make_mvc_instance(std::shared_ptr<const Graph> g, std::string id, const MvcOptions& opt = {});

/// Branch-and-bound with depth-first node selection (deepest, then best bound,
/// then lowest id). Returns the best cover found; exact when budget <= 0.
std::vector<int> solve_cover(const Graph& g, int budget = 0);

/// Size of the cover carried by a trajectory of either view, if any.
std::optional<int> cover_size(const Trajectory& traj);

}  // namespace copier::mvc
