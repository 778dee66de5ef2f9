#pragma once

// Gridworld with a shared action space {up, down, left, right} and two views
// that see different subsets of one full feature vector per cell.

#include "copier/mdp.hpp"

#include <map>
#include <string>
#include <vector>

namespace copier::grid {

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum Action : int { up = 0, down = 1, left = 2, right = 3 };
constexpr int kActions = 4;
const char* action_name(int a);

struct GridConfig {
  int width = 5;
  int height = 5;
  Cell start{0, 0};
  Cell goal{4, 4};
  double step_reward = -1.0;
  double goal_reward = 0.0;  ///< added to the step that enters the goal
  double gamma = 0.99;
  double noise = 0.0;  ///< probability that the move goes in a uniformly random direction
  int horizon_cap = 0;  ///< 0 means 4 * width * height
  std::vector<int> mask_a;
  std::vector<int> mask_b;

  void validate() const;
  int cells() const { return width * height; }
  int horizon() const { return horizon_cap > 0 ? horizon_cap : 4 * width * height; }
};

/// Full feature vector layout: [row one-hot (height)] [column one-hot (width)]
/// [Manhattan distance to goal / (width + height - 2)] [wall above, below, left, right].
int full_feature_count(const GridConfig& c);
Vector full_features(const GridConfig& c, Cell cell);

/// Indices of named feature groups ("row", "col", "dist", "walls", or one wall:
/// "wall_up", "wall_down", "wall_left", "wall_right"), concatenated in the given order.
std::vector<int> feature_mask(const GridConfig& c, const std::vector<std::string>& groups);

std::string cell_token(Cell c);
Cell parse_cell_token(const std::string& token);

/// Deterministic successor of `cell` under action `a` (walls block movement).
Cell move(const GridConfig& c, Cell cell, int a);

class GridEnv final : public Environment {
 public:
  GridEnv(GridConfig config, View view, Cell start);

  MdpSpec spec() const override;
  std::unique_ptr<Environment> clone() const override;
  bool terminal() const override;
  std::string state_token() const override;
  Observation observe() const override;
  double step(std::size_t choice, Rng& rng) override;

  Cell cell() const { return cell_; }
  const std::vector<int>& mask() const { return mask_; }

 private:
  GridConfig config_;
  View view_;
  std::vector<int> mask_;
  Cell cell_;
};

/// Observation of `cell` under one view's mask.
Observation observe_cell(const GridConfig& c, const std::vector<int>& mask, Cell cell);

/// Both views from `start` (config.start when omitted); the mappings re-render
/// each step's observation under the other mask and leave everything else unchanged.
TwoViewInstance make_two_view_grid(const GridConfig& config);
TwoViewInstance make_two_view_grid(const GridConfig& config, Cell start);

// ------------------------------------------------------------- value iteration

struct Transition {
  int next = 0;
  double prob = 0;
  double reward = 0;
};

/// Finite MDP given by explicit transition lists. Terminal states are absorbing
/// with value 0.
struct TabularMdp {
  int states = 0;
  int actions = 0;
  double gamma = 1.0;
  std::vector<char> terminal;
  std::vector<std::vector<std::vector<Transition>>> transitions;  ///< [s][a]
};

struct ValueTable {
  Vector value;                     ///< V*(s)
  Matrix q;                         ///< Q*(s, a)
  std::vector<int> policy;          ///< greedy action, lowest index on ties
  std::vector<char> terminal;
  double residual = 0;
  int sweeps = 0;
};

/// Sweeps until the largest Bellman residual is below `tolerance`. Throws
/// std::runtime_error if `max_sweeps` is reached first.
ValueTable value_iteration(const TabularMdp& mdp, double tolerance = 1e-10, int max_sweeps = 1000000);

TabularMdp to_tabular(const GridConfig& c);
inline int cell_index(const GridConfig& c, Cell cell) { return cell.row * c.width + cell.col; }
ValueTable value_iteration(const GridConfig& c, double tolerance = 1e-10);

/// max over non-terminal s and all a of V*(s) - Q*(s, a).
double optimal_gap_u(const ValueTable& table);

/// Optimal action index keyed by state token, for every non-goal cell.
std::map<std::string, std::size_t> optimal_actions(const GridConfig& c, const ValueTable& table);

/// Every action within `tolerance` of V*(s), keyed by state token, for every non-goal cell.
std::map<std::string, std::vector<std::size_t>> optimal_action_sets(const GridConfig& c, const ValueTable& table,
                                                                    double tolerance = 1e-9);

}  // namespace copier::grid
