#include "copier/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace copier::grid {

namespace {

constexpr int kDr[kActions] = {-1, 1, 0, 0};
constexpr int kDc[kActions] = {0, 0, -1, 1};

bool inside(const GridConfig& c, Cell x) { return x.row >= 0 && x.row < c.height && x.col >= 0 && x.col < c.width; }

void check_mask(const GridConfig& c, const std::vector<int>& mask, const char* name) {
  if (mask.empty()) throw std::invalid_argument(std::string("grid: ") + name + " is empty");
  const int d = full_feature_count(c);
  for (int i : mask)
    if (i < 0 || i >= d) throw std::invalid_argument(std::string("grid: ") + name + " index " + std::to_string(i) + " out of range");
}

}  // namespace

const char* action_name(int a) {
  static const char* names[kActions] = {"up", "down", "left", "right"};
  if (a < 0 || a >= kActions) throw std::invalid_argument("grid: bad action");
  return names[a];
}

void GridConfig::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("grid: width and height must be positive");
  if (width * height < 2) throw std::invalid_argument("grid: need at least two cells");
  if (!inside(*this, start) || !inside(*this, goal)) throw std::invalid_argument("grid: start or goal outside the grid");
  if (start == goal) throw std::invalid_argument("grid: start equals goal");
  if (!(noise >= 0.0 && noise <= 0.5)) throw std::invalid_argument("grid: noise must lie in [0, 0.5]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("grid: gamma must lie in (0, 1]");
  if (!std::isfinite(step_reward) || !std::isfinite(goal_reward)) throw std::invalid_argument("grid: non-finite reward");
  check_mask(*this, mask_a, "mask A");
  check_mask(*this, mask_b, "mask B");
}

int full_feature_count(const GridConfig& c) { return c.height + c.width + 1 + 4; }

Vector full_features(const GridConfig& c, Cell cell) {
  Vector f = Vector::Zero(full_feature_count(c));
  f[cell.row] = 1;
  f[c.height + cell.col] = 1;
  const int span = std::max(1, c.width + c.height - 2);
  f[c.height + c.width] =
      static_cast<double>(std::abs(cell.row - c.goal.row) + std::abs(cell.col - c.goal.col)) / span;
  const int w = c.height + c.width + 1;
  f[w + 0] = cell.row == 0;
  f[w + 1] = cell.row == c.height - 1;
  f[w + 2] = cell.col == 0;
  f[w + 3] = cell.col == c.width - 1;
  return f;
}

std::vector<int> feature_mask(const GridConfig& c, const std::vector<std::string>& groups) {
  std::vector<int> out;
  auto range = [&](int from, int count) {
    for (int i = 0; i < count; ++i) out.push_back(from + i);
  };
  for (const auto& g : groups) {
    if (g == "row") range(0, c.height);
    else if (g == "col") range(c.height, c.width);
    else if (g == "dist") range(c.height + c.width, 1);
    else if (g == "walls") range(c.height + c.width + 1, 4);
    else if (g == "wall_up") range(c.height + c.width + 1, 1);
    else if (g == "wall_down") range(c.height + c.width + 2, 1);
    else if (g == "wall_left") range(c.height + c.width + 3, 1);
    else if (g == "wall_right") range(c.height + c.width + 4, 1);
    else throw std::invalid_argument("grid: unknown feature group '" + g + "'");
  }
  return out;
}

std::string cell_token(Cell c) { return std::to_string(c.row) + "," + std::to_string(c.col); }

Cell parse_cell_token(const std::string& token) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("not a grid state token: " + token);
  return Cell{std::stoi(token.substr(0, comma)), std::stoi(token.substr(comma + 1))};
}

Cell move(const GridConfig& c, Cell cell, int a) {
  const Cell next{cell.row + kDr[a], cell.col + kDc[a]};
  return inside(c, next) ? next : cell;
}

Observation observe_cell(const GridConfig& c, const std::vector<int>& mask, Cell cell) {
  const Vector full = full_features(c, cell);
  Observation obs;
  obs.state = Vector(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i = 0; i < mask.size(); ++i) obs.state[static_cast<Eigen::Index>(i)] = full[mask[i]];
  for (int a = 0; a < kActions; ++a) obs.actions.emplace_back(action_name(a));
  return obs;
}

GridEnv::GridEnv(GridConfig config, View view, Cell start)
    : config_(std::move(config)), view_(view), cell_(start) {
  config_.validate();
  if (!inside(config_, start)) throw std::invalid_argument("grid: start outside the grid");
  mask_ = view == View::A ? config_.mask_a : config_.mask_b;
}

MdpSpec GridEnv::spec() const { return {view_, config_.gamma, config_.horizon()}; }

std::unique_ptr<Environment> GridEnv::clone() const { return std::make_unique<GridEnv>(*this); }

bool GridEnv::terminal() const { return cell_ == config_.goal; }

std::string GridEnv::state_token() const { return cell_token(cell_); }

Observation GridEnv::observe() const { return observe_cell(config_, mask_, cell_); }

double GridEnv::step(std::size_t choice, Rng& rng) {
  if (choice >= static_cast<std::size_t>(kActions)) throw std::invalid_argument("grid: choice out of range");
  if (terminal()) throw std::logic_error("grid: step from the goal");
  int a = static_cast<int>(choice);
  if (config_.noise > 0 && uniform01(rng) < config_.noise) a = static_cast<int>(uniform_index(rng, kActions));
  cell_ = move(config_, cell_, a);
  return config_.step_reward + (cell_ == config_.goal ? config_.goal_reward : 0.0);
}

TwoViewInstance make_two_view_grid(const GridConfig& config) { return make_two_view_grid(config, config.start); }

TwoViewInstance make_two_view_grid(const GridConfig& config, Cell start) {
  config.validate();
  TwoViewInstance inst;
  inst.id = "grid@" + cell_token(start);
  inst.view_a = std::make_shared<GridEnv>(config, View::A, start);
  inst.view_b = std::make_shared<GridEnv>(config, View::B, start);
  auto remask = [config](const std::vector<int>& mask) {
    return [config, mask](const Trajectory& t) {
      Trajectory out = t;
      for (auto& s : out.steps) s.obs = observe_cell(config, mask, parse_cell_token(s.state));
      return out;
    };
  };
  inst.a_to_b = {Direction::a_to_b, remask(config.mask_b)};
  inst.b_to_a = {Direction::b_to_a, remask(config.mask_a)};
  return inst;
}

// ------------------------------------------------------------- value iteration

ValueTable value_iteration(const TabularMdp& mdp, double tolerance, int max_sweeps) {
  if (!(mdp.gamma > 0 && mdp.gamma <= 1)) throw std::invalid_argument("value_iteration: gamma must lie in (0, 1]");
  if (static_cast<int>(mdp.transitions.size()) != mdp.states || static_cast<int>(mdp.terminal.size()) != mdp.states)
    throw std::invalid_argument("value_iteration: table sizes do not match the state count");
  ValueTable t;
  t.value = Vector::Zero(mdp.states);
  t.q = Matrix::Zero(mdp.states, mdp.actions);
  t.terminal = mdp.terminal;
  auto backup = [&](const Vector& v) {
    for (int s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[s]) continue;
      for (int a = 0; a < mdp.actions; ++a) {
        double q = 0;
        for (const auto& tr : mdp.transitions[s][a])
          q += tr.prob * (tr.reward + (mdp.terminal[tr.next] ? 0.0 : mdp.gamma * v[tr.next]));
        t.q(s, a) = q;
      }
    }
  };
  for (t.sweeps = 1; t.sweeps <= max_sweeps; ++t.sweeps) {
    backup(t.value);
    double residual = 0;
    for (int s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[s]) continue;
      const double v = t.q.row(s).maxCoeff();
      residual = std::max(residual, std::abs(v - t.value[s]));
      t.value[s] = v;
    }
    t.residual = residual;
    if (residual < tolerance) break;
  }
  if (t.sweeps > max_sweeps) throw std::runtime_error("value_iteration: no convergence within the sweep limit");
  backup(t.value);
  t.policy.assign(static_cast<std::size_t>(mdp.states), 0);
  for (int s = 0; s < mdp.states; ++s)
    if (!mdp.terminal[s]) t.policy[s] = static_cast<int>(argmax(Vector(t.q.row(s).transpose())));
  return t;
}

TabularMdp to_tabular(const GridConfig& c) {
  TabularMdp m;
  m.states = c.cells();
  m.actions = kActions;
  m.gamma = c.gamma;
  m.terminal.assign(static_cast<std::size_t>(m.states), 0);
  m.terminal[cell_index(c, c.goal)] = 1;
  m.transitions.assign(static_cast<std::size_t>(m.states), std::vector<std::vector<Transition>>(kActions));
  for (int r = 0; r < c.height; ++r)
    for (int col = 0; col < c.width; ++col) {
      const Cell cell{r, col};
      const int s = cell_index(c, cell);
      for (int a = 0; a < kActions; ++a) {
        auto& out = m.transitions[s][a];
        auto add = [&](int dir, double p) {
          if (p <= 0) return;
          const Cell next = move(c, cell, dir);
          const int ns = cell_index(c, next);
          const double reward = c.step_reward + (next == c.goal ? c.goal_reward : 0.0);
          for (auto& tr : out)
            if (tr.next == ns) {
              tr.prob += p;
              return;
            }
          out.push_back({ns, p, reward});
        };
        add(a, 1.0 - c.noise);
        for (int d = 0; d < kActions; ++d) add(d, c.noise / kActions);
      }
    }
  return m;
}

ValueTable value_iteration(const GridConfig& c, double tolerance) {
  c.validate();
  return value_iteration(to_tabular(c), tolerance);
}

double optimal_gap_u(const ValueTable& table) {
  double u = 0;
  for (Eigen::Index s = 0; s < table.value.size(); ++s) {
    if (table.terminal[static_cast<std::size_t>(s)]) continue;
    u = std::max(u, (table.value[s] - table.q.row(s).array()).maxCoeff());
  }
  return u;
}

std::map<std::string, std::size_t> optimal_actions(const GridConfig& c, const ValueTable& table) {
  std::map<std::string, std::size_t> out;
  for (int r = 0; r < c.height; ++r)
    for (int col = 0; col < c.width; ++col) {
      const Cell cell{r, col};
      if (cell == c.goal) continue;
      out[cell_token(cell)] = static_cast<std::size_t>(table.policy[cell_index(c, cell)]);
    }
  return out;
}

std::map<std::string, std::vector<std::size_t>> optimal_action_sets(const GridConfig& c, const ValueTable& table,
                                                                    double tolerance) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (int r = 0; r < c.height; ++r)
    for (int col = 0; col < c.width; ++col) {
      const Cell cell{r, col};
      if (cell == c.goal) continue;
      const int s = cell_index(c, cell);
      auto& set = out[cell_token(cell)];
      for (int a = 0; a < kActions; ++a)
        if (table.q(s, a) >= table.value[s] - tolerance) set.push_back(static_cast<std::size_t>(a));
    }
  return out;
}

}  // namespace copier::grid
