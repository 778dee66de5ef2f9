#pragma once

// Two-view MDP abstractions: environments, trajectories, view mappings and
// occupancy estimates. State and action tokens are opaque strings produced by
// each environment; nothing here inspects their structure.

#include "copier/math.hpp"
#include "copier/rng.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace copier {

enum class View { A, B };

inline const char* to_string(View v) { return v == View::A ? "A" : "B"; }
inline View other(View v) { return v == View::A ? View::B : View::A; }

struct MdpSpec {
  View view = View::A;
  double gamma = 1.0;  ///< in (0, 1]
  int horizon_cap = 1;

  void validate() const;
};

/// What a policy sees at one state.
///
/// `state` is a state-level feature vector (used by fixed-arity policy heads and
/// by baselines). `candidates` holds one feature row per legal action for
/// candidate-scoring heads; it may be empty for fixed-arity environments.
/// `actions[i]` is the action token of choice index i.
struct Observation {
  Vector state;
  Matrix candidates;
  std::vector<std::string> actions;

  std::size_t num_choices() const { return actions.size(); }
};

struct Step {
  std::string state;
  std::string action;
  double reward = 0;
  Observation obs;
  std::size_t choice = 0;
};

struct Trajectory {
  View view = View::A;
  std::vector<Step> steps;
  std::string final_state;
  bool complete = false;  ///< a terminal state was reached
  bool solved = true;     ///< the environment holds a usable solution at the end

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  /// Undiscounted sum of rewards.
  double total_reward() const;
};

/// A simulator positioned at some state. Rollouts clone the initial state.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual MdpSpec spec() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
  virtual bool terminal() const = 0;
  virtual std::string state_token() const = 0;
  virtual Observation observe() const = 0;
  /// Takes the action at `choice` (an index into observe().actions); returns the reward.
  virtual double step(std::size_t choice, Rng& rng) = 0;
  virtual bool solved() const { return true; }
};

enum class Direction { a_to_b, b_to_a };

inline const char* to_string(Direction d) { return d == Direction::a_to_b ? "A->B" : "B->A"; }

struct ViewMapping {
  Direction direction = Direction::a_to_b;
  std::function<Trajectory(const Trajectory&)> fn;

  View source() const { return direction == Direction::a_to_b ? View::A : View::B; }
  View target() const { return other(source()); }
};

struct TwoViewInstance {
  std::string id;
  std::shared_ptr<const Environment> view_a;
  std::shared_ptr<const Environment> view_b;
  ViewMapping a_to_b;
  ViewMapping b_to_a;

  const Environment& env(View v) const { return v == View::A ? *view_a : *view_b; }
  /// Mapping whose source is `v`.
  const ViewMapping& mapping_from(View v) const { return v == View::A ? a_to_b : b_to_a; }
};

/// Sum of gamma^i r_i over the trajectory's steps.
double total_discounted_reward(const Trajectory& traj, double gamma);

/// Applies `mapping` to a complete trajectory of its source view. Throws
/// std::invalid_argument for incomplete or wrong-view input, and
/// std::logic_error if the mapping fails to preserve the total reward exactly.
Trajectory map_trajectory(const Trajectory& traj, const ViewMapping& mapping);

std::vector<Trajectory> map_trajectories(const std::vector<Trajectory>& trajs,
                                         const ViewMapping& mapping);

/// Expected discounted visit counts of (state, action) pairs. Sparse: pairs
/// never visited read as zero.
class OccupancyEstimate {
 public:
  using Key = std::pair<std::string, std::string>;

  OccupancyEstimate(double gamma, std::size_t trajectories) : gamma_(gamma), count_(trajectories) {}

  double at(const std::string& state, const std::string& action) const;
  /// Visitation of `state` summed over actions.
  double state_mass(const std::string& state) const;
  double total_mass() const;
  double gamma() const { return gamma_; }
  std::size_t trajectory_count() const { return count_; }
  const std::map<Key, double>& entries() const { return table_; }

  /// Action distribution at `state` implied by the occupancy (ratio of
  /// occupancy to state mass), indexed like `actions`. Zero vector if the
  /// state was never visited.
  Vector action_distribution(const std::string& state, const std::vector<std::string>& actions) const;

  void add(const std::string& state, const std::string& action, double mass);

 private:
  double gamma_;
  std::size_t count_;
  std::map<Key, double> table_;
  std::map<std::string, double> states_;
};

OccupancyEstimate estimate_occupancy(const std::vector<Trajectory>& trajs, double gamma);

/// Occupancy of `trajs` after mapping each into the mapping's target view.
OccupancyEstimate mapped_occupancy(const std::vector<Trajectory>& trajs, const ViewMapping& mapping,
                                   double gamma);

/// One line per step: state, action, reward separated by tabs.
void write_trajectory(std::ostream& os, const Trajectory& traj);

}  // namespace copier
