#pragma once

// The co-training loop: roll out both views on a sampled instance, exchange
// demonstrations across the view mappings, and update both policies.

#include "copier/learners.hpp"
#include "copier/mdp.hpp"
#include "copier/policy.hpp"
#include "copier/theory.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace copier {

/// General exchange: the view with the better mean total reward supplies its
/// trajectories, mapped into the other view, as demonstrations.
struct ExchangeResult {
  std::vector<Trajectory> demos_a_to_b;  ///< in view B
  std::vector<Trajectory> demos_b_to_a;  ///< in view A
  double eta_hat_a = 0;
  double eta_hat_b = 0;
  Direction direction = Direction::b_to_a;
  int dropped = 0;  ///< winner trajectories that could not be mapped (incomplete or unsolved)
  /// (source total, mapped total) for every exchanged trajectory.
  std::vector<std::pair<double, double>> reward_pairs;
};

ExchangeResult exchange_general(const std::vector<Trajectory>& trajs_a, const std::vector<Trajectory>& trajs_b,
                                const TwoViewInstance& instance);

/// One label per state of every trajectory: the query policy's argmax action,
/// with its full action distribution kept as the soft target.
std::vector<Demo> interactive_labels(const std::vector<Trajectory>& trajs, const Policy& query_policy);

/// Shared-action exchange. `a_to_b` holds pi_A's labels for the states of B's
/// trajectories (computed on their images in view A) attached to B's own
/// observations, so B can imitate them; `b_to_a` is the mirror image.
struct SpecialExchange {
  std::vector<Demo> a_to_b;
  std::vector<Demo> b_to_a;
  int dropped = 0;
  std::vector<std::pair<double, double>> reward_pairs;
};

SpecialExchange exchange_special(const std::vector<Trajectory>& trajs_a, const std::vector<Trajectory>& trajs_b,
                                 const Policy& policy_a, const Policy& policy_b, const TwoViewInstance& instance);

enum class ExchangeMode { general, shared_action };
const char* to_string(ExchangeMode m);
ExchangeMode parse_exchange_mode(const std::string& s);

struct CopierConfig {
  int iterations = 10;
  int rollouts_a = 8;  ///< m
  int rollouts_b = 8;  ///< n
  UpdateConfig update_a;
  UpdateConfig update_b;
  ExchangeMode mode = ExchangeMode::general;
  std::uint64_t seed = 0;
  bool diagnostics = false;  ///< estimate improvement terms every iteration

  void validate() const;
};

using InstanceSampler = std::function<std::shared_ptr<const TwoViewInstance>(int iteration, std::uint64_t seed)>;

/// Samples uniformly from a fixed pool.
InstanceSampler uniform_sampler(std::vector<std::shared_ptr<const TwoViewInstance>> pool);

struct TrainRecord {
  int iteration = 0;
  std::string instance;
  double eta_hat_a = 0;
  double eta_hat_b = 0;
  std::string direction;  ///< "A->B", "B->A", "both", or "" for single-view runs
  int demos_a_to_b = 0;
  int demos_b_to_a = 0;
  int dropped = 0;
  int exchanged = 0;  ///< mapped demonstration trajectories
  int preserved = 0;  ///< of those, how many kept their total reward exactly
  std::optional<ImprovementDiagnostics> diagnostics;
};

struct TrainHistory {
  std::vector<TrainRecord> records;
};

struct TrainResult {
  Policy policy_a;
  Policy policy_b;
  TrainHistory history;
};

/// Runs `config.iterations` co-training iterations. Every random draw derives
/// from config.seed, so equal inputs give bit-identical outputs.
TrainResult copier_train(const InstanceSampler& sampler, const Policy& policy_a, const Policy& policy_b,
                         const CopierConfig& config);

struct SingleViewResult {
  Policy policy;
  TrainHistory history;
};

/// The same loop for one view alone: no exchange, so only the RL term acts.
SingleViewResult train_single_view(const InstanceSampler& sampler, const Policy& policy, View view,
                                   const CopierConfig& config);

struct FinalResult {
  Trajectory best;
  View view = View::A;
  Trajectory best_a;
  Trajectory best_b;
};

/// Rolls out both policies (argmax actions, or sampled when `sample` is set)
/// once per seed and returns the better of the two views' best trajectories.
/// Trajectories are ranked by (holds a solution, total reward); ties go to A.
FinalResult copier_final(const Policy& policy_a, const Policy& policy_b, const TwoViewInstance& instance,
                         const std::vector<std::uint64_t>& seeds, bool sample = false);

/// Best of one policy's rollouts under the same ranking.
Trajectory best_rollout(const Policy& policy, const Environment& env, const std::vector<std::uint64_t>& seeds,
                        bool sample = false);

}  // namespace copier
