#pragma once

// Policy-gradient and imitation losses, and the combined update step that
// mixes them.

#include "copier/policy.hpp"

#include <string>
#include <vector>

namespace copier {

enum class UpdateMode { rl_with_il, il_only };
enum class Surrogate { nll, kl };

const char* to_string(UpdateMode m);
const char* to_string(Surrogate s);
UpdateMode parse_update_mode(const std::string& s);
Surrogate parse_surrogate(const std::string& s);

struct UpdateConfig {
  UpdateMode mode = UpdateMode::rl_with_il;
  double lambda = 1.0;          ///< weight of the imitation surrogate
  double learning_rate = 0.01;  ///< gradient step size
  double gamma = 1.0;
  Surrogate surrogate = Surrogate::nll;

  void validate() const;
};

/// One imitation example. `target` is an optional full action distribution
/// (used by the KL surrogate); when empty the one-hot of `choice` is used.
struct Demo {
  std::string state;
  Observation obs;
  std::size_t choice = 0;
  Vector target;
};

struct BaselineModel {
  Vector weights;
  double bias = 0;

  double predict(const Vector& features) const;
};

struct LossAndGradient {
  double loss = 0;
  Vector gradient;
};

/// Discounted return-to-go G_t = sum_{j>=t} gamma^(j-t) r_j for every step.
std::vector<double> returns_to_go(const Trajectory& traj, double gamma);

/// Ridge least squares (1e-6, bias unpenalized) of return-to-go on state features.
BaselineModel fit_linear_baseline(const std::vector<Trajectory>& trajs, double gamma);

/// REINFORCE ascent direction:
///   mean over trajectories of sum_t grad ln pi(a_t|s_t) gamma^t (G_t - b(s_t)).
Vector policy_gradient(const Policy& policy, const std::vector<Trajectory>& trajs,
                       const BaselineModel& baseline, double gamma);

/// Mean negative log-likelihood of demo choices and its parameter gradient.
/// An empty demo set gives loss 0 and a zero gradient.
LossAndGradient behavior_cloning_loss(const Policy& policy, const std::vector<Demo>& demos);

/// Mean KL(target || pi) over demos and its parameter gradient.
LossAndGradient kl_imitation_loss(const Policy& policy, const std::vector<Demo>& demos);

LossAndGradient surrogate_loss(const Policy& policy, const std::vector<Demo>& demos, Surrogate s);

/// Every step of every trajectory as a demonstration of the action taken.
std::vector<Demo> demos_from_trajectories(const std::vector<Trajectory>& trajs);

/// One gradient step on L = -(reward objective) + lambda C (RL with IL) or
/// L = lambda C (IL only). Returns the new snapshot.
Policy copier_update(const Policy& policy, const std::vector<Trajectory>& trajs,
                     const std::vector<Demo>& demos, const UpdateConfig& config);

/// Plain behavior cloning for `epochs` full-batch steps.
Policy pretrain_behavior_cloning(const Policy& policy, const std::vector<Demo>& demos, double learning_rate,
                                 int epochs);

}  // namespace copier
