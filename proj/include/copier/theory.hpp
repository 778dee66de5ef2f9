#pragma once

// Sample estimates of the policy-improvement terms for co-training, the PAC
// disagreement bound on a co-trained policy's error rate, and the resulting
// performance-gap bound.
//
// Every "max over states" is taken over the states visited by the supplied
// rollouts, so the estimates are lower bounds on the exact maxima.

#include "copier/learners.hpp"
#include "copier/mdp.hpp"
#include "copier/policy.hpp"

#include <map>
#include <string>
#include <vector>

namespace copier {

/// Rollouts of both views on one instance.
struct InstanceRollouts {
  const TwoViewInstance* instance = nullptr;
  std::vector<Trajectory> a;
  std::vector<Trajectory> b;
};

struct ImprovementDiagnostics {
  double alpha_hat_a = 0;  ///< mean over instances of max KL(pi_A || pi_A') over visited states
  double alpha_hat_b = 0;
  double beta_hat_d1 = 0;  ///< instances won by A: JS between A's mapped occupancy policy and pi_B
  double beta_hat_d2 = 0;  ///< instances won by B: JS between B's mapped occupancy policy and pi_A
  double delta_hat_1 = 0;  ///< sum over D1 of (eta_A - eta_B), divided by the instance count
  double delta_hat_2 = 0;  ///< sum over D2 of (eta_B - eta_A), divided by the instance count
  double eps_hat_a = 0;    ///< max |return-to-go - baseline| over all of A's visited steps
  double eps_hat_b = 0;
  double eps_hat_a_d1 = 0;  ///< same, restricted to instances in D1
  double eps_hat_b_d2 = 0;  ///< same, restricted to instances in D2
  int instances_d1 = 0;
  int instances_d2 = 0;
  int unmapped = 0;  ///< trajectories skipped because they could not be mapped
  double gamma_a = 1;
  double gamma_b = 1;
  bool applicable = false;  ///< both gammas < 1, so the 1/(1-gamma)^2 penalties are finite
  double penalty_a = 0;     ///< 2 gA (4 beta_d2 eps_b_d2 + alpha_a eps_a) / (1 - gA)^2, when applicable
  double penalty_b = 0;     ///< 2 gB (4 beta_d1 eps_a_d1 + alpha_b eps_b) / (1 - gB)^2, when applicable
};

/// `*_before` are the snapshots that produced the rollouts; `*_after` the
/// snapshots after the update being analysed.
ImprovementDiagnostics improvement_diagnostics(const std::vector<InstanceRollouts>& rollouts,
                                               const Policy& a_before, const Policy& a_after,
                                               const Policy& b_before, const Policy& b_after, double gamma_a,
                                               double gamma_b);

/// Largest JS divergence, over states visited by the mapped trajectories,
/// between the action distribution implied by the mapped occupancy and
/// `target_policy` evaluated on the mapped observation.
double max_mapped_js(const std::vector<Trajectory>& source_trajs, const ViewMapping& mapping,
                     const Policy& target_policy, double gamma, int* unmapped = nullptr);

struct DisagreementStats {
  int k = 0;
  std::vector<long> n_a;      ///< N(a^A = i)
  std::vector<long> n_b;      ///< N(a^B = i)
  std::vector<long> n_agree;  ///< N(a^A = i, a^B = i)
  long total = 0;

  explicit DisagreementStats(int actions = 0);
  void add(std::size_t action_a, std::size_t action_b);
  void validate() const;
};

/// Runs over every step of `trajs_a` (view A) and of their images under
/// `a_to_b`: a^A is pi_A's argmax at the source observation, a^B is pi_B's
/// argmax at the mapped observation. Requires step-aligned mappings (shared
/// action space).
DisagreementStats disagreement_counts(const std::vector<Trajectory>& trajs_a, const ViewMapping& a_to_b,
                                      const Policy& policy_a, const Policy& policy_b, int k);

struct BoundReport {
  int k = 0;
  double sigma = 0;
  std::size_t bits_a = 0;
  std::size_t bits_b = 0;
  std::vector<double> eps;   ///< NaN where undefined
  std::vector<double> zeta;  ///< NaN where undefined
  std::vector<double> b;     ///< NaN where undefined
  std::vector<char> defined;  ///< N(a^B = i) > 0
  std::vector<char> valid;    ///< defined, zeta > 0 and b <= 1
  double max_b = 0;           ///< over valid actions; NaN when vacuous
  bool vacuous = true;        ///< no valid action
  bool all_valid = false;     ///< every one of the k actions is valid (so none is undefined)
};

BoundReport pac_disagreement_bound(const DisagreementStats& stats, std::size_t bits_a, std::size_t bits_b,
                                   double sigma);

struct GapBoundParams {
  double u = 0;
  double horizon = 1;
  double epsilon = 0;

  void validate() const;
};

/// u * T * epsilon.
double performance_gap_bound(const GapBoundParams& p);

/// Fraction of visited steps where the policy's argmax differs from the
/// optimal action for that state token.
double measure_policy_error(const Policy& policy, const std::map<std::string, std::size_t>& optimal,
                            const std::vector<Trajectory>& trajs);
/// Same, where each state may have several optimal actions; any of them counts as correct.
double measure_policy_error(const Policy& policy, const std::map<std::string, std::vector<std::size_t>>& optimal,
                            const std::vector<Trajectory>& trajs);

}  // namespace copier
