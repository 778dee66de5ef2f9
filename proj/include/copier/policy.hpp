#pragma once

// Categorical softmax policies.
//
// Two heads are supported:
//  - Head::state scores a fixed set of k actions from the observation's state
//    vector (tabular, linear, or one-hidden-layer tanh network).
//  - Head::candidate scores each row of the observation's candidate matrix with
//    shared weights, for environments whose legal action set varies (vertices
//    of a graph, open nodes of a search tree).

#include "copier/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace copier {

enum class Architecture { tabular, linear, mlp };
enum class Head { state, candidate };

const char* to_string(Architecture a);
const char* to_string(Head h);
Architecture parse_architecture(const std::string& s);
Head parse_head(const std::string& s);

std::size_t parameter_count(Architecture arch, Head head, int features, int actions, int hidden);

/// An immutable policy snapshot. Parameters are stored flat; see the .cpp for
/// the block layout of each architecture.
struct Policy {
  Architecture arch = Architecture::linear;
  Head head = Head::state;
  int features = 0;
  int actions = 0;  ///< k for Head::state; 0 for Head::candidate
  int hidden = 0;   ///< mlp only
  Vector params;

  static Policy zeros(Architecture arch, Head head, int features, int actions, int hidden = 0);
  /// Parameters uniform in [-0.05, 0.05] drawn from `seed`.
  static Policy random(Architecture arch, Head head, int features, int actions, int hidden,
                       std::uint64_t seed);

  std::size_t parameter_count() const { return static_cast<std::size_t>(params.size()); }
  /// Description length |pi| at 32 bits per parameter.
  std::size_t description_bits() const { return 32 * parameter_count(); }
  Policy with_params(Vector p) const;
  void validate() const;
};

Vector logits(const Policy& policy, const Observation& obs);
Vector action_distribution(const Policy& policy, const Observation& obs);
/// Fixed-arity head evaluated on a bare feature vector.
Vector action_distribution(const Policy& policy, const Vector& features);
/// Argmax action with lowest-index tie-breaking.
std::size_t greedy_action(const Policy& policy, const Observation& obs);

/// Vector-Jacobian product: d(sum_i dlogits_i * logit_i)/d(params).
Vector backprop_logits(const Policy& policy, const Observation& obs, const Vector& dlogits);
/// Gradient of ln pi(choice | obs) with respect to the parameters.
Vector log_prob_gradient(const Policy& policy, const Observation& obs, std::size_t choice);
Vector log_prob_gradient(const Policy& policy, const Vector& features, std::size_t action);

/// Rolls the policy out from `env` until terminal or the horizon cap, sampling
/// actions. Bit-reproducible given (policy, env, seed).
Trajectory sample_trajectory(const Policy& policy, const Environment& env, std::uint64_t seed);
/// Same, always taking the argmax action. `seed` only drives environment noise.
Trajectory greedy_trajectory(const Policy& policy, const Environment& env, std::uint64_t seed);

/// Checkpoint: header lines (architecture, head, dims) then one parameter per line.
void write_policy(std::ostream& os, const Policy& policy);
Policy read_policy(std::istream& is);
void save_policy(const std::string& path, const Policy& policy);
Policy load_policy(const std::string& path);

}  // namespace copier
