#include "copier/learners.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace copier {

const char* to_string(UpdateMode m) { return m == UpdateMode::rl_with_il ? "rl_with_il" : "il_only"; }
const char* to_string(Surrogate s) { return s == Surrogate::nll ? "nll" : "kl"; }

UpdateMode parse_update_mode(const std::string& s) {
  if (s == "rl_with_il" || s == "rl+il") return UpdateMode::rl_with_il;
  if (s == "il_only" || s == "il") return UpdateMode::il_only;
  throw std::invalid_argument("unknown update mode '" + s + "'");
}

Surrogate parse_surrogate(const std::string& s) {
  if (s == "nll" || s == "bc") return Surrogate::nll;
  if (s == "kl") return Surrogate::kl;
  throw std::invalid_argument("unknown surrogate '" + s + "'");
}

void UpdateConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in (0, 1]");
}

double BaselineModel::predict(const Vector& features) const {
  if (weights.size() == 0) return bias;
  return weights.dot(features) + bias;
}

std::vector<double> returns_to_go(const Trajectory& traj, double gamma) {
  std::vector<double> g(traj.size());
  double acc = 0;
  for (std::size_t t = traj.size(); t-- > 0;) {
    acc = traj.steps[t].reward + gamma * acc;
    g[t] = acc;
  }
  return g;
}

BaselineModel fit_linear_baseline(const std::vector<Trajectory>& trajs, double gamma) {
  if (trajs.empty()) throw std::invalid_argument("fit_linear_baseline: no trajectories");
  std::size_t rows = 0;
  Eigen::Index dim = 0;
  for (const auto& t : trajs) {
    rows += t.size();
    if (!t.empty()) dim = t.steps.front().obs.state.size();
  }
  BaselineModel model;
  model.weights = Vector::Zero(dim);
  if (rows == 0) return model;

  Matrix x(static_cast<Eigen::Index>(rows), dim);
  Vector y(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (const auto& t : trajs) {
    const auto g = returns_to_go(t, gamma);
    for (std::size_t i = 0; i < t.size(); ++i, ++r) {
      if (t.steps[i].obs.state.size() != dim) throw std::invalid_argument("baseline features change dimension");
      x.row(r) = t.steps[i].obs.state.transpose();
      y[r] = g[i];
    }
  }
  // Centering leaves the intercept out of the ridge penalty.
  const Vector mean_x = x.colwise().mean().transpose();
  const double mean_y = y.mean();
  const Matrix xc = x.rowwise() - mean_x.transpose();
  const Vector yc = y.array() - mean_y;
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += 1e-6;
  model.weights = gram.ldlt().solve(xc.transpose() * yc);
  model.bias = mean_y - mean_x.dot(model.weights);
  return model;
}

Vector policy_gradient(const Policy& policy, const std::vector<Trajectory>& trajs,
                       const BaselineModel& baseline, double gamma) {
  Vector grad = Vector::Zero(policy.params.size());
  if (trajs.empty()) return grad;
  for (const auto& t : trajs) {
    const auto g = returns_to_go(t, gamma);
    double discount = 1;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& s = t.steps[i];
      const double advantage = g[i] - baseline.predict(s.obs.state);
      grad += (discount * advantage) * log_prob_gradient(policy, s.obs, s.choice);
      discount *= gamma;
    }
  }
  return grad / static_cast<double>(trajs.size());
}

LossAndGradient behavior_cloning_loss(const Policy& policy, const std::vector<Demo>& demos) {
  LossAndGradient out{0.0, Vector::Zero(policy.params.size())};
  if (demos.empty()) return out;
  for (const auto& d : demos) {
    const Vector z = logits(policy, d.obs);
    if (d.choice >= static_cast<std::size_t>(z.size()))
      throw std::invalid_argument("demo action " + std::to_string(d.choice) + " out of range");
    const auto c = static_cast<Eigen::Index>(d.choice);
    out.loss -= log_softmax(z)[c];
    Vector dl = softmax(z);
    dl[c] -= 1.0;
    out.gradient += backprop_logits(policy, d.obs, dl);
  }
  const double n = static_cast<double>(demos.size());
  out.loss /= n;
  out.gradient /= n;
  return out;
}

LossAndGradient kl_imitation_loss(const Policy& policy, const std::vector<Demo>& demos) {
  LossAndGradient out{0.0, Vector::Zero(policy.params.size())};
  if (demos.empty()) return out;
  for (const auto& d : demos) {
    const Vector z = logits(policy, d.obs);
    Vector target = d.target;
    if (target.size() == 0) {
      target = Vector::Zero(z.size());
      target[static_cast<Eigen::Index>(d.choice)] = 1.0;
    }
    if (target.size() != z.size()) throw std::invalid_argument("demo target has the wrong number of actions");
    const Vector logp = log_softmax(z);
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (target[i] > 0) out.loss += target[i] * (std::log(target[i]) - logp[i]);
    out.gradient += backprop_logits(policy, d.obs, softmax(z) - target);
  }
  const double n = static_cast<double>(demos.size());
  out.loss /= n;
  out.gradient /= n;
  return out;
}

LossAndGradient surrogate_loss(const Policy& policy, const std::vector<Demo>& demos, Surrogate s) {
  return s == Surrogate::nll ? behavior_cloning_loss(policy, demos) : kl_imitation_loss(policy, demos);
}

std::vector<Demo> demos_from_trajectories(const std::vector<Trajectory>& trajs) {
  std::vector<Demo> out;
  for (const auto& t : trajs)
    for (const auto& s : t.steps) out.push_back(Demo{s.state, s.obs, s.choice, Vector()});
  return out;
}

Policy copier_update(const Policy& policy, const std::vector<Trajectory>& trajs,
                     const std::vector<Demo>& demos, const UpdateConfig& config) {
  config.validate();
  Vector grad = config.lambda * surrogate_loss(policy, demos, config.surrogate).gradient;
  if (config.mode == UpdateMode::rl_with_il) {
    if (trajs.empty()) throw std::invalid_argument("copier_update: RL with IL needs sampled trajectories");
    const BaselineModel baseline = fit_linear_baseline(trajs, config.gamma);
    grad -= policy_gradient(policy, trajs, baseline, config.gamma);
  }
  return policy.with_params(policy.params - config.learning_rate * grad);
}

Policy pretrain_behavior_cloning(const Policy& policy, const std::vector<Demo>& demos, double learning_rate,
                                 int epochs) {
  Policy p = policy;
  for (int e = 0; e < epochs && !demos.empty(); ++e)
    p = p.with_params(p.params - learning_rate * behavior_cloning_loss(p, demos).gradient);
  return p;
}

}  // namespace copier
