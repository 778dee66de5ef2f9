#include "copier/copier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace copier {

namespace {

double mean_total(const std::vector<Trajectory>& trajs) {
  double sum = 0;
  for (const auto& t : trajs) sum += t.total_reward();
  return sum / static_cast<double>(trajs.size());
}

bool mappable(const Trajectory& t) { return t.complete && t.solved; }

// Maps the mappable trajectories, recording reward pairs; returns the mapped set.
std::vector<Trajectory> map_all(const std::vector<Trajectory>& trajs, const ViewMapping& mapping, int& dropped,
                                std::vector<std::pair<double, double>>& pairs) {
  std::vector<Trajectory> out;
  for (const auto& t : trajs) {
    if (!mappable(t)) {
      ++dropped;
      continue;
    }
    out.push_back(map_trajectory(t, mapping));
    pairs.emplace_back(t.total_reward(), out.back().total_reward());
  }
  return out;
}

// Labels the states of `trajs` (receiver's view) with `labeler`'s choices on
// their images under `mapping` (labeler's view).
void label_through(const std::vector<Trajectory>& trajs, const ViewMapping& mapping, const Policy& labeler,
                   std::vector<Demo>& out, int& dropped, std::vector<std::pair<double, double>>& pairs) {
  for (const auto& t : trajs) {
    if (!mappable(t)) {
      ++dropped;
      continue;
    }
    const Trajectory m = map_trajectory(t, mapping);
    pairs.emplace_back(t.total_reward(), m.total_reward());
    if (m.size() != t.size()) throw std::invalid_argument("exchange_special: mapping is not step-aligned");
    auto labels = interactive_labels({m}, labeler);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i].state = t.steps[i].state;
      labels[i].obs = t.steps[i].obs;
      out.push_back(std::move(labels[i]));
    }
  }
}

bool better(const Trajectory& x, const Trajectory& y) {
  if (x.solved != y.solved) return x.solved;
  return x.total_reward() > y.total_reward();
}

Trajectory rollout(const Policy& p, const Environment& env, std::uint64_t seed, bool sample) {
  return sample ? sample_trajectory(p, env, seed) : greedy_trajectory(p, env, seed);
}

std::vector<Trajectory> rollouts(const Policy& p, const Environment& env, int count, std::uint64_t seed,
                                 std::uint64_t stream, int iteration) {
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(sample_trajectory(
        p, env, derive_seed(seed, {stream, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(i)})));
  return out;
}

}  // namespace

ExchangeResult exchange_general(const std::vector<Trajectory>& trajs_a, const std::vector<Trajectory>& trajs_b,
                                const TwoViewInstance& instance) {
  if (trajs_a.empty() || trajs_b.empty()) throw std::invalid_argument("exchange_general: both views need trajectories");
  ExchangeResult r;
  r.eta_hat_a = mean_total(trajs_a);
  r.eta_hat_b = mean_total(trajs_b);
  if (r.eta_hat_a > r.eta_hat_b) {
    r.direction = Direction::a_to_b;
    r.demos_a_to_b = map_all(trajs_a, instance.a_to_b, r.dropped, r.reward_pairs);
  } else {
    r.direction = Direction::b_to_a;
    r.demos_b_to_a = map_all(trajs_b, instance.b_to_a, r.dropped, r.reward_pairs);
  }
  return r;
}

std::vector<Demo> interactive_labels(const std::vector<Trajectory>& trajs, const Policy& query_policy) {
  std::vector<Demo> out;
  for (const auto& t : trajs)
    for (const auto& s : t.steps) {
      Vector p = action_distribution(query_policy, s.obs);
      const auto a = static_cast<std::size_t>(argmax(p));
      out.push_back(Demo{s.state, s.obs, a, std::move(p)});
    }
  return out;
}

SpecialExchange exchange_special(const std::vector<Trajectory>& trajs_a, const std::vector<Trajectory>& trajs_b,
                                 const Policy& policy_a, const Policy& policy_b, const TwoViewInstance& instance) {
  SpecialExchange r;
  label_through(trajs_b, instance.b_to_a, policy_a, r.a_to_b, r.dropped, r.reward_pairs);
  label_through(trajs_a, instance.a_to_b, policy_b, r.b_to_a, r.dropped, r.reward_pairs);
  return r;
}

const char* to_string(ExchangeMode m) { return m == ExchangeMode::general ? "general" : "shared_action"; }

ExchangeMode parse_exchange_mode(const std::string& s) {
  if (s == "general") return ExchangeMode::general;
  if (s == "shared_action" || s == "special") return ExchangeMode::shared_action;
  throw std::invalid_argument("unknown exchange mode '" + s + "'");
}

void CopierConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (rollouts_a < 1 || rollouts_b < 1) throw std::invalid_argument("rollouts per view must be at least 1");
  update_a.validate();
  update_b.validate();
}

InstanceSampler uniform_sampler(std::vector<std::shared_ptr<const TwoViewInstance>> pool) {
  if (pool.empty()) throw std::invalid_argument("uniform_sampler: empty pool");
  return [pool = std::move(pool)](int, std::uint64_t seed) {
    Rng rng(seed);
    return pool[uniform_index(rng, pool.size())];
  };
}

TrainResult copier_train(const InstanceSampler& sampler, const Policy& policy_a, const Policy& policy_b,
                         const CopierConfig& config) {
  config.validate();
  TrainResult out{policy_a, policy_b, {}};
  for (int it = 0; it < config.iterations; ++it) {
    const auto inst = sampler(it, derive_seed(config.seed, {1, static_cast<std::uint64_t>(it)}));
    if (!inst) throw std::runtime_error("instance sampler returned nothing");
    const auto trajs_a = rollouts(out.policy_a, *inst->view_a, config.rollouts_a, config.seed, 2, it);
    const auto trajs_b = rollouts(out.policy_b, *inst->view_b, config.rollouts_b, config.seed, 3, it);

    TrainRecord rec;
    rec.iteration = it;
    rec.instance = inst->id;
    rec.eta_hat_a = mean_total(trajs_a);
    rec.eta_hat_b = mean_total(trajs_b);
    std::vector<Demo> demos_for_a, demos_for_b;
    std::vector<std::pair<double, double>> pairs;
    if (config.mode == ExchangeMode::general) {
      auto ex = exchange_general(trajs_a, trajs_b, *inst);
      rec.direction = to_string(ex.direction);
      rec.dropped = ex.dropped;
      demos_for_b = demos_from_trajectories(ex.demos_a_to_b);
      demos_for_a = demos_from_trajectories(ex.demos_b_to_a);
      pairs = std::move(ex.reward_pairs);
    } else {
      auto ex = exchange_special(trajs_a, trajs_b, out.policy_a, out.policy_b, *inst);
      rec.direction = "both";
      rec.dropped = ex.dropped;
      demos_for_b = std::move(ex.a_to_b);
      demos_for_a = std::move(ex.b_to_a);
      pairs = std::move(ex.reward_pairs);
    }
    rec.demos_a_to_b = static_cast<int>(demos_for_b.size());
    rec.demos_b_to_a = static_cast<int>(demos_for_a.size());
    rec.exchanged = static_cast<int>(pairs.size());
    for (const auto& [src, dst] : pairs) rec.preserved += src == dst ? 1 : 0;

    const Policy next_a = copier_update(out.policy_a, trajs_a, demos_for_a, config.update_a);
    const Policy next_b = copier_update(out.policy_b, trajs_b, demos_for_b, config.update_b);
    if (config.diagnostics) {
      rec.diagnostics = improvement_diagnostics({InstanceRollouts{inst.get(), trajs_a, trajs_b}}, out.policy_a, next_a,
                                                out.policy_b, next_b, config.update_a.gamma, config.update_b.gamma);
    }
    out.policy_a = next_a;
    out.policy_b = next_b;
    out.history.records.push_back(std::move(rec));
  }
  return out;
}

SingleViewResult train_single_view(const InstanceSampler& sampler, const Policy& policy, View view,
                                   const CopierConfig& config) {
  config.validate();
  const UpdateConfig& upd = view == View::A ? config.update_a : config.update_b;
  const int count = view == View::A ? config.rollouts_a : config.rollouts_b;
  const std::uint64_t stream = view == View::A ? 2 : 3;
  SingleViewResult out{policy, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < config.iterations; ++it) {
    const auto inst = sampler(it, derive_seed(config.seed, {1, static_cast<std::uint64_t>(it)}));
    if (!inst) throw std::runtime_error("instance sampler returned nothing");
    const auto trajs = rollouts(out.policy, inst->env(view), count, config.seed, stream, it);
    TrainRecord rec;
    rec.iteration = it;
    rec.instance = inst->id;
    rec.eta_hat_a = view == View::A ? mean_total(trajs) : nan;
    rec.eta_hat_b = view == View::B ? mean_total(trajs) : nan;
    out.policy = copier_update(out.policy, trajs, {}, upd);
    out.history.records.push_back(std::move(rec));
  }
  return out;
}

Trajectory best_rollout(const Policy& policy, const Environment& env, const std::vector<std::uint64_t>& seeds,
                        bool sample) {
  if (seeds.empty()) throw std::invalid_argument("best_rollout: no seeds");
  Trajectory best = rollout(policy, env, seeds.front(), sample);
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    Trajectory t = rollout(policy, env, seeds[i], sample);
    if (better(t, best)) best = std::move(t);
  }
  return best;
}

FinalResult copier_final(const Policy& policy_a, const Policy& policy_b, const TwoViewInstance& instance,
                         const std::vector<std::uint64_t>& seeds, bool sample) {
  FinalResult r;
  r.best_a = best_rollout(policy_a, *instance.view_a, seeds, sample);
  r.best_b = best_rollout(policy_b, *instance.view_b, seeds, sample);
  if (better(r.best_b, r.best_a)) {
    r.best = r.best_b;
    r.view = View::B;
  } else {
    r.best = r.best_a;
    r.view = View::A;
  }
  return r;
}

}  // namespace copier
