#include "copier/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copier {

namespace {

double mean_return(const std::vector<Trajectory>& trajs, double gamma) {
  double sum = 0;
  for (const auto& t : trajs) sum += total_discounted_reward(t, gamma);
  return sum / static_cast<double>(trajs.size());
}

double max_kl_between(const std::vector<Trajectory>& trajs, const Policy& before, const Policy& after) {
  double worst = 0;
  for (const auto& t : trajs)
    for (const auto& s : t.steps)
      worst = std::max(worst, kl_divergence(action_distribution(before, s.obs), action_distribution(after, s.obs)));
  return worst;
}

double max_abs_advantage(const std::vector<Trajectory>& trajs, const BaselineModel& baseline, double gamma) {
  double worst = 0;
  for (const auto& t : trajs) {
    const auto g = returns_to_go(t, gamma);
    for (std::size_t i = 0; i < t.size(); ++i)
      worst = std::max(worst, std::abs(g[i] - baseline.predict(t.steps[i].obs.state)));
  }
  return worst;
}

}  // namespace

double max_mapped_js(const std::vector<Trajectory>& source_trajs, const ViewMapping& mapping,
                     const Policy& target_policy, double gamma, int* unmapped) {
  std::vector<Trajectory> mapped;
  for (const auto& t : source_trajs) {
    if (!t.complete || !t.solved) {
      if (unmapped) ++*unmapped;
      continue;
    }
    mapped.push_back(map_trajectory(t, mapping));
  }
  if (mapped.empty()) return 0.0;
  const OccupancyEstimate occ = estimate_occupancy(mapped, gamma);
  double worst = 0;
  for (const auto& t : mapped)
    for (const auto& s : t.steps) {
      const Vector p = occ.action_distribution(s.state, s.obs.actions);
      worst = std::max(worst, js_divergence(p, action_distribution(target_policy, s.obs)));
    }
  return worst;
}

ImprovementDiagnostics improvement_diagnostics(const std::vector<InstanceRollouts>& rollouts,
                                               const Policy& a_before, const Policy& a_after,
                                               const Policy& b_before, const Policy& b_after, double gamma_a,
                                               double gamma_b) {
  if (rollouts.empty()) throw std::invalid_argument("improvement_diagnostics: no instances");
  std::vector<Trajectory> all_a, all_b;
  for (const auto& r : rollouts) {
    if (!r.instance) throw std::invalid_argument("improvement_diagnostics: rollout without an instance");
    if (r.a.empty() || r.b.empty())
      throw std::invalid_argument("improvement_diagnostics: instance " + r.instance->id + " lacks rollouts in one view");
    all_a.insert(all_a.end(), r.a.begin(), r.a.end());
    all_b.insert(all_b.end(), r.b.begin(), r.b.end());
  }
  const BaselineModel base_a = fit_linear_baseline(all_a, gamma_a);
  const BaselineModel base_b = fit_linear_baseline(all_b, gamma_b);

  ImprovementDiagnostics d;
  d.gamma_a = gamma_a;
  d.gamma_b = gamma_b;
  const double count = static_cast<double>(rollouts.size());
  for (const auto& r : rollouts) {
    const double eta_a = mean_return(r.a, gamma_a);
    const double eta_b = mean_return(r.b, gamma_b);
    const double eps_a = max_abs_advantage(r.a, base_a, gamma_a);
    const double eps_b = max_abs_advantage(r.b, base_b, gamma_b);
    d.eps_hat_a = std::max(d.eps_hat_a, eps_a);
    d.eps_hat_b = std::max(d.eps_hat_b, eps_b);
    d.alpha_hat_a += max_kl_between(r.a, a_before, a_after) / count;
    d.alpha_hat_b += max_kl_between(r.b, b_before, b_after) / count;
    if (eta_a >= eta_b) {
      ++d.instances_d1;
      d.delta_hat_1 += (eta_a - eta_b) / count;
      d.eps_hat_a_d1 = std::max(d.eps_hat_a_d1, eps_a);
      d.beta_hat_d1 += max_mapped_js(r.a, r.instance->a_to_b, b_before, gamma_b, &d.unmapped) / count;
    } else {
      ++d.instances_d2;
      d.delta_hat_2 += (eta_b - eta_a) / count;
      d.eps_hat_b_d2 = std::max(d.eps_hat_b_d2, eps_b);
      d.beta_hat_d2 += max_mapped_js(r.b, r.instance->b_to_a, a_before, gamma_a, &d.unmapped) / count;
    }
  }
  d.applicable = gamma_a < 1 && gamma_b < 1;
  if (d.applicable) {
    d.penalty_a = 2 * gamma_a * (4 * d.beta_hat_d2 * d.eps_hat_b_d2 + d.alpha_hat_a * d.eps_hat_a) /
                  ((1 - gamma_a) * (1 - gamma_a));
    d.penalty_b = 2 * gamma_b * (4 * d.beta_hat_d1 * d.eps_hat_a_d1 + d.alpha_hat_b * d.eps_hat_b) /
                  ((1 - gamma_b) * (1 - gamma_b));
  }
  return d;
}

DisagreementStats::DisagreementStats(int actions)
    : k(actions), n_a(static_cast<std::size_t>(actions)), n_b(static_cast<std::size_t>(actions)),
      n_agree(static_cast<std::size_t>(actions)) {}

void DisagreementStats::add(std::size_t a, std::size_t b) {
  if (a >= n_a.size() || b >= n_b.size()) throw std::invalid_argument("disagreement: action out of range");
  ++n_a[a];
  ++n_b[b];
  if (a == b) ++n_agree[a];
  ++total;
}

void DisagreementStats::validate() const {
  const auto K = static_cast<std::size_t>(k);
  if (k < 1 || n_a.size() != K || n_b.size() != K || n_agree.size() != K)
    throw std::invalid_argument("disagreement: count vectors do not match k");
  long sum_a = 0, sum_b = 0;
  for (std::size_t i = 0; i < K; ++i) {
    if (n_a[i] < 0 || n_b[i] < 0 || n_agree[i] < 0) throw std::invalid_argument("disagreement: negative count");
    if (n_agree[i] > std::min(n_a[i], n_b[i])) throw std::invalid_argument("disagreement: agreement exceeds marginals");
    sum_a += n_a[i];
    sum_b += n_b[i];
  }
  if (sum_a != total || sum_b != total) throw std::invalid_argument("disagreement: marginals do not sum to N");
}

DisagreementStats disagreement_counts(const std::vector<Trajectory>& trajs_a, const ViewMapping& a_to_b,
                                      const Policy& policy_a, const Policy& policy_b, int k) {
  if (a_to_b.direction != Direction::a_to_b) throw std::invalid_argument("disagreement_counts: need the A->B mapping");
  DisagreementStats stats(k);
  for (const auto& t : trajs_a) {
    const Trajectory m = map_trajectory(t, a_to_b);
    if (m.size() != t.size()) throw std::invalid_argument("disagreement_counts: mapping is not step-aligned");
    for (std::size_t i = 0; i < t.size(); ++i)
      stats.add(greedy_action(policy_a, t.steps[i].obs), greedy_action(policy_b, m.steps[i].obs));
  }
  return stats;
}

BoundReport pac_disagreement_bound(const DisagreementStats& stats, std::size_t bits_a, std::size_t bits_b,
                                   double sigma) {
  if (!(sigma > 0 && sigma < 1)) throw std::invalid_argument("pac_disagreement_bound: sigma must lie in (0, 1)");
  stats.validate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto K = static_cast<std::size_t>(stats.k);
  BoundReport r;
  r.k = stats.k;
  r.sigma = sigma;
  r.bits_a = bits_a;
  r.bits_b = bits_b;
  r.eps.assign(K, nan);
  r.zeta.assign(K, nan);
  r.b.assign(K, nan);
  r.defined.assign(K, 0);
  r.valid.assign(K, 0);
  r.max_b = nan;
  const double complexity = std::log(2.0) * static_cast<double>(bits_a + bits_b) + std::log(2.0 * stats.k / sigma);
  bool every_valid = true;
  for (std::size_t i = 0; i < K; ++i) {
    if (stats.n_b[i] == 0) {
      every_valid = false;
      continue;
    }
    r.defined[i] = 1;
    const double n = static_cast<double>(stats.n_b[i]);
    const double agree = static_cast<double>(stats.n_agree[i]) / n;
    const double disagree = static_cast<double>(stats.n_b[i] - stats.n_agree[i]) / n;
    r.eps[i] = std::sqrt(complexity / (2.0 * n));
    r.zeta[i] = agree - disagree - 2.0 * r.eps[i];
    r.b[i] = (disagree + r.eps[i]) / r.zeta[i];
    r.valid[i] = r.zeta[i] > 0 && r.b[i] <= 1;
    if (!r.valid[i]) {
      every_valid = false;
      continue;
    }
    if (r.vacuous || r.b[i] > r.max_b) r.max_b = r.b[i];
    r.vacuous = false;
  }
  r.all_valid = every_valid;
  return r;
}

void GapBoundParams::validate() const {
  if (!(u >= 0)) throw std::invalid_argument("gap bound: u must be nonnegative");
  if (!(horizon >= 1)) throw std::invalid_argument("gap bound: horizon must be at least 1");
  if (!(epsilon >= 0 && epsilon <= 1)) throw std::invalid_argument("gap bound: epsilon must lie in [0, 1]");
}

double performance_gap_bound(const GapBoundParams& p) {
  p.validate();
  return p.u * p.horizon * p.epsilon;
}

namespace {

template <typename Correct>
double error_rate(const Policy& policy, const std::vector<Trajectory>& trajs, Correct correct) {
  long steps = 0, wrong = 0;
  for (const auto& t : trajs)
    for (const auto& s : t.steps) {
      ++steps;
      if (!correct(s.state, greedy_action(policy, s.obs))) ++wrong;
    }
  return steps == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(steps);
}

template <typename Map>
const typename Map::mapped_type& lookup(const Map& optimal, const std::string& state) {
  const auto it = optimal.find(state);
  if (it == optimal.end()) throw std::invalid_argument("measure_policy_error: no optimal action for state " + state);
  return it->second;
}

}  // namespace

double measure_policy_error(const Policy& policy, const std::map<std::string, std::size_t>& optimal,
                            const std::vector<Trajectory>& trajs) {
  return error_rate(policy, trajs,
                    [&](const std::string& s, std::size_t a) { return lookup(optimal, s) == a; });
}

double measure_policy_error(const Policy& policy, const std::map<std::string, std::vector<std::size_t>>& optimal,
                            const std::vector<Trajectory>& trajs) {
  return error_rate(policy, trajs, [&](const std::string& s, std::size_t a) {
    const auto& set = lookup(optimal, s);
    return std::find(set.begin(), set.end(), a) != set.end();
  });
}

}  // namespace copier
