#include "copier/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace copier {

void MdpSpec::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (horizon_cap < 1) throw std::invalid_argument("horizon_cap must be at least 1");
}

double Trajectory::total_reward() const {
  double sum = 0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

double total_discounted_reward(const Trajectory& traj, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  double sum = 0, discount = 1;
  for (const auto& s : traj.steps) {
    sum += discount * s.reward;
    discount *= gamma;
  }
  return sum;
}

Trajectory map_trajectory(const Trajectory& traj, const ViewMapping& mapping) {
  if (traj.view != mapping.source())
    throw std::invalid_argument(std::string("map_trajectory: trajectory is in view ") +
                                to_string(traj.view) + ", mapping expects " + to_string(mapping.source()));
  if (!traj.complete)
    throw std::invalid_argument("map_trajectory: trajectory is incomplete (no terminal state after " +
                                std::to_string(traj.size()) + " steps)");
  Trajectory out = mapping.fn(traj);
  out.view = mapping.target();
  if (out.total_reward() != traj.total_reward()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "map_trajectory %s: total reward %.17g became %.17g",
                  to_string(mapping.direction), traj.total_reward(), out.total_reward());
    throw std::logic_error(buf);
  }
  return out;
}

std::vector<Trajectory> map_trajectories(const std::vector<Trajectory>& trajs,
                                         const ViewMapping& mapping) {
  std::vector<Trajectory> out;
  out.reserve(trajs.size());
  for (const auto& t : trajs) out.push_back(map_trajectory(t, mapping));
  return out;
}

double OccupancyEstimate::at(const std::string& state, const std::string& action) const {
  auto it = table_.find({state, action});
  return it == table_.end() ? 0.0 : it->second;
}

double OccupancyEstimate::state_mass(const std::string& state) const {
  auto it = states_.find(state);
  return it == states_.end() ? 0.0 : it->second;
}

double OccupancyEstimate::total_mass() const {
  double sum = 0;
  for (const auto& [k, v] : table_) sum += v;
  return sum;
}

Vector OccupancyEstimate::action_distribution(const std::string& state,
                                              const std::vector<std::string>& actions) const {
  Vector p = Vector::Zero(static_cast<Eigen::Index>(actions.size()));
  const double mass = state_mass(state);
  if (mass <= 0) return p;
  for (std::size_t i = 0; i < actions.size(); ++i) p[static_cast<Eigen::Index>(i)] = at(state, actions[i]) / mass;
  return p;
}

void OccupancyEstimate::add(const std::string& state, const std::string& action, double mass) {
  table_[{state, action}] += mass;
  states_[state] += mass;
}

OccupancyEstimate estimate_occupancy(const std::vector<Trajectory>& trajs, double gamma) {
  if (trajs.empty()) throw std::invalid_argument("estimate_occupancy: no trajectories");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  const View view = trajs.front().view;
  const double weight = 1.0 / static_cast<double>(trajs.size());
  OccupancyEstimate occ(gamma, trajs.size());
  for (const auto& t : trajs) {
    if (t.view != view) throw std::invalid_argument("estimate_occupancy: trajectories from mixed views");
    double discount = 1;
    for (const auto& s : t.steps) {
      occ.add(s.state, s.action, weight * discount);
      discount *= gamma;
    }
  }
  return occ;
}

OccupancyEstimate mapped_occupancy(const std::vector<Trajectory>& trajs, const ViewMapping& mapping,
                                   double gamma) {
  if (trajs.empty()) throw std::invalid_argument("mapped_occupancy: no trajectories");
  return estimate_occupancy(map_trajectories(trajs, mapping), gamma);
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  char buf[32];
  for (const auto& s : traj.steps) {
    std::snprintf(buf, sizeof buf, "%.17g", s.reward);
    os << s.state << '\t' << s.action << '\t' << buf << '\n';
  }
}

}  // namespace copier
