#include "copier/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace copier {

// Parameter layouts (all matrices column-major):
//   tabular/state    : Theta (k x d)                   logits = Theta x
//   linear/state     : W (k x d), b (k)                logits = W x + b
//   mlp/state        : W1 (h x d), b1 (h), W2 (k x h), b2 (k)
//                      logits = W2 tanh(W1 x + b1) + b2
//   linear/candidate : w (d)                           logit_j = w . phi_j
//   mlp/candidate    : W1 (h x d), b1 (h), w2 (h)      logit_j = w2 . tanh(W1 phi_j + b1)

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

void check_state_input(const Policy& p, const Vector& x) {
  if (x.size() != p.features)
    throw std::invalid_argument("policy expects " + std::to_string(p.features) +
                                " state features, got " + std::to_string(x.size()));
}

void check_candidate_input(const Policy& p, const Observation& obs) {
  if (obs.candidates.rows() != static_cast<Eigen::Index>(obs.num_choices()))
    throw std::invalid_argument("observation has " + std::to_string(obs.candidates.rows()) +
                                " candidate rows for " + std::to_string(obs.num_choices()) + " actions");
  if (obs.num_choices() > 0 && obs.candidates.cols() != p.features)
    throw std::invalid_argument("policy expects " + std::to_string(p.features) +
                                " candidate features, got " + std::to_string(obs.candidates.cols()));
}

Vector state_logits(const Policy& p, const Vector& x) {
  check_state_input(p, x);
  const int d = p.features, k = p.actions, h = p.hidden;
  const double* w = p.params.data();
  switch (p.arch) {
    case Architecture::tabular: return ConstMap(w, k, d) * x;
    case Architecture::linear: return ConstMap(w, k, d) * x + Eigen::Map<const Vector>(w + k * d, k);
    case Architecture::mlp: {
      const Vector a = (ConstMap(w, h, d) * x + Eigen::Map<const Vector>(w + h * d, h)).array().tanh().matrix();
      const double* w2 = w + h * d + h;
      return ConstMap(w2, k, h) * a + Eigen::Map<const Vector>(w2 + k * h, k);
    }
  }
  throw std::logic_error("unreachable");
}

Vector state_backprop(const Policy& p, const Vector& x, const Vector& dl) {
  check_state_input(p, x);
  const int d = p.features, k = p.actions, h = p.hidden;
  Vector g = Vector::Zero(p.params.size());
  double* out = g.data();
  switch (p.arch) {
    case Architecture::tabular: MutMap(out, k, d) = dl * x.transpose(); break;
    case Architecture::linear:
      MutMap(out, k, d) = dl * x.transpose();
      Eigen::Map<Vector>(out + k * d, k) = dl;
      break;
    case Architecture::mlp: {
      const double* w = p.params.data();
      const Vector a = (ConstMap(w, h, d) * x + Eigen::Map<const Vector>(w + h * d, h)).array().tanh().matrix();
      const double* w2 = w + h * d + h;
      MutMap(out + h * d + h, k, h) = dl * a.transpose();
      Eigen::Map<Vector>(out + h * d + h + k * h, k) = dl;
      const Vector dz = ((ConstMap(w2, k, h).transpose() * dl).array() * (1.0 - a.array().square())).matrix();
      MutMap(out, h, d) = dz * x.transpose();
      Eigen::Map<Vector>(out + h * d, h) = dz;
      break;
    }
  }
  return g;
}

Vector candidate_logits(const Policy& p, const Observation& obs) {
  check_candidate_input(p, obs);
  const int d = p.features, h = p.hidden;
  const double* w = p.params.data();
  if (obs.num_choices() == 0) return Vector(0);
  switch (p.arch) {
    case Architecture::linear: return obs.candidates * Eigen::Map<const Vector>(w, d);
    case Architecture::mlp: {
      Matrix z = obs.candidates * ConstMap(w, h, d).transpose();
      z.rowwise() += Eigen::Map<const Vector>(w + h * d, h).transpose();
      return z.array().tanh().matrix() * Eigen::Map<const Vector>(w + h * d + h, h);
    }
    case Architecture::tabular: break;
  }
  throw std::invalid_argument("tabular policies need a state head");
}

Vector candidate_backprop(const Policy& p, const Observation& obs, const Vector& dl) {
  check_candidate_input(p, obs);
  const int d = p.features, h = p.hidden;
  Vector g = Vector::Zero(p.params.size());
  if (obs.num_choices() == 0) return g;
  double* out = g.data();
  const double* w = p.params.data();
  switch (p.arch) {
    case Architecture::linear: Eigen::Map<Vector>(out, d) = obs.candidates.transpose() * dl; break;
    case Architecture::mlp: {
      Matrix z = obs.candidates * ConstMap(w, h, d).transpose();
      z.rowwise() += Eigen::Map<const Vector>(w + h * d, h).transpose();
      const Matrix a = z.array().tanh().matrix();
      const auto w2 = Eigen::Map<const Vector>(w + h * d + h, h);
      Eigen::Map<Vector>(out + h * d + h, h) = a.transpose() * dl;
      const Matrix dz = ((dl * w2.transpose()).array() * (1.0 - a.array().square())).matrix();
      MutMap(out, h, d) = dz.transpose() * obs.candidates;
      Eigen::Map<Vector>(out + h * d, h) = dz.colwise().sum().transpose();
      break;
    }
    case Architecture::tabular: throw std::invalid_argument("tabular policies need a state head");
  }
  return g;
}

Trajectory rollout(const Policy& policy, const Environment& start, std::uint64_t seed, bool greedy) {
  auto env = start.clone();
  const MdpSpec spec = env->spec();
  Rng rng(seed);
  Trajectory traj;
  traj.view = spec.view;
  while (!env->terminal() && static_cast<int>(traj.steps.size()) < spec.horizon_cap) {
    Step step;
    step.state = env->state_token();
    step.obs = env->observe();
    if (step.obs.num_choices() == 0) throw std::runtime_error("non-terminal state without legal actions");
    if (greedy) {
      step.choice = greedy_action(policy, step.obs);
    } else {
      const Vector p = action_distribution(policy, step.obs);
      const double u = uniform01(rng);
      double acc = 0;
      step.choice = static_cast<std::size_t>(p.size() - 1);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) {
          step.choice = static_cast<std::size_t>(i);
          break;
        }
      }
    }
    step.action = step.obs.actions[step.choice];
    step.reward = env->step(step.choice, rng);
    traj.steps.push_back(std::move(step));
  }
  traj.final_state = env->state_token();
  traj.complete = env->terminal();
  traj.solved = env->solved();
  return traj;
}

}  // namespace

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::tabular: return "tabular";
    case Architecture::linear: return "linear";
    case Architecture::mlp: return "mlp";
  }
  return "?";
}

const char* to_string(Head h) { return h == Head::state ? "state" : "candidate"; }

Architecture parse_architecture(const std::string& s) {
  if (s == "tabular") return Architecture::tabular;
  if (s == "linear") return Architecture::linear;
  if (s == "mlp" || s == "mlp-1-hidden") return Architecture::mlp;
  throw std::invalid_argument("unknown architecture '" + s + "'");
}

Head parse_head(const std::string& s) {
  if (s == "state") return Head::state;
  if (s == "candidate") return Head::candidate;
  throw std::invalid_argument("unknown policy head '" + s + "'");
}

std::size_t parameter_count(Architecture arch, Head head, int d, int k, int h) {
  const auto D = static_cast<std::size_t>(d), K = static_cast<std::size_t>(k), H = static_cast<std::size_t>(h);
  if (head == Head::state) {
    switch (arch) {
      case Architecture::tabular: return K * D;
      case Architecture::linear: return K * D + K;
      case Architecture::mlp: return H * D + H + K * H + K;
    }
  } else {
    switch (arch) {
      case Architecture::tabular: throw std::invalid_argument("tabular policies need a state head");
      case Architecture::linear: return D;
      case Architecture::mlp: return H * D + 2 * H;
    }
  }
  return 0;
}

Policy Policy::zeros(Architecture arch, Head head, int features, int actions, int hidden) {
  Policy p;
  p.arch = arch;
  p.head = head;
  p.features = features;
  p.actions = head == Head::candidate ? 0 : actions;
  p.hidden = arch == Architecture::mlp ? hidden : 0;
  p.params = Vector::Zero(static_cast<Eigen::Index>(copier::parameter_count(arch, head, features, p.actions, p.hidden)));
  p.validate();
  return p;
}

Policy Policy::random(Architecture arch, Head head, int features, int actions, int hidden,
                      std::uint64_t seed) {
  Policy p = zeros(arch, head, features, actions, hidden);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < p.params.size(); ++i) p.params[i] = uniform(rng, -0.05, 0.05);
  return p;
}

Policy Policy::with_params(Vector p) const {
  Policy out = *this;
  out.params = std::move(p);
  out.validate();
  return out;
}

void Policy::validate() const {
  if (features < 1) throw std::invalid_argument("policy needs at least one feature");
  if (head == Head::state && actions < 1) throw std::invalid_argument("state-head policy needs k >= 1");
  if (arch == Architecture::mlp && hidden < 1) throw std::invalid_argument("mlp policy needs hidden width >= 1");
  if (static_cast<std::size_t>(params.size()) != copier::parameter_count(arch, head, features, actions, hidden))
    throw std::invalid_argument("parameter count does not match architecture");
  if (!params.allFinite()) throw std::invalid_argument("non-finite policy parameter");
}

Vector logits(const Policy& policy, const Observation& obs) {
  if (policy.head == Head::state) return state_logits(policy, obs.state);
  return candidate_logits(policy, obs);
}

Vector action_distribution(const Policy& policy, const Observation& obs) {
  return softmax(logits(policy, obs));
}

Vector action_distribution(const Policy& policy, const Vector& features) {
  if (policy.head != Head::state) throw std::invalid_argument("feature-vector evaluation needs a state head");
  return softmax(state_logits(policy, features));
}

std::size_t greedy_action(const Policy& policy, const Observation& obs) {
  return static_cast<std::size_t>(argmax(action_distribution(policy, obs)));
}

Vector backprop_logits(const Policy& policy, const Observation& obs, const Vector& dlogits) {
  if (policy.head == Head::state) return state_backprop(policy, obs.state, dlogits);
  return candidate_backprop(policy, obs, dlogits);
}

Vector log_prob_gradient(const Policy& policy, const Observation& obs, std::size_t choice) {
  Vector dl = -action_distribution(policy, obs);
  if (choice >= static_cast<std::size_t>(dl.size()))
    throw std::invalid_argument("action index " + std::to_string(choice) + " out of range");
  dl[static_cast<Eigen::Index>(choice)] += 1.0;
  return backprop_logits(policy, obs, dl);
}

Vector log_prob_gradient(const Policy& policy, const Vector& features, std::size_t action) {
  Observation obs;
  obs.state = features;
  return log_prob_gradient(policy, obs, action);
}

Trajectory sample_trajectory(const Policy& policy, const Environment& env, std::uint64_t seed) {
  return rollout(policy, env, seed, false);
}

Trajectory greedy_trajectory(const Policy& policy, const Environment& env, std::uint64_t seed) {
  return rollout(policy, env, seed, true);
}

void write_policy(std::ostream& os, const Policy& policy) {
  policy.validate();
  os << "copier-policy 1\n"
     << "architecture " << to_string(policy.arch) << '\n'
     << "head " << to_string(policy.head) << '\n'
     << "features " << policy.features << '\n'
     << "actions " << policy.actions << '\n'
     << "hidden " << policy.hidden << '\n'
     << "params " << policy.params.size() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < policy.params.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", policy.params[i]);
    os << buf << '\n';
  }
}

Policy read_policy(std::istream& is) {
  auto expect = [&](const char* key) {
    std::string k;
    if (!(is >> k) || k != key) throw std::runtime_error(std::string("policy checkpoint: expected '") + key + "'");
  };
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "copier-policy" || version != 1)
    throw std::runtime_error("policy checkpoint: bad header");
  std::string arch, head;
  Policy p;
  long count = 0;
  expect("architecture");
  is >> arch;
  expect("head");
  is >> head;
  expect("features");
  is >> p.features;
  expect("actions");
  is >> p.actions;
  expect("hidden");
  is >> p.hidden;
  expect("params");
  is >> count;
  if (!is || count < 0) throw std::runtime_error("policy checkpoint: bad dimensions");
  p.arch = parse_architecture(arch);
  p.head = parse_head(head);
  p.params.resize(count);
  for (long i = 0; i < count; ++i) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("policy checkpoint: truncated parameter list");
    p.params[i] = std::stod(tok);
  }
  p.validate();
  return p;
}

void save_policy(const std::string& path, const Policy& policy) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_policy(os, policy);
}

Policy load_policy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("missing policy checkpoint " + path);
  return read_policy(is);
}

}  // namespace copier
