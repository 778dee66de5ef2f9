#pragma once

// A deterministic chain used by the tests: `length` steps, `k` actions, action
// i earns rewards[i]; features are [position / length, 1].

#include "copier/mdp.hpp"

#include <string>
#include <vector>

namespace toy {

class Chain final : public copier::Environment {
 public:
  Chain(int length, std::vector<double> rewards, copier::View view = copier::View::A, double gamma = 1.0,
        int horizon_cap = 0)
      : length_(length), rewards_(std::move(rewards)), view_(view), gamma_(gamma),
        cap_(horizon_cap > 0 ? horizon_cap : length) {}

  copier::MdpSpec spec() const override { return {view_, gamma_, cap_}; }
  std::unique_ptr<copier::Environment> clone() const override { return std::make_unique<Chain>(*this); }
  bool terminal() const override { return pos_ >= length_; }
  std::string state_token() const override { return "s" + std::to_string(pos_); }
  copier::Observation observe() const override {
    copier::Observation o;
    o.state = copier::Vector(2);
    o.state << static_cast<double>(pos_) / length_, 1.0;
    for (std::size_t i = 0; i < rewards_.size(); ++i) o.actions.push_back("a" + std::to_string(i));
    return o;
  }
  double step(std::size_t choice, copier::Rng&) override {
    ++pos_;
    return rewards_.at(choice);
  }

 private:
  int length_;
  std::vector<double> rewards_;
  copier::View view_;
  double gamma_;
  int cap_;
  int pos_ = 0;
};

/// Identity mapping between two copies of a chain (relabels the view only).
inline copier::ViewMapping identity(copier::Direction d) {
  return {d, [](const copier::Trajectory& t) { return t; }};
}

inline copier::Step step(std::string s, std::string a, double r) {
  copier::Step st;
  st.state = std::move(s);
  st.action = std::move(a);
  st.reward = r;
  return st;
}

inline copier::Trajectory make_traj(copier::View v, std::vector<copier::Step> steps, bool complete = true) {
  copier::Trajectory t;
  t.view = v;
  t.steps = std::move(steps);
  t.complete = complete;
  return t;
}

}  // namespace toy
