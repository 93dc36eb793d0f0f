#include "ppm/control.hpp"

#include <algorithm>
#include <cmath>

#include "ppm/errors.hpp"

namespace ppm {

FeatureSpace::FeatureSpace(FeatureMode mode, int n_tests, int n_observations, int n_actions)
    : mode_(mode), n_tests_(n_tests), n_obs_(n_observations), n_actions_(n_actions) {
  if (n_tests < 0 || n_observations < 1 || n_actions < 1) throw ConfigError("bad feature space dimensions");
  const std::int64_t obs_slots = n_observations + 1;
  std::int64_t size = 0;
  switch (mode) {
    case FeatureMode::predictive:
      size = static_cast<std::int64_t>(n_tests) * kBins + obs_slots;
      break;
    case FeatureMode::som:
      size = 2 * obs_slots + n_actions + 1;
      break;
    case FeatureMode::som_joint:
      size = obs_slots * obs_slots * (n_actions + 1);
      if (size > 4'000'000) throw ConfigError("joint SOM features need a smaller observation alphabet");
      break;
  }
  size_ = static_cast<int>(size);
}

std::vector<int> FeatureSpace::build(const Profile* profile, int last_obs, int prev_obs, int prev_action) const {
  const int obs_slots = n_obs_ + 1;
  auto slot = [&](int o) {
    if (o < -1 || o >= n_obs_) throw ConfigError("observation outside the feature space");
    return o + 1;
  };
  const int last = slot(last_obs);
  std::vector<int> f;
  if (mode_ == FeatureMode::predictive) {
    if (profile == nullptr) throw ConfigError("predictive features need a profile");
    if (static_cast<int>(profile->size()) != n_tests_) throw ConfigError("profile size does not match the tests");
    for (int t = 0; t < n_tests_; ++t) {
      double p = (*profile)[static_cast<std::size_t>(t)];
      if (!(p >= 0.0 && p <= 1.0)) {
        ++clamped_;
        p = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
      }
      f.push_back(t * kBins + bin(p));
    }
    f.push_back(n_tests_ * kBins + last);
    return f;
  }
  if (prev_action < -1 || prev_action >= n_actions_) throw ConfigError("action outside the feature space");
  const int prev = slot(prev_obs);
  const int act = prev_action + 1;
  if (mode_ == FeatureMode::som) {
    f = {last, obs_slots + prev, 2 * obs_slots + act};
  } else {
    f = {(prev * (n_actions_ + 1) + act) * obs_slots + last};
  }
  return f;
}

SoftmaxPolicy::SoftmaxPolicy(int n_features, int n_actions) : w_(Eigen::MatrixXd::Zero(n_features, n_actions)) {
  if (n_features < 1 || n_actions < 1) throw ConfigError("policy needs features and actions");
}

Eigen::VectorXd SoftmaxPolicy::probabilities(const std::vector<int>& active) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(w_.cols());
  for (int i : active) s += w_.row(i).transpose();
  const double top = s.maxCoeff();
  Eigen::VectorXd e = (s.array() - top).exp();
  return e / e.sum();
}

int SoftmaxPolicy::sample(const std::vector<int>& active, Rng& rng) const {
  const Eigen::VectorXd p = probabilities(active);
  double u = uniform01(rng);
  for (int a = 0; a + 1 < p.size(); ++a) {
    if (u < p(a)) return a;
    u -= p(a);
  }
  return static_cast<int>(p.size()) - 1;
}

Olgarb::Olgarb(int n_features, int n_actions, OlgarbParams p)
    : p_(p), z_(Eigen::MatrixXd::Zero(n_features, n_actions)), in_rows_(static_cast<std::size_t>(n_features), 0) {}

void Olgarb::step(SoftmaxPolicy& policy, const std::vector<int>& active, int action, double reward) {
  if (action < 0 || action >= policy.actions()) throw ConfigError("action outside the policy");
  const Eigen::VectorXd pi = policy.probabilities(active);
  std::size_t kept = 0;
  for (int r : rows_) {
    z_.row(r) *= p_.discount;
    if (z_.row(r).cwiseAbs().maxCoeff() < p_.prune) {
      z_.row(r).setZero();
      in_rows_[static_cast<std::size_t>(r)] = 0;
    } else {
      rows_[kept++] = r;
    }
  }
  rows_.resize(kept);
  for (int i : active) {
    for (int a = 0; a < policy.actions(); ++a) z_(i, a) += (a == action ? 1.0 : 0.0) - pi(a);
    if (!in_rows_[static_cast<std::size_t>(i)]) {
      in_rows_[static_cast<std::size_t>(i)] = 1;
      rows_.push_back(i);
    }
  }
  const double advantage = reward - baseline_;
  baseline_ += p_.baseline_step * advantage;
  Eigen::MatrixXd& w = policy.weights();
  for (int r : rows_) {
    w.row(r) += p_.learning_rate * advantage * z_.row(r);
    if (!w.row(r).allFinite()) {
      throw ConsistencyError("policy weights became non-finite at feature " + std::to_string(r) +
                             " (reward " + std::to_string(reward) + ", baseline " + std::to_string(baseline_) + ")");
    }
  }
}

}  // namespace ppm
