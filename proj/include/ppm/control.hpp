#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ppm/core.hpp"

namespace ppm {

enum class FeatureMode { predictive, som, som_joint };

// Binary feature layout. Observation slots carry one extra "none" entry for
// the start of a stream.
class FeatureSpace {
 public:
  FeatureSpace(FeatureMode mode, int n_tests, int n_observations, int n_actions);

  FeatureMode mode() const { return mode_; }
  int size() const { return size_; }

  // Active ids. profile is ignored by the SOM modes; -1 stands for "none".
  std::vector<int> build(const Profile* profile, int last_obs, int prev_obs, int prev_action) const;
  std::int64_t clamped() const { return clamped_; }

  static constexpr int kBins = 10;
  static int bin(double p) { return p >= 1.0 ? kBins - 1 : static_cast<int>(p * kBins); }

 private:
  FeatureMode mode_;
  int n_tests_;
  int n_obs_;
  int n_actions_;
  int size_ = 0;
  mutable std::int64_t clamped_ = 0;
};

// Softmax policy over actions with weights w[feature, action].
class SoftmaxPolicy {
 public:
  SoftmaxPolicy(int n_features, int n_actions);

  Eigen::VectorXd probabilities(const std::vector<int>& active) const;
  int sample(const std::vector<int>& active, Rng& rng) const;
  Eigen::MatrixXd& weights() { return w_; }
  const Eigen::MatrixXd& weights() const { return w_; }
  int actions() const { return static_cast<int>(w_.cols()); }

 private:
  Eigen::MatrixXd w_;
};

struct OlgarbParams {
  double learning_rate = 0.01;
  double discount = 0.95;
  double baseline_step = 0.001;
  double prune = 1e-12;  // trace rows below this magnitude are dropped
};

// Online policy gradient with an eligibility trace and an average-reward baseline.
class Olgarb {
 public:
  Olgarb(int n_features, int n_actions, OlgarbParams p);

  // z <- beta z + grad log pi(action); adv = reward - baseline; baseline += kappa adv; w += eta adv z
  void step(SoftmaxPolicy& policy, const std::vector<int>& active, int action, double reward);
  double baseline() const { return baseline_; }
  const Eigen::MatrixXd& trace() const { return z_; }

 private:
  OlgarbParams p_;
  Eigen::MatrixXd z_;
  std::vector<int> rows_;       // rows of z that may be non-zero
  std::vector<char> in_rows_;
  double baseline_ = 0.0;
};

}  // namespace ppm
