#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ppm/core.hpp"

namespace ppm {

// Tabular POMDP with the full emission form P(o | s, a, s').
//
// Emission tables are stored only for (action, observation) pairs that can
// occur; every other pair has probability zero. For each (s, a, s') the
// stored emissions sum to one.
class TabularPomdp {
 public:
  TabularPomdp() = default;
  TabularPomdp(int n_states, int n_actions, int n_observations);

  int states() const { return n_; }
  int actions() const { return n_actions_; }
  int observations() const { return n_obs_; }

  Eigen::VectorXd& initial() { return initial_; }
  const Eigen::VectorXd& initial() const { return initial_; }
  // T(s, s') = P(s' | s, a)
  Eigen::MatrixXd& transition(int a) { return t_[static_cast<std::size_t>(a)]; }
  const Eigen::MatrixXd& transition(int a) const { return t_[static_cast<std::size_t>(a)]; }
  // E(s, s') = P(o | s, a, s'); nullptr when (a, o) is impossible everywhere.
  const Eigen::MatrixXd* emission(int a, int o) const;
  Eigen::MatrixXd& emission_slot(int a, int o);
  // Observations with a stored table for action a, ascending.
  const std::vector<int>& emitted(int a) const { return emitted_[static_cast<std::size_t>(a)]; }

  // Elementwise T(a) * E(a, o), cached.
  const Eigen::MatrixXd* joint(int a, int o) const;
  void invalidate_cache() const { joint_.clear(); }

  // Throws ConsistencyError unless every distribution sums to 1 within tol.
  void validate(double tol = 1e-10) const;

 private:
  std::uint64_t key(int a, int o) const {
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n_obs_) + static_cast<std::uint64_t>(o);
  }

  int n_ = 0;
  int n_actions_ = 0;
  int n_obs_ = 0;
  Eigen::VectorXd initial_;
  std::vector<Eigen::MatrixXd> t_;
  std::unordered_map<std::uint64_t, Eigen::MatrixXd> e_;
  std::vector<std::vector<int>> emitted_;
  mutable std::unordered_map<std::uint64_t, Eigen::MatrixXd> joint_;
};

// Eq. 4 belief update; throws ImpossibleObservationError when the observation
// has (numerically) zero probability.
Eigen::VectorXd belief_update(const TabularPomdp& m, const Eigen::VectorXd& b, int a, int o);

// Log-probability of the observations given the actions; -infinity when impossible.
double log_likelihood(const TabularPomdp& m, const History& h);

struct EmOptions {
  int states = 30;
  int max_iters = 50;
  int restarts = 3;
  double tolerance = 1e-6;
};

struct EmReport {
  std::vector<std::vector<double>> traces;  // per restart, log-likelihood before each M-step
  int best_restart = 0;
  int iterations = 0;  // M-steps taken by the selected restart
  double log_likelihood = 0.0;
};

struct EmResult {
  TabularPomdp model;
  EmReport report;
};

EmResult em_train(const std::vector<History>& data, int n_actions, int n_observations, const EmOptions& opt,
                  Rng& rng);

// Backward vector e with p(t | h) = b(h) . e for a fixed test.
Eigen::VectorXd test_vector(const TabularPomdp& m, const TestOfInterest& t);

// Belief tracking with prior reset on impossible observations.
class PomdpPredictor {
 public:
  PomdpPredictor(const TabularPomdp& m, const std::vector<TestOfInterest>& tests);
  void reset();
  void observe(int a, int o);
  Profile profile() const;
  const Eigen::VectorXd& belief() const { return b_; }
  std::int64_t impossible_events() const { return impossible_; }

 private:
  const TabularPomdp* m_;
  std::vector<Eigen::VectorXd> e_;
  Eigen::VectorXd b_;
  std::int64_t impossible_ = 0;
};

Profile flat_predict(const TabularPomdp& m, const History& h, const std::vector<TestOfInterest>& tests,
                     bool* fell_back = nullptr);

// The model as a generative oracle over the given alphabet.
class PomdpOracle final : public GenerativeOracle {
 public:
  PomdpOracle(const TabularPomdp& m, Alphabet alphabet);
  const Alphabet& alphabet() const override { return alphabet_; }
  std::vector<ObservationProbability> next_observation(const History& h, int action) const override;

 private:
  const TabularPomdp* m_;
  Alphabet alphabet_;
};

void write_pomdp(std::ostream& out, const TabularPomdp& m);
TabularPomdp read_pomdp(std::istream& in);

}  // namespace ppm
