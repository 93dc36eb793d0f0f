#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ppm/core.hpp"

namespace ppm {

struct StepResult {
  int observation = 0;
  double reward = 0.0;
};

// Exact prediction profile phi(h), maintained incrementally over full observations.
class ProfileTracker {
 public:
  virtual ~ProfileTracker() = default;
  virtual void reset() = 0;
  virtual void observe(int action, int observation) = 0;
  virtual Profile profile() const = 0;
  virtual std::unique_ptr<ProfileTracker> clone() const = 0;
};

// Many-to-one map from full observations onto a smaller alphabet, with the
// tests of interest re-expressed over the abstract symbols.
struct Abstraction {
  std::string id;
  Alphabet alphabet;
  std::function<int(int)> map;
  std::vector<TestOfInterest> tests;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::string id() const = 0;
  virtual const Alphabet& alphabet() const = 0;
  virtual const std::vector<TestOfInterest>& tests() const = 0;
  // Puts the environment at the start of a fresh episode.
  virtual void reset() = 0;
  virtual StepResult step(int action, Rng& rng) = 0;
  virtual std::unique_ptr<ProfileTracker> make_tracker() const = 0;
  virtual std::unique_ptr<GenerativeOracle> make_generative_oracle() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
  // Known ids: "none" plus whatever the environment defines.
  virtual Abstraction abstraction(const std::string& id) const;
  virtual int expert_action(const ProfileTracker& tracker) const = 0;
  virtual double min_reward() const = 0;
  virtual double max_reward() const = 0;
};

struct EnvironmentParams {
  std::string id = "tcm";  // tcm | gallery | ballbounce
  int bb_length = 10;
  int bb_target = 4;
  int gallery_size = 8;
  int crosshair_row = 4;
  int crosshair_col = 4;
  double block_probability = 0.1;
};

std::unique_ptr<Environment> make_environment(const EnvironmentParams& params);

// Runs `length` steps of a uniformly random (blind) policy from a fresh episode.
Trajectory sample_episode(Environment& env, int length, Rng& rng, std::uint64_t seed_tag);

// Exact phi along a whole history via a fresh tracker.
Profile tracked_profile(const Environment& env, const History& h);

}  // namespace ppm
