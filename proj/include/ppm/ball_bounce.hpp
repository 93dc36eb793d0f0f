#pragma once

#include <memory>

#include "ppm/environment.hpp"

namespace ppm::bb {

// Uncontrolled: a single dummy action.
constexpr int kStep = 0;

struct Params {
  int length = 10;
  int target = 4;  // pixel x watched by the test

  void validate() const;
};

struct State {
  int pos = 0;
  int dir = 1;
};

// One move with reflection at the ends.
State advance(const Params& p, State s);

Alphabet full_alphabet(const Params& p);
// Three-pixel window centred at x: bit 0 = x-1, bit 1 = x, bit 2 = x+1.
Alphabet window_alphabet();
int window_of(const Params& p, int pos);
std::vector<TestOfInterest> full_tests(const Params& p);
std::vector<TestOfInterest> window_tests();

class Tracker final : public ProfileTracker {
 public:
  explicit Tracker(Params p) : p_(p) {}
  void reset() override { s_ = State{}; }
  void observe(int action, int observation) override;
  Profile profile() const override;
  std::unique_ptr<ProfileTracker> clone() const override { return std::make_unique<Tracker>(*this); }
  const State& state() const { return s_; }

 private:
  Params p_;
  State s_;
};

class Oracle final : public GenerativeOracle {
 public:
  explicit Oracle(Params p);
  const Alphabet& alphabet() const override { return alphabet_; }
  std::vector<ObservationProbability> next_observation(const History& h, int action) const override;

 private:
  Params p_;
  Alphabet alphabet_;
};

class Env final : public Environment {
 public:
  explicit Env(Params p);
  std::string id() const override { return "ballbounce"; }
  const Alphabet& alphabet() const override { return alphabet_; }
  const std::vector<TestOfInterest>& tests() const override { return tests_; }
  void reset() override { state_ = State{}; }
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<ProfileTracker> make_tracker() const override { return std::make_unique<Tracker>(p_); }
  std::unique_ptr<GenerativeOracle> make_generative_oracle() const override { return std::make_unique<Oracle>(p_); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Env>(*this); }
  Abstraction abstraction(const std::string& id) const override;
  int expert_action(const ProfileTracker&) const override { return kStep; }
  double min_reward() const override { return 0.0; }
  double max_reward() const override { return 0.0; }

  const State& state() const { return state_; }

 private:
  Params p_;
  Alphabet alphabet_;
  std::vector<TestOfInterest> tests_;
  State state_;
};

}  // namespace ppm::bb
