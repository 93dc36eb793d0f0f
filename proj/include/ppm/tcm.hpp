#pragma once

#include <array>
#include <memory>
#include <utility>

#include "ppm/environment.hpp"

namespace ppm::tcm {

// Actions and observations of Three Card Monte, in alphabet order.
enum Action : int { kWatch = 0, kFlip1, kFlip2, kFlip3, kActionCount };
enum Observation : int {
  kPos1 = 0, kPos2, kPos3,
  kSwap12, kSwap13, kSwap23,
  kGuess, kAce, kNotAce, kEnded,
  kObservationCount
};

enum class Phase { dealing, mixing, guess_prompted };

// Pair index: 0 = (1,2), 1 = (1,3), 2 = (2,3).
struct State {
  int ace = 2;
  std::array<int, 3> swap_counts{0, 0, 0};
  Phase phase = Phase::dealing;

  bool operator==(const State&) const = default;
};

const Alphabet& alphabet();
// flipX -> {ace, posX}: the dealer showing posX also reveals the ace under card X.
const std::vector<TestOfInterest>& tests();

// Position of the ace after swapping `pair`.
int apply_swap(int ace, int pair);

// Probability the dealer picks each pair (index 0..2) and of the guess prompt,
// for a mixing-phase watch with the given counters.
struct DealerOdds {
  std::array<double, 3> swap{};
  double guess = 0.1;
};
DealerOdds dealer_odds(const std::array<int, 3>& counts);

std::pair<State, StepResult> step(const State& s, int action, Rng& rng);

// Replays a history into the latent state; throws MalformedHistoryError when
// an observation cannot occur.
State replay(const History& h);

// Tracks the ace from the observed swaps: start at card 2, swaps move it,
// flips and prompts leave it in place.
class Tracker final : public ProfileTracker {
 public:
  void reset() override;
  void observe(int action, int observation) override;
  Profile profile() const override;
  std::unique_ptr<ProfileTracker> clone() const override { return std::make_unique<Tracker>(*this); }

  int ace() const { return ace_; }
  bool guess_prompted() const { return phase_ == Phase::guess_prompted; }

 private:
  int ace_ = 2;
  Phase phase_ = Phase::dealing;
};

Profile oracle(const History& h);

class Oracle final : public GenerativeOracle {
 public:
  const Alphabet& alphabet() const override { return tcm::alphabet(); }
  std::vector<ObservationProbability> next_observation(const History& h, int action) const override;
};

class Env final : public Environment {
 public:
  std::string id() const override { return "tcm"; }
  const Alphabet& alphabet() const override { return tcm::alphabet(); }
  const std::vector<TestOfInterest>& tests() const override { return tcm::tests(); }
  void reset() override { state_ = State{}; }
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<ProfileTracker> make_tracker() const override { return std::make_unique<Tracker>(); }
  std::unique_ptr<GenerativeOracle> make_generative_oracle() const override { return std::make_unique<Oracle>(); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Env>(*this); }
  int expert_action(const ProfileTracker& tracker) const override;
  double min_reward() const override { return -1.0; }
  double max_reward() const override { return 1.0; }

  const State& state() const { return state_; }

 private:
  State state_;
};

}  // namespace ppm::tcm
