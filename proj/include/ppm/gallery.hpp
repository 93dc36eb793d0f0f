#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "ppm/environment.hpp"

namespace ppm::gallery {

enum Action : int { kWatch = 0, kShoot, kActionCount };

constexpr double kStick = 0.3;
constexpr double kMove = 0.7;
constexpr double kResetChance = 0.01;
constexpr double kHitReward = 10.0;
constexpr double kMissReward = -5.0;

// Diagonal direction index: bit 1 set when moving down, bit 0 when moving right.
constexpr int direction_index(int dr, int dc) { return (dr > 0 ? 2 : 0) + (dc > 0 ? 1 : 0); }
constexpr int dir_row(int d) { return (d & 2) ? 1 : -1; }
constexpr int dir_col(int d) { return (d & 1) ? 1 : -1; }

struct Bounce {
  int dr = 0;  // displacement actually taken, (0,0) when enclosed
  int dc = 0;
  int dir = 0;
};

// Reflection rule over a predicate on relative offsets in {-1,0,1}^2 that
// reports blocked-or-outside cells.
template <class Blocked>
Bounce resolve_bounce(int dir, Blocked blocked) {
  const int dr = dir_row(dir), dc = dir_col(dir);
  if (!blocked(dr, dc)) return {dr, dc, dir};
  const bool flip_r = blocked(dr, 0), flip_c = blocked(0, dc);
  int ndr = dr, ndc = dc;
  if (flip_r) ndr = -dr;
  if (flip_c) ndc = -dc;
  if (!flip_r && !flip_c) {
    ndr = -dr;
    ndc = -dc;
  }
  if (!blocked(ndr, ndc)) return {ndr, ndc, direction_index(ndr, ndc)};
  if (!blocked(-dr, -dc)) return {-dr, -dc, direction_index(-dr, -dc)};
  return {0, 0, dir};
}

// Neighbourhood bit order: (-1,-1) (-1,0) (-1,1) (0,-1) (0,1) (1,-1) (1,0) (1,1).
int neighbour_bit(int dr, int dc);

struct Params {
  int size = 8;
  int crosshair_row = 4;
  int crosshair_col = 4;
  double block_probability = 0.1;

  void validate() const;
  int cells() const { return size * size; }
  int blocks_per_side() const { return size / 2; }
  int mask_bits() const { return blocks_per_side() * blocks_per_side(); }
  int crosshair() const { return crosshair_row * size + crosshair_col; }
};

struct State {
  std::uint32_t mask = 0;  // one bit per 2x2 block, row-major over blocks
  int pos = 0;
  int dir = 0;
  bool reset_pending = true;  // episodes open with a reset frame
};

bool cell_blocked(const Params& p, std::uint32_t mask, int cell);
int block_of(const Params& p, int cell);
// 8-bit blocked/outside pattern around `cell`.
int neighbourhood(const Params& p, std::uint32_t mask, int cell);
Bounce resolve_bounce(const Params& p, std::uint32_t mask, int cell, int dir);

// Full frames: ((reset * cells + pos) << mask_bits) | mask.
int encode_full(const Params& p, bool reset, int pos, std::uint32_t mask);
struct FullFrame {
  bool reset = false;
  int pos = 0;
  std::uint32_t mask = 0;
};
FullFrame decode_full(const Params& p, int code);

// Abstract frames: ((reset * cells + pos) << 8) | neighbourhood.
int encode_abstract(const Params& p, bool reset, int pos, int nb);
int abstract_of(const Params& p, int full_code);

Alphabet full_alphabet(const Params& p);
Alphabet abstract_alphabet(const Params& p);
// watch -> {non-reset frame with the target at the crosshairs}
std::vector<TestOfInterest> full_tests(const Params& p);
std::vector<TestOfInterest> abstract_tests(const Params& p);

std::pair<State, StepResult> step(const Params& p, const State& s, int action, Rng& rng);
State reset_state(const Params& p, Rng& rng);

// Exact direction belief and crosshair prediction, driven by abstract frames
// (full frames are abstracted first and additionally checked against the
// known layout).
class Tracker final : public ProfileTracker {
 public:
  Tracker(Params p, bool full_frames) : p_(p), full_(full_frames) {}
  void reset() override;
  void observe(int action, int observation) override;
  Profile profile() const override;
  std::unique_ptr<ProfileTracker> clone() const override { return std::make_unique<Tracker>(*this); }

  double prediction() const;
  const std::array<double, 4>& weights() const { return w_; }
  bool uniform_over_support(double tol = 1e-12) const;
  bool reset_pending() const { return pending_; }
  int pos() const { return pos_; }
  int neighbourhood() const { return nb_; }
  std::uint32_t mask() const { return mask_; }

 private:
  Bounce bounce(int dir) const;

  Params p_;
  bool full_;
  bool pending_ = true;
  int pos_ = 0;
  int nb_ = 0;
  std::uint32_t mask_ = 0;
  std::array<double, 4> w_{0.25, 0.25, 0.25, 0.25};
};

// Exact p(o | h, a) over full frames.
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
  std::string id() const override { return "gallery"; }
  const Alphabet& alphabet() const override { return alphabet_; }
  const std::vector<TestOfInterest>& tests() const override { return tests_; }
  void reset() override { state_ = State{}; }
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<ProfileTracker> make_tracker() const override { return std::make_unique<Tracker>(p_, true); }
  std::unique_ptr<GenerativeOracle> make_generative_oracle() const override { return std::make_unique<Oracle>(p_); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Env>(*this); }
  // "local": target position plus the 3x3 blocked pattern around it.
  Abstraction abstraction(const std::string& id) const override;
  // Shoot exactly when the tracked prediction beats the +10/-5 break-even of 1/3.
  int expert_action(const ProfileTracker& tracker) const override;
  double min_reward() const override { return kMissReward; }
  double max_reward() const override { return kHitReward; }

  const Params& params() const { return p_; }
  const State& state() const { return state_; }
  void set_state(const State& s) { state_ = s; }

 private:
  Params p_;
  Alphabet alphabet_;
  std::vector<TestOfInterest> tests_;
  State state_;
};

}  // namespace ppm::gallery
