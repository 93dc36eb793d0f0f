#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include "ppm/machine.hpp"
#include "ppm/pomdp.hpp"
#include "ppm/profile_learn.hpp"

namespace ppm {

// PP-actions seen in training. Index 0 is the episode-start marker; the rest
// are (action, abstract observation) pairs in ascending order.
class PpAlphabet {
 public:
  static constexpr int kStart = 0;

  PpAlphabet() = default;
  explicit PpAlphabet(const std::vector<PpTrajectory>& data);
  explicit PpAlphabet(std::vector<Step> pairs);

  int size() const { return static_cast<int>(pairs_.size()) + 1; }
  // -1 for pairs never seen in training.
  int index(Step s) const;
  Step pair(int index) const { return pairs_.at(static_cast<std::size_t>(index - 1)); }
  const std::vector<Step>& pairs() const { return pairs_; }

  std::string name(int index, const Alphabet& base) const;
  void write(std::ostream& out, const Alphabet& base) const;
  static PpAlphabet read(std::istream& in, const Alphabet& base);

 private:
  std::vector<Step> pairs_;
  std::map<Step, int> index_;
};

// Sequences of (PP-action index, profile index), each opening with the start
// marker and the initial profile; truncated trajectories keep their prefix.
std::vector<History> pp_sequences(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet);

// Self-fed runtime: after training it only ever sees PP-actions.
class PpRuntime {
 public:
  virtual ~PpRuntime() = default;
  // Starts a new episode; the current profile becomes the initial one.
  virtual void reset() = 0;
  virtual void observe(Step pp_action) = 0;
  virtual Profile profile() const = 0;
  // PP-actions outside the training alphabet met so far.
  virtual std::int64_t unknown_actions() const = 0;
};

Profile mean_profile(const ProfileSet& profiles, const std::vector<int>& members);

class PpPomdpRuntime final : public PpRuntime {
 public:
  PpPomdpRuntime(const TabularPomdp& model, const PpAlphabet& alphabet, const ProfileSet& profiles);
  void reset() override;
  void observe(Step pp_action) override;
  Profile profile() const override { return current_; }
  std::int64_t unknown_actions() const override { return unknown_; }
  std::int64_t impossible_events() const { return impossible_; }
  int current_index() const { return index_; }

  // Argmax over profiles of p(next profile | belief, PP-action); lowest index on ties.
  static int most_likely(const TabularPomdp& m, const Eigen::VectorXd& b, int pp_action);

 private:
  void step(int pp_action);

  const TabularPomdp* model_;
  const PpAlphabet* alphabet_;
  const ProfileSet* profiles_;
  Eigen::VectorXd b_;
  Profile current_;
  int index_ = -1;
  std::int64_t unknown_ = 0;
  std::int64_t impossible_ = 0;
};

EmResult train_pp_pomdp(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet, std::size_t n_profiles,
                        const EmOptions& opt, Rng& rng);

void write_pp_pomdp(std::ostream& out, const TabularPomdp& m, const PpAlphabet& alphabet, const Alphabet& base);
std::pair<TabularPomdp, PpAlphabet> read_pp_pomdp(std::istream& in, const Alphabet& base);

// Deterministic machine over PP-actions whose states are the profiles plus a
// start state; each transition is the majority next profile in the data
// (lowest index on ties).
DeterministicMachine learn_pp_machine(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet,
                                      std::size_t n_profiles, const Alphabet& base);

}  // namespace ppm
