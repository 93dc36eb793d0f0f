#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ppm/core.hpp"

namespace ppm {

// Deterministic Moore-style machine: each state carries an output label, each
// (state, input) has exactly one successor. Read as a dynamical system its
// actions are the inputs and its observation after an input is the label of
// the state reached.
class DeterministicMachine final : public GenerativeOracle {
 public:
  struct Transition {
    int from = 0;
    int input = 0;
    int to = 0;
  };

  // Missing (state, input) pairs become self-loops. Two different successors
  // for the same pair throw PreconditionError naming the pair.
  DeterministicMachine(SymbolSet inputs, SymbolSet outputs, std::vector<std::string> state_names,
                       std::vector<int> labels, int start, const std::vector<Transition>& transitions);

  const Alphabet& alphabet() const override { return alphabet_; }
  std::vector<ObservationProbability> next_observation(const History& h, int action) const override;

  int state_count() const { return static_cast<int>(labels_.size()); }
  int start() const { return start_; }
  int label(int state) const { return labels_[static_cast<std::size_t>(state)]; }
  int next(int state, int input) const;
  const std::string& state_name(int state) const { return state_names_[static_cast<std::size_t>(state)]; }
  // State after feeding h from the start; throws MalformedHistoryError on a
  // label mismatch.
  int run(const History& h) const;
  // A shortest input sequence reaching each reachable state (index = state, empty
  // for unreachable ones apart from the start).
  std::vector<History> access_histories() const;
  std::vector<bool> reachable() const;

 private:
  Alphabet alphabet_;
  std::vector<std::string> state_names_;
  std::vector<int> labels_;
  int start_ = 0;
  std::vector<int> delta_;  // state * inputs + input
};

// Text format:
//   machine v1
//   inputs <name>...
//   outputs <name>...
//   state <name> <output>      (one per state, in order)
//   start <name>
//   edge <from> <input> <to>
// '#' starts a comment line.
DeterministicMachine read_machine(std::istream& in);
void write_machine(std::ostream& out, const DeterministicMachine& m);
DeterministicMachine load_machine(const std::string& path);

}  // namespace ppm
