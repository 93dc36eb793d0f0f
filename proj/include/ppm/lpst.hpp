#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <vector>

#include "ppm/pp_runtime.hpp"

namespace ppm {

// Looping predictive suffix tree over PP histories.
//
// The context is the alternating symbol stream profile, PP-action, profile, ...
// read backward from the present (start marker included). For each next
// PP-action there is a tree whose node at depth d stands for a d-symbol
// context. A node whose followers are all the same profile is a unique leaf;
// otherwise it splits on the next older symbol until max_depth or the data
// runs out. A split node whose
// entire subtree repeats the top of an ancestor's subtree is replaced by a
// loop edge to that ancestor.
class Lpst {
 public:
  struct Node {
    std::map<int, std::int64_t> followers;  // next profile -> count
    std::map<int, int> children;            // older context symbol -> node
    int loop = -1;                          // ancestor node this node behaves as
    int depth = 0;
    bool unique() const { return followers.size() == 1; }
  };

  struct Lookup {
    std::vector<int> members;  // candidate next profiles, ascending
    bool unknown_action = false;
    bool fallback = false;  // stopped at an unseen or exhausted context
  };

  Lpst() = default;
  Lpst(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet, int n_profiles, int max_depth = 8);

  // context: most recent symbol first.
  Lookup lookup(const std::deque<int>& context, int pp_action) const;

  int profile_symbol(int profile) const { return profile; }
  int action_symbol(int pp_action) const { return n_profiles_ + pp_action; }
  int n_profiles() const { return n_profiles_; }
  int max_depth() const { return max_depth_; }
  int depth() const;
  std::size_t loop_count() const;
  const std::vector<Node>& nodes() const { return nodes_; }
  // Root node per PP-action index, -1 if never followed.
  const std::vector<int>& roots() const { return roots_; }

  // Nodes one per line, indented by depth; the PP alphabet is stored separately.
  void write(std::ostream& out) const;
  static Lpst read(std::istream& in);

 private:
  struct Occurrence {
    std::size_t seq;
    std::size_t pos;  // index of the predicted element in its sequence
  };
  void grow(int node, const std::vector<History>& seqs, const std::vector<Occurrence>& occ);
  bool same_behaviour(int u, int v) const;
  void add_loops(int node, std::vector<int>& path);

  int n_profiles_ = 0;
  int max_depth_ = 8;
  std::vector<int> roots_;
  std::vector<Node> nodes_;
};

class LpstRuntime final : public PpRuntime {
 public:
  LpstRuntime(const Lpst& tree, const PpAlphabet& alphabet, const ProfileSet& profiles, std::uint64_t seed);
  void reset() override;
  void observe(Step pp_action) override;
  Profile profile() const override { return current_; }
  std::int64_t unknown_actions() const override { return unknown_; }
  std::int64_t fallbacks() const { return fallbacks_; }
  int current_index() const { return index_; }

 private:
  void step(int pp_action);

  const Lpst* tree_;
  const PpAlphabet* alphabet_;
  const ProfileSet* profiles_;
  Rng rng_;
  std::deque<int> context_;
  Profile current_;
  int index_ = -1;
  std::int64_t unknown_ = 0;
  std::int64_t fallbacks_ = 0;
};

}  // namespace ppm
