#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ppm/environment.hpp"

namespace ppm {

// Per-history counts for every prefix of the data up to max_len steps, stored
// as a trie rooted at the null history (node 0).
class HistoryStats {
 public:
  HistoryStats(std::size_t n_tests, int max_len);

  void add_episode(const History& steps, const std::vector<TestOfInterest>& tests);
  // Node for h, or -1 when h never occurred (or is longer than max_len).
  int find(const History& h) const;
  int child(int node, Step s) const;

  int max_len() const { return max_len_; }
  std::size_t n_tests() const { return n_tests_; }
  std::size_t size() const { return parent_.size(); }
  std::int64_t visits(int node) const { return visits_[static_cast<std::size_t>(node)]; }
  std::int64_t trials(int node, std::size_t t) const { return trials_[index(node, t)]; }
  std::int64_t successes(int node, std::size_t t) const { return successes_[index(node, t)]; }
  int depth(int node) const { return depth_[static_cast<std::size_t>(node)]; }
  History history(int node) const;

 private:
  std::size_t index(int node, std::size_t t) const { return static_cast<std::size_t>(node) * n_tests_ + t; }
  static std::uint64_t key(int node, Step s);
  int add_child(int node, Step s);

  std::size_t n_tests_;
  int max_len_;
  std::vector<int> parent_;
  std::vector<Step> step_;
  std::vector<int> depth_;
  std::vector<std::int64_t> visits_;
  std::vector<std::int64_t> trials_;
  std::vector<std::int64_t> successes_;
  std::unordered_map<std::uint64_t, int> children_;
};

// Maps the observations of each trajectory through the abstraction.
std::vector<Trajectory> abstract_trajectories(const std::vector<Trajectory>& data, const Abstraction& abstraction);

HistoryStats collect_stats(const std::vector<Trajectory>& data, const std::vector<TestOfInterest>& tests, int max_len);

struct TestCounts {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

struct EstimatedProfile {
  Profile values;  // NaN where a test has no trials
  std::vector<TestCounts> counts;
  History exemplar;
};

EstimatedProfile estimate(const HistoryStats& stats, int node);

struct ProfileSet {
  std::vector<EstimatedProfile> profiles;
  double alpha = 1e-5;
  std::int64_t min_trials = 10;

  std::size_t size() const { return profiles.size(); }
};

// True iff the homogeneity test rejects for any test with trials on both sides.
bool profiles_differ(const std::vector<TestCounts>& a, const std::vector<TestCounts>& b, double alpha);

// Greedy scan in (visits desc, length asc, lexicographic) order.
ProfileSet cluster_profiles(const HistoryStats& stats, double alpha, std::int64_t min_trials);

struct MatchResult {
  enum class Kind { unique, multiple, none };
  Kind kind = Kind::none;
  std::vector<int> candidates;
};

MatchResult match_profile(const std::vector<TestCounts>& counts, const ProfileSet& profiles, double alpha);

// Smallest summed Bernoulli divergence from the estimate to each candidate.
int kld_match(const std::vector<TestCounts>& counts, const std::vector<int>& candidates, const ProfileSet& profiles,
              double eps = 1e-6);

enum class Strategy { kld, cut };
Strategy parse_strategy(const std::string& s);
std::string strategy_name(Strategy s);

struct PpStep {
  Step action;  // the PP-action: (action, abstract observation)
  int profile = 0;
};

struct PpTrajectory {
  int initial = -1;  // profile of the null history, -1 if unresolved
  std::vector<PpStep> steps;
  bool truncated = false;
  std::string reason;  // unseen | nomatch | ambiguous
};

// Statistics row used for the history ending after `len` steps of `steps`:
// the prefix itself while it fits, otherwise its last max_len steps.
int stats_node_for_prefix(const HistoryStats& stats, const History& steps, std::size_t len);

PpTrajectory translate(const History& abstract_steps, const HistoryStats& stats, const ProfileSet& profiles,
                       Strategy strategy, double alpha);

// CSV: index, one value column per test, successes and trials per test, exemplar.
void write_profile_set(std::ostream& out, const ProfileSet& ps, const std::vector<TestOfInterest>& tests,
                       const Alphabet& alphabet);
ProfileSet read_profile_set(std::istream& in, const std::vector<TestOfInterest>& tests, const Alphabet& alphabet);

// Line: `<initial> a/o p a/o p ... [TRUNCATED:<reason>]`, initial '-' if unresolved.
void write_pp_trajectories(std::ostream& out, const std::vector<PpTrajectory>& data, const Alphabet& alphabet);
std::vector<PpTrajectory> read_pp_trajectories(std::istream& in, const Alphabet& alphabet, std::size_t n_profiles);

}  // namespace ppm
