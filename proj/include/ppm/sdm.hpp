#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ppm/environment.hpp"
#include "ppm/machine.hpp"

namespace ppm {

// Finite block of the system dynamics matrix. Columns are tests with
// singleton predicates, stored as the (action, observation) sequence they
// require; column 0 is the empty test.
struct SdmBlock {
  Alphabet alphabet;
  std::vector<History> rows;
  std::vector<History> cols;
  Eigen::MatrixXd entries;
  std::vector<double> row_weights;  // p(h | null history) under uniform random actions
};

inline constexpr std::size_t kDefaultSdmCap = 2'000'000;

// Rows: every history of length <= lh with positive probability. Columns: every
// test of length <= lt that succeeds with positive probability from some row
// (the all-zero columns are omitted; they cannot change the rank).
SdmBlock build_sdm(const GenerativeOracle& oracle, int lh, int lt, std::size_t cap = kDefaultSdmCap);

// Same columns rule, explicit row histories.
SdmBlock build_sdm_rows(const GenerativeOracle& oracle, const std::vector<History>& rows, int lt,
                        std::size_t cap = kDefaultSdmCap);

struct RankReport {
  int rank = 0;
  std::vector<double> singular_values;  // descending
  double tolerance = 1e-8;
};

RankReport numeric_rank(const Eigen::MatrixXd& m, double tol = 1e-8);

struct BoundValue {
  double value = 0.0;
  bool vacuous = false;
};
// (ln(|A|-1) + ln(|O|-1)) / ln|A|; vacuous below two actions or observations.
BoundValue prop15_bound(int n_actions, int n_observations);

struct BoundReport {
  int rank = 0;
  double bound = 0.0;
  bool vacuous = false;
  bool pass = false;
  int states = 0;
};

// Rank over one access history per reachable state against every test up to
// `lt`. That rank is a lower bound on the machine's linear dimension, so a pass
// is conclusive.
BoundReport check_deterministic_bound(const DeterministicMachine& m, int lt = 2, double tol = 1e-8);

// The prediction-profile system of an environment, served as a dynamical
// system: actions are (action, observation) pairs of the environment, the
// observation after one is the index of the resulting profile in `profiles`.
// Impossible pairs lead to an absorbing extra "void" observation.
class PpSystemOracle final : public GenerativeOracle {
 public:
  PpSystemOracle(const Environment& env, std::vector<Profile> profiles, double tol = 1e-9);
  const Alphabet& alphabet() const override { return alphabet_; }
  std::vector<ObservationProbability> next_observation(const History& h, int action) const override;

  int void_symbol() const { return static_cast<int>(profiles_.size()); }
  Step decode(int pp_action) const;
  int profile_index(const Profile& p) const;  // -1 if absent

 private:
  std::unique_ptr<Environment> env_;
  std::unique_ptr<GenerativeOracle> oracle_;
  std::vector<Profile> profiles_;
  double tol_;
  Alphabet alphabet_;
};

}  // namespace ppm
