#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ppm/symbols.hpp"

namespace ppm {

struct Step {
  int action = 0;
  int observation = 0;

  auto operator<=>(const Step&) const = default;
};

// An action-observation sequence from time zero; empty is the null history.
using History = std::vector<Step>;

struct HistoryHash {
  std::size_t operator()(const History& h) const noexcept;
};

// One step of a test: take `action`, succeed if the observation is in `accept`
// (kept sorted and unique).
struct TestStep {
  int action = 0;
  std::vector<int> accept;

  bool accepts(int observation) const;
};

struct TestOfInterest {
  std::string name;
  std::vector<TestStep> steps;

  static TestOfInterest single(std::string name, int action, std::vector<int> accept);
  std::size_t length() const { return steps.size(); }
  // Throws ConfigError unless non-empty with non-empty in-range predicates.
  void validate(const Alphabet& alphabet) const;
};

// Predictions for the tests of interest; entries lie in [0, 1] and need not sum to 1.
using Profile = std::vector<double>;

struct Trajectory {
  std::string env_id;
  std::uint64_t seed = 0;
  History steps;
};

struct ObservationProbability {
  int observation = 0;
  double probability = 0.0;
};

// Exact next-observation distributions p(o | h, a) of a generative model.
class GenerativeOracle {
 public:
  virtual ~GenerativeOracle() = default;
  virtual const Alphabet& alphabet() const = 0;
  // Positive-probability support, sorted by observation index.
  virtual std::vector<ObservationProbability> next_observation(const History& h, int action) const = 0;
};

// Probability that test t succeeds from history h (chain rule over steps,
// summing each step's predicate set). The empty test has probability 1.
double predict_test(const GenerativeOracle& oracle, const History& h, const TestOfInterest& t);

Profile phi(const GenerativeOracle& oracle, const History& h, const std::vector<TestOfInterest>& tests);

enum class TestOutcome { success, failure, not_applicable };

// Outcome of t when started right after the first `offset` steps of `steps`.
TestOutcome test_outcome(const History& steps, std::size_t offset, const TestOfInterest& t);

void validate_history(const History& h, const Alphabet& alphabet);

std::string format_history(const History& h, const Alphabet& alphabet);
History parse_history(const std::string& text, const Alphabet& alphabet);

// Line format: `envId seed a1 o1 a2 o2 ...`; '#' lines and blank lines are skipped.
std::vector<Trajectory> read_trajectories(std::istream& in, const Alphabet& alphabet);
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& data, const Alphabet& alphabet);

// Seeded generator used everywhere; the name goes into output metadata.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n).
int uniform_index(Rng& rng, int n);

// Stable per-(stage, trial) seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, const std::string& stage, std::uint64_t trial);

}  // namespace ppm
