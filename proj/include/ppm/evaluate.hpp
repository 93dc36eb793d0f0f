#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppm/control.hpp"
#include "ppm/environment.hpp"
#include "ppm/pomdp.hpp"
#include "ppm/pp_runtime.hpp"

namespace ppm {

enum class FeatureSource { oracle, pp, flat, som, expert };
FeatureSource parse_feature_source(const std::string& s);
std::string feature_source_name(FeatureSource s);

struct EvalOptions {
  std::int64_t steps = 100000;
  OlgarbParams olgarb;
  std::uint64_t seed = 1;
  int curve_points = 20;        // windows in the average-reward curve
  bool som_joint = false;       // joint (o', a, o) one-hot instead of three groups
  bool learn = true;            // false freezes the uniform initial policy
};

struct EvalRecord {
  std::string source;
  std::int64_t steps = 0;
  double avg_reward = 0.0;
  bool has_rmse = false;
  double rmse = 0.0;            // over all tests jointly
  std::vector<double> per_test_rmse;
  std::int64_t fallbacks = 0;   // runtime fallbacks, unknown PP-actions, impossible observations
  std::int64_t clamped = 0;
  std::vector<double> curve;    // average reward per window
};

// Everything one evaluation stream needs besides the environment.
struct FeatureProvider {
  FeatureSource source = FeatureSource::oracle;
  PpRuntime* pp = nullptr;                 // source == pp
  const TabularPomdp* flat = nullptr;      // source == flat
};

// One continuous stream: observe, build features, act, learn. RMSE compares
// the source's profile with the exact one at every step where the source
// produces a profile.
EvalRecord evaluate(Environment& env, const Abstraction& abstraction, const FeatureProvider& provider,
                    const EvalOptions& opt);

}  // namespace ppm
