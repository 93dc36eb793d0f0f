#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppm/control.hpp"
#include "ppm/environment.hpp"
#include "ppm/pomdp.hpp"
#include "ppm/profile_learn.hpp"

namespace ppm {

// Flat key = value experiment configuration. Every key has a default.
struct ExperimentConfig {
  EnvironmentParams env;
  int episode_length = 10;
  std::int64_t episodes = 20000;
  std::string abstraction = "none";
  double alpha = 1e-5;
  std::int64_t min_trials = 10;
  int max_search_len = 10;
  Strategy strategy = Strategy::kld;
  std::string pp_model = "lpst";  // lpst | pomdp
  int pp_states = 0;              // 0 means twice the number of profiles
  int lpst_depth = 8;
  EmOptions flat;                 // states 30, 50 iterations, 3 restarts
  OlgarbParams olgarb;
  std::int64_t eval_steps = 100000;
  int trials = 5;
  std::uint64_t seed = 1;
  std::vector<std::string> sources{"oracle", "pp", "flat", "som"};
  std::string machine;            // optional machine file for sdm-check
  int sdm_history_len = 3;
  int sdm_test_len = 2;

  // Canonical key = value listing, sorted by key; the hash is taken over it.
  std::string canonical() const;
  std::string hash() const;
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// Stable 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);

}  // namespace ppm
