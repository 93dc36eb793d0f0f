#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ppm/config.hpp"
#include "ppm/evaluate.hpp"
#include "ppm/lpst.hpp"
#include "ppm/pp_runtime.hpp"
#include "ppm/profile_learn.hpp"

namespace ppm {

inline constexpr const char* kToolVersion = "0.1.0";

// In-memory pipeline pieces, shared by the CLI stages and the tests.
std::vector<Trajectory> generate_data(const ExperimentConfig& cfg, Environment& env);

struct LearnedProfiles {
  HistoryStats stats{0, 1};
  ProfileSet profiles;
};
LearnedProfiles learn_profiles(const ExperimentConfig& cfg, const Abstraction& abstraction,
                               const std::vector<Trajectory>& abstract_data);

std::vector<PpTrajectory> translate_all(const ExperimentConfig& cfg, const LearnedProfiles& learned,
                                        const std::vector<Trajectory>& abstract_data);

// Trained PP model of either kind.
struct PpModel {
  std::string kind;  // lpst | pomdp
  PpAlphabet alphabet;
  Lpst tree;
  TabularPomdp pomdp{1, 1, 1};
  std::unique_ptr<PpRuntime> runtime(const ProfileSet& profiles, std::uint64_t seed) const;
};
PpModel train_pp_model(const ExperimentConfig& cfg, const std::vector<PpTrajectory>& pp_data,
                       std::size_t n_profiles);

EmResult train_flat_model(const ExperimentConfig& cfg, const Abstraction& abstraction,
                          const std::vector<Trajectory>& abstract_data);

struct EvalRow {
  std::int64_t training_size = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  EvalRecord record;
};

// Runs every configured source for every trial; rows ordered by (trial, source order).
std::vector<EvalRow> run_evaluation(const ExperimentConfig& cfg, const Environment& prototype,
                                    const Abstraction& abstraction, const ProfileSet* profiles, const PpModel* pp,
                                    const TabularPomdp* flat);

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows, const std::vector<TestOfInterest>& tests,
                    const std::string& config_hash);

// Stage runner writing artifacts under `out_dir`. Throws PrerequisiteError
// naming the missing stage, or StaleArtifactError on a config-hash mismatch.
void run_stage(const std::string& stage, const ExperimentConfig& cfg, const std::string& out_dir);

// Long-format merge of EvalRecord CSVs keyed by (training_size, method, seed, metric).
void emit_plotdata(const std::vector<std::string>& inputs, std::ostream& out);

}  // namespace ppm
