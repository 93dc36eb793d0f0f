#include "ppm/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "ppm/errors.hpp"
#include "ppm/machine.hpp"
#include "ppm/sdm.hpp"

namespace ppm {

namespace fs = std::filesystem;

std::vector<Trajectory> generate_data(const ExperimentConfig& cfg, Environment& env) {
  Rng rng(derive_seed(cfg.seed, "gen-data", 0));
  std::vector<Trajectory> data;
  data.reserve(static_cast<std::size_t>(cfg.episodes));
  for (std::int64_t i = 0; i < cfg.episodes; ++i) {
    data.push_back(sample_episode(env, cfg.episode_length, rng, static_cast<std::uint64_t>(i)));
  }
  return data;
}

LearnedProfiles learn_profiles(const ExperimentConfig& cfg, const Abstraction& abstraction,
                               const std::vector<Trajectory>& abstract_data) {
  LearnedProfiles out;
  out.stats = collect_stats(abstract_data, abstraction.tests, cfg.max_search_len);
  out.profiles = cluster_profiles(out.stats, cfg.alpha, cfg.min_trials);
  return out;
}

std::vector<PpTrajectory> translate_all(const ExperimentConfig& cfg, const LearnedProfiles& learned,
                                        const std::vector<Trajectory>& abstract_data) {
  std::vector<PpTrajectory> out;
  out.reserve(abstract_data.size());
  for (const auto& t : abstract_data) {
    out.push_back(translate(t.steps, learned.stats, learned.profiles, cfg.strategy, cfg.alpha));
  }
  return out;
}

std::unique_ptr<PpRuntime> PpModel::runtime(const ProfileSet& profiles, std::uint64_t seed) const {
  if (kind == "lpst") return std::make_unique<LpstRuntime>(tree, alphabet, profiles, seed);
  return std::make_unique<PpPomdpRuntime>(pomdp, alphabet, profiles);
}

PpModel train_pp_model(const ExperimentConfig& cfg, const std::vector<PpTrajectory>& pp_data,
                       std::size_t n_profiles) {
  PpModel m;
  m.kind = cfg.pp_model;
  m.alphabet = PpAlphabet(pp_data);
  if (m.kind == "lpst") {
    m.tree = Lpst(pp_data, m.alphabet, static_cast<int>(n_profiles), cfg.lpst_depth);
  } else {
    EmOptions opt = cfg.flat;
    opt.states = cfg.pp_states > 0 ? cfg.pp_states : static_cast<int>(2 * n_profiles);
    Rng rng(derive_seed(cfg.seed, "train-pp", 0));
    m.pomdp = train_pp_pomdp(pp_data, m.alphabet, n_profiles, opt, rng).model;
  }
  return m;
}

EmResult train_flat_model(const ExperimentConfig& cfg, const Abstraction& abstraction,
                          const std::vector<Trajectory>& abstract_data) {
  std::vector<History> histories;
  histories.reserve(abstract_data.size());
  for (const auto& t : abstract_data) histories.push_back(t.steps);
  Rng rng(derive_seed(cfg.seed, "train-flat", 0));
  return em_train(histories, static_cast<int>(abstraction.alphabet.actions.size()),
                  static_cast<int>(abstraction.alphabet.observations.size()), cfg.flat, rng);
}

std::vector<EvalRow> run_evaluation(const ExperimentConfig& cfg, const Environment& prototype,
                                    const Abstraction& abstraction, const ProfileSet* profiles, const PpModel* pp,
                                    const TabularPomdp* flat) {
  std::vector<EvalRow> rows;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t seed = derive_seed(cfg.seed, "evaluate", static_cast<std::uint64_t>(trial));
    for (const auto& name : cfg.sources) {
      auto env = prototype.clone();
      FeatureProvider provider;
      provider.source = parse_feature_source(name);
      std::unique_ptr<PpRuntime> runtime;
      if (provider.source == FeatureSource::pp) {
        if (pp == nullptr || profiles == nullptr) throw PrerequisiteError("pp source needs a trained PP model");
        runtime = pp->runtime(*profiles, derive_seed(cfg.seed, "pp-runtime", static_cast<std::uint64_t>(trial)));
        provider.pp = runtime.get();
      }
      if (provider.source == FeatureSource::flat) {
        if (flat == nullptr) throw PrerequisiteError("flat source needs a trained flat POMDP");
        provider.flat = flat;
      }
      EvalOptions opt;
      opt.steps = cfg.eval_steps;
      opt.olgarb = cfg.olgarb;
      opt.seed = seed;
      rows.push_back({cfg.episodes, trial, seed, evaluate(*env, abstraction, provider, opt)});
    }
  }
  return rows;
}

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows, const std::vector<TestOfInterest>& tests,
                    const std::string& config_hash) {
  out << "config_hash,training_size,trial,seed,source,steps,avg_reward,rmse";
  for (const auto& t : tests) out << ",rmse_" << t.name;
  out << ",fallback_count,clamped_count\n";
  for (const auto& r : rows) {
    const EvalRecord& e = r.record;
    out << config_hash << ',' << r.training_size << ',' << r.trial << ',' << r.seed << ',' << e.source << ','
        << e.steps << ',' << num(e.avg_reward) << ',' << (e.has_rmse ? num(e.rmse) : "NA");
    for (std::size_t i = 0; i < tests.size(); ++i) out << ',' << (e.has_rmse ? num(e.per_test_rmse[i]) : "NA");
    out << ',' << e.fallbacks << ',' << e.clamped << '\n';
  }
}

namespace {

constexpr const char* kData = "data.traj";
constexpr const char* kProfiles = "profiles.csv";
constexpr const char* kPpData = "pp.traj";
constexpr const char* kPpModel = "ppmodel.txt";
constexpr const char* kFlat = "flat.pomdp";
constexpr const char* kEval = "eval.csv";
constexpr const char* kSdm = "sdm.txt";
constexpr const char* kManifest = "manifest.json";

void write_atomic(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << body;
    if (!out) throw ConfigError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_artifact(const fs::path& path, const std::string& hash, const std::string& body) {
  write_atomic(path, "# config " + hash + "\n" + body);
}

// Body of an artifact after checking its config header.
std::string read_artifact(const fs::path& path, const std::string& hash, const std::string& stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PrerequisiteError("missing '" + path.string() + "'; run stage '" + stage + "' first");
  std::string header;
  std::getline(in, header);
  const std::string expected = "# config " + hash;
  if (header != expected) {
    throw StaleArtifactError("'" + path.string() + "' was produced under a different config (" + header +
                             ", expected " + hash + "); rerun stage '" + stage + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::string hash;
  std::unique_ptr<Environment> env;
  Abstraction abstraction;
  std::vector<std::string> artifacts;

  Context(const ExperimentConfig& c, const std::string& out_dir)
      : cfg(c), dir(out_dir), hash(c.hash()), env(make_environment(c.env)), abstraction(env->abstraction(c.abstraction)) {}

  fs::path path(const char* name) const { return dir / name; }

  std::vector<Trajectory> data() const {
    std::istringstream in(read_artifact(path(kData), hash, "gen-data"));
    return abstract_trajectories(read_trajectories(in, env->alphabet()), abstraction);
  }
  ProfileSet profiles() const {
    std::istringstream in(read_artifact(path(kProfiles), hash, "estimate-profiles"));
    return read_profile_set(in, abstraction.tests, abstraction.alphabet);
  }
  void put(const char* name, const std::string& body, bool header = true) {
    if (header) {
      write_artifact(path(name), hash, body);
    } else {
      write_atomic(path(name), body);
    }
    artifacts.push_back(path(name).string());
  }
};

bool wants(const ExperimentConfig& cfg, const std::string& source) {
  for (const auto& s : cfg.sources) {
    if (s == source) return true;
  }
  return false;
}

void stage_gen_data(Context& c) {
  std::ostringstream out;
  write_trajectories(out, generate_data(c.cfg, *c.env), c.env->alphabet());
  c.put(kData, out.str());
}

void stage_estimate(Context& c) {
  const auto learned = learn_profiles(c.cfg, c.abstraction, c.data());
  std::ostringstream out;
  write_profile_set(out, learned.profiles, c.abstraction.tests, c.abstraction.alphabet);
  c.put(kProfiles, out.str());
}

void stage_translate(Context& c) {
  const auto data = c.data();
  LearnedProfiles learned;
  learned.profiles = c.profiles();
  learned.stats = collect_stats(data, c.abstraction.tests, c.cfg.max_search_len);
  std::ostringstream out;
  write_pp_trajectories(out, translate_all(c.cfg, learned, data), c.abstraction.alphabet);
  c.put(kPpData, out.str());
}

void stage_train_pp(Context& c) {
  const ProfileSet ps = c.profiles();
  std::istringstream in(read_artifact(c.path(kPpData), c.hash, "translate"));
  const auto pp_data = read_pp_trajectories(in, c.abstraction.alphabet, ps.size());
  const PpModel m = train_pp_model(c.cfg, pp_data, ps.size());
  std::ostringstream out;
  out << "kind " << m.kind << '\n';
  if (m.kind == "lpst") {
    m.alphabet.write(out, c.abstraction.alphabet);
    m.tree.write(out);
  } else {
    write_pp_pomdp(out, m.pomdp, m.alphabet, c.abstraction.alphabet);
  }
  c.put(kPpModel, out.str());
}

PpModel load_pp_model(const Context& c) {
  std::istringstream in(read_artifact(c.path(kPpModel), c.hash, "train-pp"));
  std::string key;
  PpModel m;
  if (!(in >> key >> m.kind) || key != "kind" || (m.kind != "lpst" && m.kind != "pomdp")) {
    throw ParseError("expected 'kind lpst|pomdp' in PP model file", 2);
  }
  if (m.kind == "lpst") {
    m.alphabet = PpAlphabet::read(in, c.abstraction.alphabet);
    m.tree = Lpst::read(in);
  } else {
    auto [pomdp, alphabet] = read_pp_pomdp(in, c.abstraction.alphabet);
    m.pomdp = std::move(pomdp);
    m.alphabet = std::move(alphabet);
  }
  return m;
}

void stage_train_flat(Context& c) {
  const EmResult r = train_flat_model(c.cfg, c.abstraction, c.data());
  std::ostringstream out;
  write_pomdp(out, r.model);
  c.put(kFlat, out.str());
}

void stage_evaluate(Context& c) {
  std::unique_ptr<ProfileSet> ps;
  std::unique_ptr<PpModel> pp;
  std::unique_ptr<TabularPomdp> flat;
  if (wants(c.cfg, "pp")) {
    ps = std::make_unique<ProfileSet>(c.profiles());
    pp = std::make_unique<PpModel>(load_pp_model(c));
  }
  if (wants(c.cfg, "flat")) {
    std::istringstream in(read_artifact(c.path(kFlat), c.hash, "train-flat"));
    flat = std::make_unique<TabularPomdp>(read_pomdp(in));
  }
  const auto rows = run_evaluation(c.cfg, *c.env, c.abstraction, ps.get(), pp.get(), flat.get());
  std::ostringstream out;
  write_eval_csv(out, rows, c.env->tests(), c.hash);
  c.put(kEval, out.str(), false);
}

void stage_sdm_check(Context& c) {
  std::ostringstream out;
  RankReport rank;
  if (!c.cfg.machine.empty()) {
    const DeterministicMachine m = load_machine(c.cfg.machine);
    const SdmBlock b = build_sdm(m, c.cfg.sdm_history_len, c.cfg.sdm_test_len);
    rank = numeric_rank(b.entries);
    const BoundReport bound = check_deterministic_bound(m, c.cfg.sdm_test_len);
    out << "source machine " << c.cfg.machine << "\nstates " << bound.states << "\nbound " << num(bound.bound)
        << "\nvacuous " << (bound.vacuous ? 1 : 0) << "\nbound_pass " << (bound.pass ? 1 : 0) << '\n';
  } else {
    const auto oracle = c.env->make_generative_oracle();
    const SdmBlock b = build_sdm(*oracle, c.cfg.sdm_history_len, c.cfg.sdm_test_len);
    rank = numeric_rank(b.entries);
    out << "source env " << c.env->id() << "\n";
  }
  out << "history_len " << c.cfg.sdm_history_len << "\ntest_len " << c.cfg.sdm_test_len << "\nrank " << rank.rank
      << "\ntolerance " << num(rank.tolerance) << "\nsingular_values";
  for (double s : rank.singular_values) out << ' ' << num(s);
  out << '\n';
  c.put(kSdm, out.str());
}

void update_manifest(const Context& c, const std::string& stage, double seconds) {
  using nlohmann::json;
  const fs::path path = c.path(kManifest);
  json m;
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      in >> m;
    } catch (const std::exception&) {
      m = json::object();
    }
    if (!m.contains("config_hash") || m["config_hash"] != c.hash) m = json::object();
  }
  m["config_hash"] = c.hash;
  m["version"] = kToolVersion;
  m["rng"] = kRngName;
  m["seed"] = c.cfg.seed;
  m["stages"][stage] = {{"artifacts", c.artifacts}, {"seconds", seconds}};
  write_atomic(path, m.dump(2) + "\n");
}

}  // namespace

void run_stage(const std::string& stage, const ExperimentConfig& cfg, const std::string& out_dir) {
  static const std::map<std::string, void (*)(Context&)> stages = {
      {"gen-data", stage_gen_data},   {"estimate-profiles", stage_estimate}, {"translate", stage_translate},
      {"train-pp", stage_train_pp},   {"train-flat", stage_train_flat},      {"evaluate", stage_evaluate},
      {"sdm-check", stage_sdm_check},
  };
  if (stage == "all") {
    for (const char* s : {"gen-data", "estimate-profiles", "translate", "train-pp"}) run_stage(s, cfg, out_dir);
    if (wants(cfg, "flat")) run_stage("train-flat", cfg, out_dir);
    run_stage("evaluate", cfg, out_dir);
    return;
  }
  const auto it = stages.find(stage);
  if (it == stages.end()) throw ConfigError("unknown stage '" + stage + "'");
  fs::create_directories(out_dir);
  Context c(cfg, out_dir);
  const auto start = std::chrono::steady_clock::now();
  it->second(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  update_manifest(c, stage, seconds);
}

void emit_plotdata(const std::vector<std::string>& inputs, std::ostream& out) {
  if (inputs.empty()) throw ConfigError("plotdata needs at least one EvalRecord CSV");
  using Key = std::tuple<std::int64_t, std::string, std::uint64_t, std::string>;
  std::map<Key, std::pair<std::string, std::string>> rows;  // -> (value, config hash)
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw PrerequisiteError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    std::vector<std::string> cols;
    {
      std::istringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col = [&](const std::string& name) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == name) return i;
      }
      throw DataError(path + ": missing column '" + name + "'");
    };
    const std::size_t c_hash = col("config_hash"), c_size = col("training_size"), c_seed = col("seed"),
                      c_source = col("source");
    col("avg_reward");
    col("rmse");
    std::vector<std::size_t> metrics;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == "avg_reward" || cols[i].rfind("rmse", 0) == 0 || cols[i] == "fallback_count") metrics.push_back(i);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::istringstream ss(line);
      std::string v;
      while (std::getline(ss, v, ',')) f.push_back(v);
      if (f.size() != cols.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols.size()) +
                        " columns, got " + std::to_string(f.size()));
      }
      std::int64_t size = 0;
      std::uint64_t seed = 0;
      try {
        size = std::stoll(f[c_size]);
        seed = std::stoull(f[c_seed]);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad training_size or seed");
      }
      for (std::size_t m : metrics) {
        if (f[m] == "NA") continue;
        rows[{size, f[c_source], seed, cols[m]}] = {f[m], f[c_hash]};
      }
    }
  }
  out << "training_size,method,seed,metric,value,config_hash\n";
  for (const auto& [k, v] : rows) {
    out << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',' << std::get<3>(k) << ',' << v.first
        << ',' << v.second << '\n';
  }
}

}  // namespace ppm
