#include "ppm/pp_runtime.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

PpAlphabet::PpAlphabet(const std::vector<PpTrajectory>& data) {
  std::set<Step> seen;
  for (const auto& t : data) {
    for (const auto& s : t.steps) seen.insert(s.action);
  }
  *this = PpAlphabet(std::vector<Step>(seen.begin(), seen.end()));
}

PpAlphabet::PpAlphabet(std::vector<Step> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!index_.emplace(pairs_[i], static_cast<int>(i) + 1).second) throw ConfigError("duplicate PP-action");
  }
}

int PpAlphabet::index(Step s) const {
  auto it = index_.find(s);
  return it == index_.end() ? -1 : it->second;
}

std::string PpAlphabet::name(int index, const Alphabet& base) const {
  if (index == kStart) return "START";
  const Step s = pair(index);
  return base.actions.name(s.action) + "/" + base.observations.name(s.observation);
}

void PpAlphabet::write(std::ostream& out, const Alphabet& base) const {
  out << "ppactions " << pairs_.size() << '\n';
  for (std::size_t i = 0; i < pairs_.size(); ++i) out << name(static_cast<int>(i) + 1, base) << '\n';
}

PpAlphabet PpAlphabet::read(std::istream& in, const Alphabet& base) {
  std::string line, key;
  std::size_t count = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (!(ls >> key >> count) || key != "ppactions") throw ParseError("expected 'ppactions <count>'", line_no);
    break;
  }
  std::vector<Step> pairs;
  while (pairs.size() < count && std::getline(in, line)) {
    ++line_no;
    const auto slash = line.find('/');
    if (slash == std::string::npos) throw ParseError("expected action/observation", line_no);
    const int a = base.actions.find(line.substr(0, slash));
    const int o = base.observations.find(line.substr(slash + 1));
    if (a < 0 || o < 0) throw ParseError("unknown PP-action '" + line + "'", line_no);
    pairs.push_back({a, o});
  }
  if (pairs.size() != count) throw ParseError("PP-action list ended early", line_no);
  return PpAlphabet(std::move(pairs));
}

std::vector<History> pp_sequences(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet) {
  std::vector<History> out;
  for (const auto& t : data) {
    if (t.initial < 0) continue;
    History h{{PpAlphabet::kStart, t.initial}};
    for (const auto& s : t.steps) {
      const int x = alphabet.index(s.action);
      if (x < 0) throw ConfigError("PP-action missing from the PP alphabet");
      h.push_back({x, s.profile});
    }
    out.push_back(std::move(h));
  }
  return out;
}

Profile mean_profile(const ProfileSet& profiles, const std::vector<int>& members) {
  if (members.empty() || profiles.size() == 0) throw ConfigError("mean of an empty profile set");
  Profile mean(profiles.profiles.front().values.size(), 0.0);
  for (int i : members) {
    const auto& v = profiles.profiles.at(static_cast<std::size_t>(i)).values;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  for (double& x : mean) x /= static_cast<double>(members.size());
  return mean;
}

PpPomdpRuntime::PpPomdpRuntime(const TabularPomdp& model, const PpAlphabet& alphabet, const ProfileSet& profiles)
    : model_(&model), alphabet_(&alphabet), profiles_(&profiles) {
  if (model.actions() != alphabet.size() || model.observations() != static_cast<int>(profiles.size())) {
    throw ConfigError("PP-POMDP sizes do not match its PP alphabet and profile set");
  }
  reset();
}

int PpPomdpRuntime::most_likely(const TabularPomdp& m, const Eigen::VectorXd& b, int pp_action) {
  int best = -1;
  double best_p = -1.0;
  for (int o : m.emitted(pp_action)) {  // ascending, so ties keep the lowest index
    const double p = (b.transpose() * *m.joint(pp_action, o)).sum();
    if (p > best_p) {
      best_p = p;
      best = o;
    }
  }
  return best_p > 0.0 ? best : -1;
}

void PpPomdpRuntime::step(int pp_action) {
  const int o = most_likely(*model_, b_, pp_action);
  if (o < 0) {
    ++impossible_;
    b_ = model_->initial();
    std::vector<int> all(profiles_->size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    current_ = mean_profile(*profiles_, all);
    index_ = -1;
    return;
  }
  index_ = o;
  current_ = profiles_->profiles[static_cast<std::size_t>(o)].values;
  b_ = belief_update(*model_, b_, pp_action, o);
}

void PpPomdpRuntime::reset() {
  b_ = model_->initial();
  step(PpAlphabet::kStart);
}

void PpPomdpRuntime::observe(Step pp_action) {
  const int x = alphabet_->index(pp_action);
  if (x >= 0) {
    step(x);
    return;
  }
  ++unknown_;
  b_ = model_->initial();
  std::vector<int> all(profiles_->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  current_ = mean_profile(*profiles_, all);
  index_ = -1;
}

EmResult train_pp_pomdp(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet, std::size_t n_profiles,
                        const EmOptions& opt, Rng& rng) {
  const auto seqs = pp_sequences(data, alphabet);
  if (seqs.empty()) throw DataError("no PP trajectories to train on");
  if (n_profiles == 0) throw DataError("empty profile set");
  return em_train(seqs, alphabet.size(), static_cast<int>(n_profiles), opt, rng);
}

void write_pp_pomdp(std::ostream& out, const TabularPomdp& m, const PpAlphabet& alphabet, const Alphabet& base) {
  alphabet.write(out, base);
  write_pomdp(out, m);
}

std::pair<TabularPomdp, PpAlphabet> read_pp_pomdp(std::istream& in, const Alphabet& base) {
  PpAlphabet alphabet = PpAlphabet::read(in, base);
  TabularPomdp m = read_pomdp(in);
  if (m.actions() != alphabet.size()) throw DataError("PP-POMDP action count does not match its PP alphabet");
  return {std::move(m), std::move(alphabet)};
}

DeterministicMachine learn_pp_machine(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet,
                                      std::size_t n_profiles, const Alphabet& base) {
  if (n_profiles == 0) throw DataError("empty profile set");
  const int n = static_cast<int>(n_profiles);
  std::map<std::pair<int, int>, std::vector<std::int64_t>> votes;
  std::vector<std::int64_t> initial(n_profiles, 0);
  for (const auto& seq : pp_sequences(data, alphabet)) {
    ++initial[static_cast<std::size_t>(seq.front().observation)];
    for (std::size_t i = 1; i < seq.size(); ++i) {
      auto& v = votes[{seq[i - 1].observation, seq[i].action - 1}];
      if (v.empty()) v.assign(n_profiles, 0);
      ++v[static_cast<std::size_t>(seq[i].observation)];
    }
  }
  auto argmax = [](const std::vector<std::int64_t>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[best]) best = i;
    }
    return static_cast<int>(best);
  };
  std::vector<std::string> inputs, outputs, names;
  for (int x = 1; x < alphabet.size(); ++x) {
    const Step s = alphabet.pair(x);
    inputs.push_back(base.actions.name(s.action) + ":" + base.observations.name(s.observation));
  }
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    outputs.push_back("p" + std::to_string(i));
    names.push_back("s" + std::to_string(i));
    labels.push_back(i);
  }
  std::vector<DeterministicMachine::Transition> ts;
  for (const auto& [key, v] : votes) ts.push_back({key.first, key.second, argmax(v)});
  return DeterministicMachine(SymbolSet(inputs), SymbolSet(outputs), names, labels, argmax(initial), ts);
}

}  // namespace ppm
