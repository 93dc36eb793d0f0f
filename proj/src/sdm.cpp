#include "ppm/sdm.hpp"

#include <cmath>
#include <map>

#include "ppm/errors.hpp"

namespace ppm {

namespace {

using Futures = std::vector<std::pair<History, double>>;

void enumerate_futures(const GenerativeOracle& oracle, History& h, std::size_t base, int depth, double prob,
                       Futures& out) {
  if (depth == 0) return;
  const int n_actions = static_cast<int>(oracle.alphabet().actions.size());
  for (int a = 0; a < n_actions; ++a) {
    for (const auto& op : oracle.next_observation(h, a)) {
      if (op.probability <= 0.0) continue;
      h.push_back({a, op.observation});
      const double p = prob * op.probability;
      out.emplace_back(History(h.begin() + static_cast<std::ptrdiff_t>(base), h.end()), p);
      enumerate_futures(oracle, h, base, depth - 1, p, out);
      h.pop_back();
    }
  }
}

struct ColumnOrder {
  bool operator()(const History& a, const History& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

}  // namespace

SdmBlock build_sdm_rows(const GenerativeOracle& oracle, const std::vector<History>& rows, int lt, std::size_t cap) {
  if (lt < 0) throw ConfigError("test length must be non-negative");
  std::vector<Futures> futures(rows.size());
  std::map<History, int, ColumnOrder> columns;
  columns.emplace(History{}, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    History h = rows[i];
    enumerate_futures(oracle, h, h.size(), lt, 1.0, futures[i]);
    for (const auto& [t, p] : futures[i]) columns.emplace(t, 0);
    if (rows.size() * columns.size() > cap) {
      throw SizeError("system dynamics block " + std::to_string(rows.size()) + " x " +
                      std::to_string(columns.size()) + "+ exceeds the cap of " + std::to_string(cap) + " entries");
    }
  }
  SdmBlock b;
  b.alphabet = oracle.alphabet();
  b.rows = rows;
  int j = 0;
  for (auto& [t, idx] : columns) {
    idx = j++;
    b.cols.push_back(t);
  }
  b.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(b.cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b.entries(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (const auto& [t, p] : futures[i]) b.entries(static_cast<Eigen::Index>(i), columns.at(t)) = p;
  }
  b.row_weights.assign(rows.size(), 0.0);
  return b;
}

SdmBlock build_sdm(const GenerativeOracle& oracle, int lh, int lt, std::size_t cap) {
  if (lh < 0) throw ConfigError("history length must be non-negative");
  const int n_actions = static_cast<int>(oracle.alphabet().actions.size());
  std::vector<History> rows{History{}};
  std::vector<double> weights{1.0};
  std::size_t level_begin = 0;
  for (int len = 1; len <= lh; ++len) {
    const std::size_t level_end = rows.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int a = 0; a < n_actions; ++a) {
        for (const auto& op : oracle.next_observation(rows[i], a)) {
          if (op.probability <= 0.0) continue;
          History h = rows[i];
          h.push_back({a, op.observation});
          rows.push_back(std::move(h));
          weights.push_back(weights[i] * op.probability / n_actions);
          if (rows.size() > cap) {
            throw SizeError("more than " + std::to_string(cap) + " reachable histories up to length " +
                            std::to_string(lh));
          }
        }
      }
    }
    level_begin = level_end;
  }
  SdmBlock b = build_sdm_rows(oracle, rows, lt, cap);
  b.row_weights = std::move(weights);
  return b;
}

RankReport numeric_rank(const Eigen::MatrixXd& m, double tol) {
  if (!m.allFinite()) throw DataError("rank of a matrix with non-finite entries");
  RankReport r;
  r.tolerance = tol;
  if (m.size() == 0) return r;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  r.singular_values.assign(s.data(), s.data() + s.size());
  const double top = r.singular_values.empty() ? 0.0 : r.singular_values.front();
  for (double v : r.singular_values) {
    if (v > tol * top) ++r.rank;
  }
  return r;
}

BoundValue prop15_bound(int n_actions, int n_observations) {
  if (n_actions < 2 || n_observations < 2) return {0.0, true};
  return {(std::log(n_actions - 1.0) + std::log(n_observations - 1.0)) / std::log(static_cast<double>(n_actions)),
          false};
}

BoundReport check_deterministic_bound(const DeterministicMachine& m, int lt, double tol) {
  BoundReport r;
  std::vector<History> rows;
  const auto reach = m.reachable();
  const auto access = m.access_histories();
  for (int s = 0; s < m.state_count(); ++s) {
    if (reach[static_cast<std::size_t>(s)]) rows.push_back(access[static_cast<std::size_t>(s)]);
  }
  r.states = static_cast<int>(rows.size());
  r.rank = numeric_rank(build_sdm_rows(m, rows, lt).entries, tol).rank;
  const BoundValue b = prop15_bound(static_cast<int>(m.alphabet().actions.size()),
                                    static_cast<int>(m.alphabet().observations.size()));
  r.bound = b.value;
  r.vacuous = b.vacuous;
  r.pass = b.vacuous || r.rank >= b.value;
  return r;
}

PpSystemOracle::PpSystemOracle(const Environment& env, std::vector<Profile> profiles, double tol)
    : env_(env.clone()), oracle_(env.make_generative_oracle()), profiles_(std::move(profiles)), tol_(tol) {
  const Alphabet& base = env.alphabet();
  std::vector<std::string> actions, observations;
  for (std::size_t a = 0; a < base.actions.size(); ++a) {
    for (std::size_t o = 0; o < base.observations.size(); ++o) {
      actions.push_back(base.actions.name(static_cast<int>(a)) + "_" + base.observations.name(static_cast<int>(o)));
    }
  }
  for (std::size_t i = 0; i < profiles_.size(); ++i) observations.push_back("p" + std::to_string(i));
  observations.push_back("void");
  alphabet_ = {SymbolSet(std::move(actions)), SymbolSet(std::move(observations))};
}

Step PpSystemOracle::decode(int pp_action) const {
  const int n_obs = static_cast<int>(env_->alphabet().observations.size());
  return {pp_action / n_obs, pp_action % n_obs};
}

int PpSystemOracle::profile_index(const Profile& p) const {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (profiles_[i].size() != p.size()) continue;
    bool same = true;
    for (std::size_t k = 0; k < p.size() && same; ++k) same = std::abs(profiles_[i][k] - p[k]) <= tol_;
    if (same) return static_cast<int>(i);
  }
  return -1;
}

namespace {

bool possible(const GenerativeOracle& oracle, const History& h, Step s) {
  for (const auto& op : oracle.next_observation(h, s.action)) {
    if (op.observation == s.observation) return op.probability > 0.0;
  }
  return false;
}

}  // namespace

std::vector<ObservationProbability> PpSystemOracle::next_observation(const History& h, int action) const {
  if (!alphabet_.actions.contains(action)) throw ConfigError("unknown prediction-profile action");
  History base;
  bool dead = false;
  for (const Step& s : h) {
    if (!dead && !possible(*oracle_, base, decode(s.action))) dead = true;
    if (dead) {
      if (s.observation != void_symbol()) throw MalformedHistoryError("expected the void observation");
      continue;
    }
    base.push_back(decode(s.action));
    if (s.observation != profile_index(tracked_profile(*env_, base))) {
      throw MalformedHistoryError("profile observation does not match the environment");
    }
  }
  const Step next = decode(action);
  if (dead || !possible(*oracle_, base, next)) return {{void_symbol(), 1.0}};
  base.push_back(next);
  const int idx = profile_index(tracked_profile(*env_, base));
  if (idx < 0) throw ConsistencyError("profile missing from the prediction-profile alphabet");
  return {{idx, 1.0}};
}

}  // namespace ppm
