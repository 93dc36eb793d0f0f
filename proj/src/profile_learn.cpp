#include "ppm/profile_learn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ppm/errors.hpp"
#include "ppm/g_test.hpp"

namespace ppm {

HistoryStats::HistoryStats(std::size_t n_tests, int max_len) : n_tests_(n_tests), max_len_(max_len) {
  if (max_len < 0) throw ConfigError("max search length must be non-negative");
  parent_.push_back(-1);
  step_.push_back({});
  depth_.push_back(0);
  visits_.push_back(0);
  trials_.resize(n_tests_, 0);
  successes_.resize(n_tests_, 0);
}

std::uint64_t HistoryStats::key(int node, Step s) {
  if (s.action < 0 || s.action >= 256 || s.observation < 0 || s.observation >= (1 << 24)) {
    throw ConfigError("symbol index too large for history statistics");
  }
  return static_cast<std::uint64_t>(static_cast<std::uint32_t>(node)) << 32 |
         static_cast<std::uint64_t>(s.action) << 24 | static_cast<std::uint64_t>(s.observation);
}

int HistoryStats::child(int node, Step s) const {
  auto it = children_.find(key(node, s));
  return it == children_.end() ? -1 : it->second;
}

int HistoryStats::add_child(int node, Step s) {
  auto [it, inserted] = children_.emplace(key(node, s), static_cast<int>(parent_.size()));
  if (inserted) {
    parent_.push_back(node);
    step_.push_back(s);
    depth_.push_back(depth_[static_cast<std::size_t>(node)] + 1);
    visits_.push_back(0);
    trials_.resize(trials_.size() + n_tests_, 0);
    successes_.resize(successes_.size() + n_tests_, 0);
  }
  return it->second;
}

void HistoryStats::add_episode(const History& steps, const std::vector<TestOfInterest>& tests) {
  if (tests.size() != n_tests_) throw ConfigError("history statistics built for a different number of tests");
  int node = 0;
  const std::size_t limit = std::min(steps.size(), static_cast<std::size_t>(max_len_));
  for (std::size_t i = 0; i <= limit; ++i) {
    if (i > 0) node = add_child(node, steps[i - 1]);
    ++visits_[static_cast<std::size_t>(node)];
    for (std::size_t t = 0; t < n_tests_; ++t) {
      const TestOutcome out = test_outcome(steps, i, tests[t]);
      if (out == TestOutcome::not_applicable) continue;
      ++trials_[index(node, t)];
      if (out == TestOutcome::success) ++successes_[index(node, t)];
    }
  }
}

int HistoryStats::find(const History& h) const {
  if (h.size() > static_cast<std::size_t>(max_len_)) return -1;
  int node = 0;
  for (const Step& s : h) {
    node = child(node, s);
    if (node < 0) return -1;
  }
  return node;
}

History HistoryStats::history(int node) const {
  History h(static_cast<std::size_t>(depth(node)));
  for (int n = node; n > 0; n = parent_[static_cast<std::size_t>(n)]) {
    h[static_cast<std::size_t>(depth(n) - 1)] = step_[static_cast<std::size_t>(n)];
  }
  return h;
}

std::vector<Trajectory> abstract_trajectories(const std::vector<Trajectory>& data, const Abstraction& abstraction) {
  std::vector<Trajectory> out = data;
  for (auto& t : out) {
    for (Step& s : t.steps) s.observation = abstraction.map(s.observation);
  }
  return out;
}

HistoryStats collect_stats(const std::vector<Trajectory>& data, const std::vector<TestOfInterest>& tests,
                           int max_len) {
  HistoryStats stats(tests.size(), max_len);
  for (const auto& t : data) stats.add_episode(t.steps, tests);
  return stats;
}

namespace {

std::vector<TestCounts> counts_at(const HistoryStats& stats, int node) {
  std::vector<TestCounts> c(stats.n_tests());
  for (std::size_t t = 0; t < c.size(); ++t) c[t] = {stats.successes(node, t), stats.trials(node, t)};
  return c;
}

}  // namespace

EstimatedProfile estimate(const HistoryStats& stats, int node) {
  EstimatedProfile e;
  e.counts = counts_at(stats, node);
  for (const auto& c : e.counts) {
    e.values.push_back(c.trials > 0 ? static_cast<double>(c.successes) / static_cast<double>(c.trials)
                                    : std::numeric_limits<double>::quiet_NaN());
  }
  e.exemplar = stats.history(node);
  return e;
}

bool profiles_differ(const std::vector<TestCounts>& a, const std::vector<TestCounts>& b, double alpha) {
  if (a.size() != b.size()) throw ConfigError("profiles over different numbers of tests");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].trials == 0 || b[t].trials == 0) continue;
    if (g_test(a[t].successes, a[t].trials, b[t].successes, b[t].trials, alpha).rejected) return true;
  }
  return false;
}

ProfileSet cluster_profiles(const HistoryStats& stats, double alpha, std::int64_t min_trials) {
  ProfileSet ps;
  ps.alpha = alpha;
  ps.min_trials = min_trials;
  std::vector<int> eligible;
  for (int n = 0; n < static_cast<int>(stats.size()); ++n) {
    bool ok = stats.visits(n) > 0 && stats.n_tests() > 0;
    for (std::size_t t = 0; t < stats.n_tests() && ok; ++t) {
      ok = stats.trials(n, t) >= std::max<std::int64_t>(min_trials, 1);
    }
    if (ok) eligible.push_back(n);
  }
  std::vector<History> hist(eligible.size());
  for (std::size_t i = 0; i < eligible.size(); ++i) hist[i] = stats.history(eligible[i]);
  std::vector<std::size_t> order(eligible.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto vx = stats.visits(eligible[x]), vy = stats.visits(eligible[y]);
    if (vx != vy) return vx > vy;
    if (hist[x].size() != hist[y].size()) return hist[x].size() < hist[y].size();
    return hist[x] < hist[y];
  });
  for (std::size_t i : order) {
    const auto counts = counts_at(stats, eligible[i]);
    bool novel = true;
    for (const auto& p : ps.profiles) {
      if (!profiles_differ(counts, p.counts, alpha)) {
        novel = false;
        break;
      }
    }
    if (novel) ps.profiles.push_back(estimate(stats, eligible[i]));
  }
  return ps;
}

MatchResult match_profile(const std::vector<TestCounts>& counts, const ProfileSet& profiles, double alpha) {
  MatchResult m;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (!profiles_differ(counts, profiles.profiles[i].counts, alpha)) m.candidates.push_back(static_cast<int>(i));
  }
  if (m.candidates.empty()) {
    m.kind = MatchResult::Kind::none;
  } else if (m.candidates.size() == 1) {
    m.kind = MatchResult::Kind::unique;
  } else {
    m.kind = MatchResult::Kind::multiple;
  }
  return m;
}

namespace {

double xlogy_ratio(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

}  // namespace

int kld_match(const std::vector<TestCounts>& counts, const std::vector<int>& candidates, const ProfileSet& profiles,
              double eps) {
  if (candidates.empty()) throw ConfigError("KL match needs at least one candidate");
  int best = candidates.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (int c : candidates) {
    const Profile& rho = profiles.profiles.at(static_cast<std::size_t>(c)).values;
    double d = 0.0;
    for (std::size_t t = 0; t < counts.size(); ++t) {
      if (counts[t].trials == 0) continue;
      const double p = static_cast<double>(counts[t].successes) / static_cast<double>(counts[t].trials);
      const double q = std::clamp(rho[t], eps, 1.0 - eps);
      d += xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q);
    }
    if (d < best_d || (d == best_d && c < best)) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Strategy parse_strategy(const std::string& s) {
  if (s == "kld" || s == "KLD") return Strategy::kld;
  if (s == "cut" || s == "CUT") return Strategy::cut;
  throw ConfigError("unknown translation strategy '" + s + "'");
}

std::string strategy_name(Strategy s) { return s == Strategy::kld ? "kld" : "cut"; }

int stats_node_for_prefix(const HistoryStats& stats, const History& steps, std::size_t len) {
  const std::size_t keep = std::min(len, static_cast<std::size_t>(stats.max_len()));
  int node = 0;
  for (std::size_t i = len - keep; i < len && node >= 0; ++i) node = stats.child(node, steps[i]);
  return node;
}

PpTrajectory translate(const History& abstract_steps, const HistoryStats& stats, const ProfileSet& profiles,
                       Strategy strategy, double alpha) {
  PpTrajectory out;
  for (std::size_t i = 0; i <= abstract_steps.size(); ++i) {
    const int node = stats_node_for_prefix(stats, abstract_steps, i);
    if (node < 0) {
      out.truncated = true;
      out.reason = "unseen";
      break;
    }
    const auto counts = counts_at(stats, node);
    const MatchResult m = match_profile(counts, profiles, alpha);
    int idx = -1;
    if (m.kind == MatchResult::Kind::unique) {
      idx = m.candidates.front();
    } else if (m.kind == MatchResult::Kind::multiple && strategy == Strategy::kld) {
      idx = kld_match(counts, m.candidates, profiles);
    } else {
      out.truncated = true;
      out.reason = m.kind == MatchResult::Kind::none ? "nomatch" : "ambiguous";
      break;
    }
    if (i == 0) {
      out.initial = idx;
    } else {
      out.steps.push_back({abstract_steps[i - 1], idx});
    }
  }
  return out;
}

void write_profile_set(std::ostream& out, const ProfileSet& ps, const std::vector<TestOfInterest>& tests,
                       const Alphabet& alphabet) {
  out << "# alpha " << std::setprecision(17) << ps.alpha << "\n# min_trials " << ps.min_trials << "\nindex";
  for (const auto& t : tests) out << ',' << t.name;
  for (const auto& t : tests) out << ',' << t.name << "_successes," << t.name << "_trials";
  out << ",exemplar\n";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& p = ps.profiles[i];
    out << i;
    for (double v : p.values) out << ',' << v;
    for (const auto& c : p.counts) out << ',' << c.successes << ',' << c.trials;
    out << ',' << format_history(p.exemplar, alphabet) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line_no);
  }
}

std::int64_t parse_int(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad integer '" + s + "'", line_no);
  }
}

}  // namespace

ProfileSet read_profile_set(std::istream& in, const std::vector<TestOfInterest>& tests, const Alphabet& alphabet) {
  ProfileSet ps;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  const std::size_t m = tests.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, value;
      ls >> key >> value;
      if (key == "alpha") ps.alpha = parse_double(value, line_no);
      if (key == "min_trials") ps.min_trials = parse_int(value, line_no);
      continue;
    }
    auto cells = split_csv(line);
    if (!header) {
      if (cells.size() != 2 + 3 * m || cells[0] != "index") throw ParseError("unexpected profile header", line_no);
      for (std::size_t t = 0; t < m; ++t) {
        if (cells[1 + t] != tests[t].name) throw ParseError("profile columns do not match the tests", line_no);
      }
      header = true;
      continue;
    }
    if (cells.size() != 2 + 3 * m) throw ParseError("wrong number of profile columns", line_no);
    if (parse_int(cells[0], line_no) != static_cast<std::int64_t>(ps.size())) {
      throw ParseError("profile indices must be consecutive", line_no);
    }
    EstimatedProfile p;
    for (std::size_t t = 0; t < m; ++t) p.values.push_back(parse_double(cells[1 + t], line_no));
    for (std::size_t t = 0; t < m; ++t) {
      p.counts.push_back({parse_int(cells[1 + m + 2 * t], line_no), parse_int(cells[2 + m + 2 * t], line_no)});
    }
    try {
      p.exemplar = parse_history(cells.back(), alphabet);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    ps.profiles.push_back(std::move(p));
  }
  if (!header) throw ParseError("missing profile header", line_no);
  return ps;
}

void write_pp_trajectories(std::ostream& out, const std::vector<PpTrajectory>& data, const Alphabet& alphabet) {
  for (const auto& t : data) {
    if (t.initial < 0) {
      out << '-';
    } else {
      out << t.initial;
    }
    for (const auto& s : t.steps) {
      out << ' ' << alphabet.actions.name(s.action.action) << '/' << alphabet.observations.name(s.action.observation)
          << ' ' << s.profile;
    }
    if (t.truncated) out << " TRUNCATED:" << t.reason;
    out << '\n';
  }
}

std::vector<PpTrajectory> read_pp_trajectories(std::istream& in, const Alphabet& alphabet, std::size_t n_profiles) {
  std::vector<PpTrajectory> out;
  std::string line;
  std::size_t line_no = 0;
  auto profile_index = [&](const std::string& s) {
    const auto v = parse_int(s, line_no);
    if (v < 0 || static_cast<std::size_t>(v) >= n_profiles) throw ParseError("profile index out of range", line_no);
    return static_cast<int>(v);
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    PpTrajectory t;
    std::string tok;
    ls >> tok;
    if (tok != "-") t.initial = profile_index(tok);
    while (ls >> tok) {
      if (tok.rfind("TRUNCATED:", 0) == 0) {
        t.truncated = true;
        t.reason = tok.substr(10);
        break;
      }
      const auto slash = tok.find('/');
      if (slash == std::string::npos) throw ParseError("expected action/observation, got '" + tok + "'", line_no);
      const int a = alphabet.actions.find(tok.substr(0, slash));
      const int o = alphabet.observations.find(tok.substr(slash + 1));
      if (a < 0 || o < 0) throw ParseError("unknown symbol in '" + tok + "'", line_no);
      std::string p;
      if (!(ls >> p)) throw ParseError("PP-action without a profile", line_no);
      t.steps.push_back({{a, o}, profile_index(p)});
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace ppm
