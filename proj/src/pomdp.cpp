#include "ppm/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

TabularPomdp::TabularPomdp(int n_states, int n_actions, int n_observations)
    : n_(n_states), n_actions_(n_actions), n_obs_(n_observations) {
  if (n_states < 1) throw ConfigError("a POMDP needs at least one state");
  if (n_actions < 1 || n_observations < 1) throw ConfigError("a POMDP needs non-empty alphabets");
  initial_ = Eigen::VectorXd::Constant(n_, 1.0 / n_);
  t_.assign(static_cast<std::size_t>(n_actions), Eigen::MatrixXd::Constant(n_, n_, 1.0 / n_));
  emitted_.resize(static_cast<std::size_t>(n_actions));
}

const Eigen::MatrixXd* TabularPomdp::emission(int a, int o) const {
  auto it = e_.find(key(a, o));
  return it == e_.end() ? nullptr : &it->second;
}

Eigen::MatrixXd& TabularPomdp::emission_slot(int a, int o) {
  if (a < 0 || a >= n_actions_ || o < 0 || o >= n_obs_) throw ConfigError("POMDP symbol out of range");
  auto [it, inserted] = e_.try_emplace(key(a, o), Eigen::MatrixXd::Zero(n_, n_));
  if (inserted) {
    auto& list = emitted_[static_cast<std::size_t>(a)];
    list.insert(std::upper_bound(list.begin(), list.end(), o), o);
  }
  joint_.erase(key(a, o));
  return it->second;
}

const Eigen::MatrixXd* TabularPomdp::joint(int a, int o) const {
  const std::uint64_t k = key(a, o);
  auto it = joint_.find(k);
  if (it != joint_.end()) return &it->second;
  const Eigen::MatrixXd* e = emission(a, o);
  if (e == nullptr) return nullptr;
  return &joint_.emplace(k, transition(a).cwiseProduct(*e)).first->second;
}

void TabularPomdp::validate(double tol) const {
  auto check = [&](double sum, const char* what) {
    if (std::abs(sum - 1.0) > tol) throw ConsistencyError(std::string("POMDP ") + what + " sums to " + std::to_string(sum));
  };
  if ((initial_.array() < 0.0).any()) throw ConsistencyError("negative POMDP initial probability");
  check(initial_.sum(), "initial distribution");
  for (int a = 0; a < n_actions_; ++a) {
    const auto& t = transition(a);
    if ((t.array() < 0.0).any()) throw ConsistencyError("negative POMDP transition probability");
    for (int s = 0; s < n_; ++s) check(t.row(s).sum(), "transition row");
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n_, n_);
    for (int o : emitted(a)) {
      const auto* e = emission(a, o);
      if ((e->array() < 0.0).any()) throw ConsistencyError("negative POMDP emission probability");
      total += *e;
    }
    for (int s = 0; s < n_; ++s) {
      for (int s2 = 0; s2 < n_; ++s2) check(total(s, s2), "emission distribution");
    }
  }
}

Eigen::VectorXd belief_update(const TabularPomdp& m, const Eigen::VectorXd& b, int a, int o) {
  const Eigen::MatrixXd* j = m.joint(a, o);
  if (j == nullptr) throw ImpossibleObservationError("observation has zero probability under the model");
  Eigen::VectorXd next = j->transpose() * b;
  const double z = next.sum();
  if (!(z > 1e-300)) throw ImpossibleObservationError("observation has zero probability under the belief");
  return next / z;
}

double log_likelihood(const TabularPomdp& m, const History& h) {
  Eigen::VectorXd b = m.initial();
  double ll = 0.0;
  for (const Step& s : h) {
    const Eigen::MatrixXd* j = m.joint(s.action, s.observation);
    if (j == nullptr) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd next = j->transpose() * b;
    const double z = next.sum();
    if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += std::log(z);
    b = next / z;
  }
  return ll;
}

Eigen::VectorXd test_vector(const TabularPomdp& m, const TestOfInterest& t) {
  Eigen::VectorXd e = Eigen::VectorXd::Ones(m.states());
  for (auto k = t.steps.rbegin(); k != t.steps.rend(); ++k) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(m.states());
    for (int o : m.emitted(k->action)) {
      if (k->accepts(o)) next += *m.joint(k->action, o) * e;
    }
    e = next;
  }
  return e;
}

PomdpPredictor::PomdpPredictor(const TabularPomdp& m, const std::vector<TestOfInterest>& tests) : m_(&m) {
  for (const auto& t : tests) e_.push_back(test_vector(m, t));
  reset();
}

void PomdpPredictor::reset() { b_ = m_->initial(); }

void PomdpPredictor::observe(int a, int o) {
  try {
    b_ = belief_update(*m_, b_, a, o);
  } catch (const ImpossibleObservationError&) {
    ++impossible_;
    b_ = m_->initial();
  }
}

Profile PomdpPredictor::profile() const {
  Profile p;
  p.reserve(e_.size());
  for (const auto& e : e_) p.push_back(std::clamp(b_.dot(e), 0.0, 1.0));
  return p;
}

Profile flat_predict(const TabularPomdp& m, const History& h, const std::vector<TestOfInterest>& tests,
                     bool* fell_back) {
  PomdpPredictor p(m, tests);
  for (const Step& s : h) p.observe(s.action, s.observation);
  if (fell_back != nullptr) *fell_back = p.impossible_events() > 0;
  return p.profile();
}

PomdpOracle::PomdpOracle(const TabularPomdp& m, Alphabet alphabet) : m_(&m), alphabet_(std::move(alphabet)) {
  if (static_cast<int>(alphabet_.actions.size()) != m.actions() ||
      static_cast<int>(alphabet_.observations.size()) != m.observations()) {
    throw ConfigError("POMDP alphabet sizes do not match the model");
  }
}

std::vector<ObservationProbability> PomdpOracle::next_observation(const History& h, int action) const {
  Eigen::VectorXd b = m_->initial();
  for (const Step& s : h) {
    try {
      b = belief_update(*m_, b, s.action, s.observation);
    } catch (const ImpossibleObservationError&) {
      throw MalformedHistoryError("history has zero probability under the model");
    }
  }
  std::vector<ObservationProbability> out;
  for (int o : m_->emitted(action)) {
    const double p = (b.transpose() * *m_->joint(action, o)).sum();
    if (p > 0.0) out.push_back({o, p});
  }
  return out;
}

void write_pomdp(std::ostream& out, const TabularPomdp& m) {
  out << std::setprecision(17);
  out << "pomdp v1\nstates " << m.states() << "\nactions " << m.actions() << "\nobservations " << m.observations()
      << "\ninitial";
  for (int s = 0; s < m.states(); ++s) out << ' ' << m.initial()(s);
  out << '\n';
  for (int a = 0; a < m.actions(); ++a) {
    for (int s = 0; s < m.states(); ++s) {
      out << "T " << a << ' ' << s;
      for (int s2 = 0; s2 < m.states(); ++s2) out << ' ' << m.transition(a)(s, s2);
      out << '\n';
    }
  }
  for (int a = 0; a < m.actions(); ++a) {
    for (int o : m.emitted(a)) {
      const auto& e = *m.emission(a, o);
      out << "E " << a << ' ' << o;
      for (int s = 0; s < m.states(); ++s) {
        for (int s2 = 0; s2 < m.states(); ++s2) {
          if (e(s, s2) != 0.0) out << ' ' << s << ':' << s2 << ':' << e(s, s2);
        }
      }
      out << '\n';
    }
  }
}

TabularPomdp read_pomdp(std::istream& in) {
  std::string line, key;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] != '#') return std::istringstream(line);
    }
    throw ParseError("unexpected end of POMDP file", line_no);
  };
  auto ls = next_line();
  std::string version;
  ls >> key >> version;
  if (key != "pomdp" || version != "v1") throw ParseError("expected 'pomdp v1'", line_no);
  int sizes[3];
  const char* names[3] = {"states", "actions", "observations"};
  for (int i = 0; i < 3; ++i) {
    ls = next_line();
    if (!(ls >> key >> sizes[i]) || key != names[i]) throw ParseError(std::string("expected ") + names[i], line_no);
  }
  TabularPomdp m(sizes[0], sizes[1], sizes[2]);
  const int n = sizes[0];
  ls = next_line();
  ls >> key;
  if (key != "initial") throw ParseError("expected initial", line_no);
  for (int s = 0; s < n; ++s) {
    if (!(ls >> m.initial()(s))) throw ParseError("short initial distribution", line_no);
  }
  for (int i = 0; i < sizes[1] * n; ++i) {
    ls = next_line();
    int a = -1, s = -1;
    if (!(ls >> key >> a >> s) || key != "T" || a < 0 || a >= sizes[1] || s < 0 || s >= n) {
      throw ParseError("bad transition row", line_no);
    }
    for (int s2 = 0; s2 < n; ++s2) {
      if (!(ls >> m.transition(a)(s, s2))) throw ParseError("short transition row", line_no);
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream es(line);
    int a = -1, o = -1;
    if (!(es >> key >> a >> o) || key != "E" || a < 0 || a >= sizes[1] || o < 0 || o >= sizes[2]) {
      throw ParseError("bad emission row", line_no);
    }
    auto& e = m.emission_slot(a, o);
    std::string cell;
    while (es >> cell) {
      int s = -1, s2 = -1;
      double v = 0.0;
      char c1 = 0, c2 = 0;
      std::istringstream cs(cell);
      if (!(cs >> s >> c1 >> s2 >> c2 >> v) || c1 != ':' || c2 != ':' || s < 0 || s >= n || s2 < 0 || s2 >= n) {
        throw ParseError("bad emission entry '" + cell + "'", line_no);
      }
      e(s, s2) = v;
    }
  }
  m.validate(1e-9);
  return m;
}

}  // namespace ppm
