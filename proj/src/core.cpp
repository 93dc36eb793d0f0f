#include "ppm/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

std::size_t HistoryHash::operator()(const History& h) const noexcept {
  std::uint64_t x = 0xcbf29ce484222325ULL;
  for (const Step& s : h) {
    x ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.action)) << 32 |
         static_cast<std::uint32_t>(s.observation);
    x *= 0x100000001b3ULL;
    x ^= x >> 29;
  }
  return static_cast<std::size_t>(x);
}

bool TestStep::accepts(int observation) const {
  return std::binary_search(accept.begin(), accept.end(), observation);
}

TestOfInterest TestOfInterest::single(std::string name, int action, std::vector<int> accept) {
  std::sort(accept.begin(), accept.end());
  accept.erase(std::unique(accept.begin(), accept.end()), accept.end());
  return TestOfInterest{std::move(name), {TestStep{action, std::move(accept)}}};
}

void TestOfInterest::validate(const Alphabet& alphabet) const {
  if (steps.empty()) throw ConfigError("test '" + name + "' has no steps");
  for (const auto& s : steps) {
    if (!alphabet.actions.contains(s.action)) throw ConfigError("test '" + name + "' uses an unknown action");
    if (s.accept.empty()) throw ConfigError("test '" + name + "' has an empty observation predicate");
    if (!std::is_sorted(s.accept.begin(), s.accept.end()) ||
        std::adjacent_find(s.accept.begin(), s.accept.end()) != s.accept.end()) {
      throw ConfigError("test '" + name + "' predicate must be sorted and unique");
    }
    if (!alphabet.observations.contains(s.accept.front()) || !alphabet.observations.contains(s.accept.back())) {
      throw ConfigError("test '" + name + "' predicate references an unknown observation");
    }
  }
}

void validate_history(const History& h, const Alphabet& alphabet) {
  for (const Step& s : h) {
    if (!alphabet.actions.contains(s.action) || !alphabet.observations.contains(s.observation)) {
      throw ConfigError("history symbol outside the oracle alphabet");
    }
  }
}

namespace {

double predict_from(const GenerativeOracle& oracle, History& h, const TestOfInterest& t, std::size_t step) {
  if (step == t.steps.size()) return 1.0;
  const TestStep& ts = t.steps[step];
  const auto dist = oracle.next_observation(h, ts.action);
  double total = 0.0;
  for (const auto& op : dist) {
    if (op.probability < 0.0) throw ConsistencyError("oracle returned a negative probability");
    total += op.probability;
  }
  if (std::abs(total - 1.0) > 1e-12 + 4e-16 * static_cast<double>(dist.size())) {
    throw ConsistencyError("oracle next-observation distribution sums to " + std::to_string(total));
  }
  // Both ranges are sorted; walk them together.
  double p = 0.0;
  auto it = dist.begin();
  for (int o : ts.accept) {
    it = std::lower_bound(it, dist.end(), o,
                          [](const ObservationProbability& a, int v) { return a.observation < v; });
    if (it == dist.end()) break;
    if (it->observation != o || it->probability <= 0.0) continue;
    double rest = 1.0;
    if (step + 1 < t.steps.size()) {
      h.push_back({ts.action, o});
      rest = predict_from(oracle, h, t, step + 1);
      h.pop_back();
    }
    p += it->probability * rest;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double predict_test(const GenerativeOracle& oracle, const History& h, const TestOfInterest& t) {
  validate_history(h, oracle.alphabet());
  if (t.steps.empty()) return 1.0;
  t.validate(oracle.alphabet());
  History work = h;
  return predict_from(oracle, work, t, 0);
}

Profile phi(const GenerativeOracle& oracle, const History& h, const std::vector<TestOfInterest>& tests) {
  Profile out;
  out.reserve(tests.size());
  for (const auto& t : tests) out.push_back(predict_test(oracle, h, t));
  return out;
}

TestOutcome test_outcome(const History& steps, std::size_t offset, const TestOfInterest& t) {
  if (offset + t.steps.size() > steps.size()) return TestOutcome::not_applicable;
  bool ok = true;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const Step& s = steps[offset + k];
    if (s.action != t.steps[k].action) return TestOutcome::not_applicable;
    if (ok && !t.steps[k].accepts(s.observation)) ok = false;
  }
  return ok ? TestOutcome::success : TestOutcome::failure;
}

std::string format_history(const History& h, const Alphabet& alphabet) {
  std::string out;
  for (const Step& s : h) {
    if (!out.empty()) out += ' ';
    out += alphabet.actions.name(s.action);
    out += ' ';
    out += alphabet.observations.name(s.observation);
  }
  return out;
}

History parse_history(const std::string& text, const Alphabet& alphabet) {
  std::istringstream in(text);
  History h;
  std::string a, o;
  while (in >> a) {
    if (!(in >> o)) throw DataError("history has an action without an observation");
    h.push_back({alphabet.actions.index(a), alphabet.observations.index(o)});
  }
  return h;
}

std::vector<Trajectory> read_trajectories(std::istream& in, const Alphabet& alphabet) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Trajectory t;
    std::string seed_text;
    if (!(ls >> t.env_id >> seed_text)) throw ParseError("expected 'envId seed' header", line_no);
    try {
      std::size_t used = 0;
      t.seed = std::stoull(seed_text, &used);
      if (used != seed_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad seed '" + seed_text + "'", line_no);
    }
    std::string a, o;
    while (ls >> a) {
      if (!(ls >> o)) throw ParseError("action '" + a + "' has no observation", line_no);
      int ai = alphabet.actions.find(a);
      if (ai < 0) throw ParseError("unknown action '" + a + "'", line_no);
      int oi = alphabet.observations.find(o);
      if (oi < 0) throw ParseError("unknown observation '" + o + "'", line_no);
      t.steps.push_back({ai, oi});
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& data, const Alphabet& alphabet) {
  for (const auto& t : data) {
    out << t.env_id << ' ' << t.seed;
    for (const Step& s : t.steps) {
      out << ' ' << alphabet.actions.name(s.action) << ' ' << alphabet.observations.name(s.observation);
    }
    out << '\n';
  }
}

int uniform_index(Rng& rng, int n) {
  if (n <= 0) throw ConfigError("uniform_index needs a positive range");
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - Rng::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<int>(x % range);
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& stage, std::uint64_t trial) {
  // FNV-1a over the stage name, then splitmix64 finalisation.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = master ^ (h + 0x9e3779b97f4a7c15ULL * (trial + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ppm
