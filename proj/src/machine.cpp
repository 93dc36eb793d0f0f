#include "ppm/machine.hpp"

#include <array>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

DeterministicMachine::DeterministicMachine(SymbolSet inputs, SymbolSet outputs, std::vector<std::string> state_names,
                                           std::vector<int> labels, int start,
                                           const std::vector<Transition>& transitions)
    : alphabet_{std::move(inputs), std::move(outputs)}, state_names_(std::move(state_names)),
      labels_(std::move(labels)), start_(start) {
  const int n = state_count();
  const int k = static_cast<int>(alphabet_.actions.size());
  if (n == 0) throw ConfigError("machine needs at least one state");
  if (state_names_.size() != labels_.size()) throw ConfigError("machine state names and labels differ in count");
  if (start_ < 0 || start_ >= n) throw ConfigError("machine start state out of range");
  for (int l : labels_) {
    if (!alphabet_.observations.contains(l)) throw ConfigError("machine state label out of range");
  }
  delta_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(k), -1);
  for (const auto& t : transitions) {
    if (t.from < 0 || t.from >= n || t.to < 0 || t.to >= n || t.input < 0 || t.input >= k) {
      throw ConfigError("machine transition out of range");
    }
    int& slot = delta_[static_cast<std::size_t>(t.from * k + t.input)];
    if (slot >= 0 && slot != t.to) {
      throw PreconditionError("non-deterministic transition at state '" + state_name(t.from) + "' on input '" +
                              alphabet_.actions.name(t.input) + "'");
    }
    slot = t.to;
  }
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < k; ++a) {
      int& slot = delta_[static_cast<std::size_t>(s * k + a)];
      if (slot < 0) slot = s;
    }
  }
}

int DeterministicMachine::next(int state, int input) const {
  return delta_[static_cast<std::size_t>(state) * alphabet_.actions.size() + static_cast<std::size_t>(input)];
}

int DeterministicMachine::run(const History& h) const {
  int s = start_;
  for (const Step& st : h) {
    if (!alphabet_.actions.contains(st.action)) throw MalformedHistoryError("machine: unknown input");
    s = next(s, st.action);
    if (label(s) != st.observation) throw MalformedHistoryError("machine: output does not match the state label");
  }
  return s;
}

std::vector<ObservationProbability> DeterministicMachine::next_observation(const History& h, int action) const {
  if (!alphabet_.actions.contains(action)) throw ConfigError("machine: unknown input");
  return {{label(next(run(h), action)), 1.0}};
}

std::vector<History> DeterministicMachine::access_histories() const {
  std::vector<History> out(static_cast<std::size_t>(state_count()));
  std::vector<bool> seen(static_cast<std::size_t>(state_count()), false);
  std::deque<int> queue{start_};
  seen[static_cast<std::size_t>(start_)] = true;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < static_cast<int>(alphabet_.actions.size()); ++a) {
      const int t = next(s, a);
      if (seen[static_cast<std::size_t>(t)]) continue;
      seen[static_cast<std::size_t>(t)] = true;
      out[static_cast<std::size_t>(t)] = out[static_cast<std::size_t>(s)];
      out[static_cast<std::size_t>(t)].push_back({a, label(t)});
      queue.push_back(t);
    }
  }
  return out;
}

std::vector<bool> DeterministicMachine::reachable() const {
  std::vector<bool> seen(static_cast<std::size_t>(state_count()), false);
  std::deque<int> queue{start_};
  seen[static_cast<std::size_t>(start_)] = true;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < static_cast<int>(alphabet_.actions.size()); ++a) {
      const int t = next(s, a);
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        queue.push_back(t);
      }
    }
  }
  return seen;
}

namespace {

std::vector<std::string> rest_of(std::istringstream& ls) {
  std::vector<std::string> out;
  std::string w;
  while (ls >> w) out.push_back(w);
  return out;
}

}  // namespace

DeterministicMachine read_machine(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<std::string> inputs, outputs, state_names, label_names;
  std::string start_name;
  std::vector<std::array<std::string, 3>> edges;
  std::vector<std::size_t> edge_lines;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!header) {
      std::string version;
      ls >> version;
      if (key != "machine" || version != "v1") throw ParseError("expected 'machine v1'", line_no);
      header = true;
      continue;
    }
    auto words = rest_of(ls);
    if (key == "inputs") {
      inputs = words;
    } else if (key == "outputs") {
      outputs = words;
    } else if (key == "state") {
      if (words.size() != 2) throw ParseError("state needs a name and an output", line_no);
      state_names.push_back(words[0]);
      label_names.push_back(words[1]);
    } else if (key == "start") {
      if (words.size() != 1) throw ParseError("start needs one state name", line_no);
      start_name = words[0];
    } else if (key == "edge") {
      if (words.size() != 3) throw ParseError("edge needs from, input, to", line_no);
      edges.push_back({words[0], words[1], words[2]});
      edge_lines.push_back(line_no);
    } else {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
  }
  if (!header) throw ParseError("empty machine file", line_no);
  SymbolSet in_set(inputs), out_set(outputs);
  std::map<std::string, int> state_index;
  std::vector<int> labels;
  for (std::size_t i = 0; i < state_names.size(); ++i) {
    if (!state_index.emplace(state_names[i], static_cast<int>(i)).second) {
      throw ConfigError("duplicate machine state '" + state_names[i] + "'");
    }
    labels.push_back(out_set.index(label_names[i]));
  }
  auto lookup = [&](const std::string& name, std::size_t ln) {
    auto it = state_index.find(name);
    if (it == state_index.end()) throw ParseError("unknown state '" + name + "'", ln);
    return it->second;
  };
  std::vector<DeterministicMachine::Transition> ts;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const int input = in_set.find(edges[i][1]);
    if (input < 0) throw ParseError("unknown input '" + edges[i][1] + "'", edge_lines[i]);
    ts.push_back({lookup(edges[i][0], edge_lines[i]), input, lookup(edges[i][2], edge_lines[i])});
  }
  const int start = start_name.empty() ? 0 : lookup(start_name, line_no);
  return DeterministicMachine(std::move(in_set), std::move(out_set), state_names, labels, start, ts);
}

void write_machine(std::ostream& out, const DeterministicMachine& m) {
  const Alphabet& a = m.alphabet();
  out << "machine v1\ninputs";
  for (std::size_t i = 0; i < a.actions.size(); ++i) out << ' ' << a.actions.name(static_cast<int>(i));
  out << "\noutputs";
  for (std::size_t i = 0; i < a.observations.size(); ++i) out << ' ' << a.observations.name(static_cast<int>(i));
  out << '\n';
  for (int s = 0; s < m.state_count(); ++s) out << "state " << m.state_name(s) << ' ' << a.observations.name(m.label(s)) << '\n';
  out << "start " << m.state_name(m.start()) << '\n';
  for (int s = 0; s < m.state_count(); ++s) {
    for (int i = 0; i < static_cast<int>(a.actions.size()); ++i) {
      if (m.next(s, i) != s) {
        out << "edge " << m.state_name(s) << ' ' << a.actions.name(i) << ' ' << m.state_name(m.next(s, i)) << '\n';
      }
    }
  }
}

DeterministicMachine load_machine(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PrerequisiteError("cannot open machine file '" + path + "'");
  return read_machine(in);
}

}  // namespace ppm
