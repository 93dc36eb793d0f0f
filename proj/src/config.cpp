#include "ppm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

template <class T>
Key int_key(T ExperimentConfig::*f) {
  return {[f](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*f = static_cast<T>(to_int(k, v)); },
          [f](const ExperimentConfig& c) { return std::to_string(c.*f); }};
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> k = [] {
    std::map<std::string, Key> m;
    m["env"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.env.id = v; },
                [](const ExperimentConfig& c) { return c.env.id; }};
    auto env_int = [](int EnvironmentParams::*f) -> Key {
      return {[f](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.env.*f = static_cast<int>(to_int(k, v));
              },
              [f](const ExperimentConfig& c) { return std::to_string(c.env.*f); }};
    };
    m["bb_length"] = env_int(&EnvironmentParams::bb_length);
    m["bb_target"] = env_int(&EnvironmentParams::bb_target);
    m["gallery_size"] = env_int(&EnvironmentParams::gallery_size);
    m["crosshair_row"] = env_int(&EnvironmentParams::crosshair_row);
    m["crosshair_col"] = env_int(&EnvironmentParams::crosshair_col);
    m["block_probability"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.env.block_probability = to_double(k, v); },
        [](const ExperimentConfig& c) { return fmt(c.env.block_probability); }};
    m["episode_length"] = int_key(&ExperimentConfig::episode_length);
    m["episodes"] = int_key(&ExperimentConfig::episodes);
    m["abstraction"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.abstraction = v; },
                        [](const ExperimentConfig& c) { return c.abstraction; }};
    m["alpha"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.alpha = to_double(k, v); },
                  [](const ExperimentConfig& c) { return fmt(c.alpha); }};
    m["min_trials"] = int_key(&ExperimentConfig::min_trials);
    m["max_search_len"] = int_key(&ExperimentConfig::max_search_len);
    m["strategy"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.strategy = parse_strategy(v); },
                     [](const ExperimentConfig& c) { return strategy_name(c.strategy); }};
    m["pp_model"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.pp_model = v; },
                     [](const ExperimentConfig& c) { return c.pp_model; }};
    m["pp_states"] = int_key(&ExperimentConfig::pp_states);
    m["lpst_depth"] = int_key(&ExperimentConfig::lpst_depth);
    m["flat_states"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.flat.states = static_cast<int>(to_int(k, v));
                        },
                        [](const ExperimentConfig& c) { return std::to_string(c.flat.states); }};
    m["flat_iters"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                         c.flat.max_iters = static_cast<int>(to_int(k, v));
                       },
                       [](const ExperimentConfig& c) { return std::to_string(c.flat.max_iters); }};
    m["restarts"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                       c.flat.restarts = static_cast<int>(to_int(k, v));
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.flat.restarts); }};
    m["em_tolerance"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.flat.tolerance = to_double(k, v); },
        [](const ExperimentConfig& c) { return fmt(c.flat.tolerance); }};
    m["eta"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.olgarb.learning_rate = to_double(k, v);
                },
                [](const ExperimentConfig& c) { return fmt(c.olgarb.learning_rate); }};
    m["beta"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.olgarb.discount = to_double(k, v); },
                 [](const ExperimentConfig& c) { return fmt(c.olgarb.discount); }};
    m["kappa"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                    c.olgarb.baseline_step = to_double(k, v);
                  },
                  [](const ExperimentConfig& c) { return fmt(c.olgarb.baseline_step); }};
    m["eval_steps"] = int_key(&ExperimentConfig::eval_steps);
    m["trials"] = int_key(&ExperimentConfig::trials);
    m["seed"] = int_key(&ExperimentConfig::seed);
    m["sources"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.sources = split_list(v); },
                    [](const ExperimentConfig& c) {
                      std::string s;
                      for (const auto& x : c.sources) s += (s.empty() ? "" : ",") + x;
                      return s;
                    }};
    m["machine"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.machine = v; },
                    [](const ExperimentConfig& c) { return c.machine; }};
    m["sdm_history_len"] = int_key(&ExperimentConfig::sdm_history_len);
    m["sdm_test_len"] = int_key(&ExperimentConfig::sdm_test_len);
    return m;
  }();
  return k;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, key] : keys()) out += k + "=" + key.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

void ExperimentConfig::validate() const {
  require(env.id == "tcm" || env.id == "gallery" || env.id == "ballbounce", "unknown env '" + env.id + "'");
  require(episode_length >= 1, "episode_length must be at least 1");
  require(episodes >= 1, "episodes must be at least 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(min_trials >= 0, "min_trials must be non-negative");
  require(max_search_len >= 1, "max_search_len must be at least 1");
  require(pp_model == "lpst" || pp_model == "pomdp", "pp_model must be lpst or pomdp");
  require(pp_states >= 0, "pp_states must be non-negative");
  require(lpst_depth >= 0, "lpst_depth must be non-negative");
  require(flat.states >= 1, "flat_states must be at least 1");
  require(flat.max_iters >= 1, "flat_iters must be at least 1");
  require(flat.restarts >= 1, "restarts must be at least 1");
  require(flat.tolerance >= 0.0, "em_tolerance must be non-negative");
  require(olgarb.learning_rate > 0.0, "eta must be positive");
  require(olgarb.discount >= 0.0 && olgarb.discount < 1.0, "beta must lie in [0, 1)");
  require(olgarb.baseline_step > 0.0 && olgarb.baseline_step <= 1.0, "kappa must lie in (0, 1]");
  require(eval_steps >= 1, "eval_steps must be at least 1");
  require(trials >= 1, "trials must be at least 1");
  require(!sources.empty(), "sources must not be empty");
  for (const auto& s : sources) {
    require(s == "oracle" || s == "pp" || s == "flat" || s == "som" || s == "expert", "unknown source '" + s + "'");
  }
  require(sdm_history_len >= 0 && sdm_test_len >= 1, "bad SDM lengths");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    const auto it = keys().find(k);
    if (it == keys().end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + k + "'");
    if (!seen.insert(k).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + k + "'");
    it->second.set(c, k, v);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace ppm
