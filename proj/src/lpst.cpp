#include "ppm/lpst.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "ppm/errors.hpp"

namespace ppm {

Lpst::Lpst(const std::vector<PpTrajectory>& data, const PpAlphabet& alphabet, int n_profiles, int max_depth)
    : n_profiles_(n_profiles), max_depth_(max_depth) {
  if (n_profiles < 1) throw DataError("LPST needs a non-empty profile set");
  if (max_depth < 0) throw ConfigError("LPST depth must be non-negative");
  const auto seqs = pp_sequences(data, alphabet);
  if (seqs.empty()) throw DataError("no PP trajectories to build an LPST from");

  std::vector<std::vector<Occurrence>> by_action(static_cast<std::size_t>(alphabet.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t p = 0; p < seqs[i].size(); ++p) {
      by_action[static_cast<std::size_t>(seqs[i][p].action)].push_back({i, p});
    }
  }
  roots_.assign(by_action.size(), -1);
  for (std::size_t x = 0; x < by_action.size(); ++x) {
    if (by_action[x].empty()) continue;
    roots_[x] = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    for (const auto& o : by_action[x]) ++nodes_.back().followers[seqs[o.seq][o.pos].observation];
    grow(roots_[x], seqs, by_action[x]);
  }
  for (int r : roots_) {
    if (r < 0) continue;
    std::vector<int> path;
    add_loops(r, path);
  }

  // Renumber the reachable nodes in preorder.
  std::vector<int> remap(nodes_.size(), -1);
  std::vector<int> order;
  std::function<void(int)> visit = [&](int n) {
    remap[static_cast<std::size_t>(n)] = static_cast<int>(order.size());
    order.push_back(n);
    for (const auto& [e, c] : nodes_[static_cast<std::size_t>(n)].children) visit(c);
  };
  for (int r : roots_) {
    if (r >= 0) visit(r);
  }
  std::vector<Node> compact;
  compact.reserve(order.size());
  for (int n : order) {
    Node node = nodes_[static_cast<std::size_t>(n)];
    for (auto& [e, c] : node.children) c = remap[static_cast<std::size_t>(c)];
    if (node.loop >= 0) node.loop = remap[static_cast<std::size_t>(node.loop)];
    compact.push_back(std::move(node));
  }
  for (int& r : roots_) {
    if (r >= 0) r = remap[static_cast<std::size_t>(r)];
  }
  nodes_ = std::move(compact);
}

void Lpst::grow(int node, const std::vector<History>& seqs, const std::vector<Occurrence>& occ) {
  const int d = nodes_[static_cast<std::size_t>(node)].depth;
  if (nodes_[static_cast<std::size_t>(node)].unique() || d >= max_depth_) return;
  std::map<int, std::vector<Occurrence>> split;
  for (const auto& o : occ) {
    const std::size_t back = static_cast<std::size_t>(d) / 2 + 1;
    if (o.pos < back) continue;  // context exhausted
    const Step& older = seqs[o.seq][o.pos - back];
    split[d % 2 == 0 ? profile_symbol(older.observation) : action_symbol(older.action)].push_back(o);
  }
  for (const auto& [e, part] : split) {
    const int child = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_.back().depth = d + 1;
    for (const auto& o : part) ++nodes_.back().followers[seqs[o.seq][o.pos].observation];
    nodes_[static_cast<std::size_t>(node)].children[e] = child;
    grow(child, seqs, part);
  }
}

bool Lpst::same_behaviour(int u, int v) const {
  while (nodes_[static_cast<std::size_t>(v)].loop >= 0) v = nodes_[static_cast<std::size_t>(v)].loop;
  const Node& a = nodes_[static_cast<std::size_t>(u)];
  const Node& b = nodes_[static_cast<std::size_t>(v)];
  if (a.followers.size() != b.followers.size() || a.children.size() != b.children.size()) return false;
  for (auto i = a.followers.begin(), j = b.followers.begin(); i != a.followers.end(); ++i, ++j) {
    if (i->first != j->first) return false;
  }
  for (auto i = a.children.begin(), j = b.children.begin(); i != a.children.end(); ++i, ++j) {
    if (i->first != j->first || !same_behaviour(i->second, j->second)) return false;
  }
  return true;
}

void Lpst::add_loops(int node, std::vector<int>& path) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (!n.children.empty()) {
    for (int v : path) {
      if (same_behaviour(node, v)) {
        nodes_[static_cast<std::size_t>(node)].loop = v;
        nodes_[static_cast<std::size_t>(node)].children.clear();
        return;
      }
    }
  }
  path.push_back(node);
  std::vector<int> kids;
  for (const auto& [e, c] : nodes_[static_cast<std::size_t>(node)].children) kids.push_back(c);
  for (int c : kids) add_loops(c, path);
  path.pop_back();
}

Lpst::Lookup Lpst::lookup(const std::deque<int>& context, int pp_action) const {
  Lookup r;
  const int root = pp_action >= 0 && static_cast<std::size_t>(pp_action) < roots_.size()
                       ? roots_[static_cast<std::size_t>(pp_action)]
                       : -1;
  if (root < 0) {
    r.unknown_action = true;
    for (int i = 0; i < n_profiles_; ++i) r.members.push_back(i);
    return r;
  }
  int node = root;
  for (std::size_t k = 0;; ++k) {
    while (nodes_[static_cast<std::size_t>(node)].loop >= 0) node = nodes_[static_cast<std::size_t>(node)].loop;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    if (!n.unique() && !n.children.empty()) {
      auto it = k < context.size() ? n.children.find(context[k]) : n.children.end();
      if (it != n.children.end()) {
        node = it->second;
        continue;
      }
      r.fallback = true;
    }
    for (const auto& [p, c] : n.followers) r.members.push_back(p);
    return r;
  }
}

int Lpst::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t Lpst::loop_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.loop >= 0; }));
}

void Lpst::write(std::ostream& out) const {
  out << "lpst v1\nprofiles " << n_profiles_ << "\nmax_depth " << max_depth_ << "\nnodes " << nodes_.size()
      << "\nroots";
  for (int r : roots_) out << ' ' << r;
  out << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    out << std::string(static_cast<std::size_t>(2 * n.depth), ' ') << "node " << i << " depth " << n.depth << " loop "
        << n.loop << " followers";
    for (const auto& [p, c] : n.followers) out << ' ' << p << ':' << c;
    out << " children";
    for (const auto& [e, c] : n.children) out << ' ' << e << ':' << c;
    out << '\n';
  }
}

Lpst Lpst::read(std::istream& in) {
  Lpst t;
  std::string line, key;
  std::size_t line_no = 0;
  auto next = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') return std::istringstream(line);
    }
    throw ParseError("unexpected end of LPST file", line_no);
  };
  auto ls = next();
  std::string version;
  ls >> key >> version;
  if (key != "lpst" || version != "v1") throw ParseError("expected 'lpst v1'", line_no);
  std::size_t n_nodes = 0;
  ls = next();
  if (!(ls >> key >> t.n_profiles_) || key != "profiles") throw ParseError("expected profiles", line_no);
  ls = next();
  if (!(ls >> key >> t.max_depth_) || key != "max_depth") throw ParseError("expected max_depth", line_no);
  ls = next();
  if (!(ls >> key >> n_nodes) || key != "nodes") throw ParseError("expected nodes", line_no);
  ls = next();
  ls >> key;
  if (key != "roots") throw ParseError("expected roots", line_no);
  int r = 0;
  while (ls >> r) t.roots_.push_back(r);
  auto pair_of = [&](const std::string& tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ParseError("expected a:b, got '" + tok + "'", line_no);
    try {
      return std::make_pair(std::stoll(tok.substr(0, colon)), std::stoll(tok.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ParseError("bad pair '" + tok + "'", line_no);
    }
  };
  for (std::size_t i = 0; i < n_nodes; ++i) {
    ls = next();
    Node n;
    std::size_t id = 0;
    std::string k_depth, k_loop, k_followers;
    if (!(ls >> key >> id >> k_depth >> n.depth >> k_loop >> n.loop >> k_followers) || key != "node" || id != i ||
        k_followers != "followers") {
      throw ParseError("bad LPST node line", line_no);
    }
    std::string tok;
    bool in_children = false;
    while (ls >> tok) {
      if (tok == "children") {
        in_children = true;
        continue;
      }
      const auto [a, b] = pair_of(tok);
      if (in_children) {
        if (b < 0 || static_cast<std::size_t>(b) >= n_nodes) throw ParseError("child index out of range", line_no);
        n.children[static_cast<int>(a)] = static_cast<int>(b);
      } else {
        n.followers[static_cast<int>(a)] = b;
      }
    }
    if (n.followers.empty()) throw ParseError("LPST node without followers", line_no);
    t.nodes_.push_back(std::move(n));
  }
  for (int root : t.roots_) {
    if (root >= static_cast<int>(n_nodes)) throw ParseError("LPST root out of range", line_no);
  }
  return t;
}

LpstRuntime::LpstRuntime(const Lpst& tree, const PpAlphabet& alphabet, const ProfileSet& profiles, std::uint64_t seed)
    : tree_(&tree), alphabet_(&alphabet), profiles_(&profiles), rng_(seed) {
  if (tree.n_profiles() != static_cast<int>(profiles.size())) throw ConfigError("LPST built for another profile set");
  reset();
}

void LpstRuntime::step(int pp_action) {
  const Lpst::Lookup l = tree_->lookup(context_, pp_action);
  if (l.fallback) ++fallbacks_;
  current_ = mean_profile(*profiles_, l.members);
  index_ = l.members.size() == 1
               ? l.members.front()
               : l.members[static_cast<std::size_t>(uniform_index(rng_, static_cast<int>(l.members.size())))];
  context_.push_front(tree_->action_symbol(pp_action));
  context_.push_front(tree_->profile_symbol(index_));
  const std::size_t cap = tree_->loop_count() > 0 ? 4096 : static_cast<std::size_t>(tree_->max_depth()) + 2;
  while (context_.size() > cap) context_.pop_back();
}

void LpstRuntime::reset() {
  context_.clear();
  step(PpAlphabet::kStart);
}

void LpstRuntime::observe(Step pp_action) {
  const int x = alphabet_->index(pp_action);
  if (x >= 0) {
    step(x);
    return;
  }
  ++unknown_;
  context_.clear();
  std::vector<int> all(profiles_->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  current_ = mean_profile(*profiles_, all);
  index_ = all.size() == 1 ? 0 : uniform_index(rng_, static_cast<int>(all.size()));
}

}  // namespace ppm
