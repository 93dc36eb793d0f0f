#include "ppm/gallery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <tuple>

#include "ppm/errors.hpp"

namespace ppm::gallery {

namespace {

[[noreturn]] void malformed(const char* what) { throw MalformedHistoryError(std::string("gallery: ") + what); }

constexpr int kNeighbourBits = 8;

struct ResetTable {
  std::vector<double> mask_prob;  // zero for masks covering the crosshairs
  std::vector<int> free_cells;    // free cells other than the crosshairs
};

ResetTable make_reset_table(const Params& p) {
  const std::uint32_t n_masks = 1u << p.mask_bits();
  const int xblock = block_of(p, p.crosshair());
  ResetTable t;
  t.mask_prob.assign(n_masks, 0.0);
  t.free_cells.assign(n_masks, 0);
  for (std::uint32_t m = 0; m < n_masks; ++m) {
    if (m >> xblock & 1u) continue;
    const int k = std::popcount(m);
    t.mask_prob[m] = std::pow(p.block_probability, k) * std::pow(1.0 - p.block_probability, p.mask_bits() - 1 - k);
    t.free_cells[m] = p.cells() - 4 * k - 1;
  }
  return t;
}

}  // namespace

void Params::validate() const {
  if (size < 4 || size > 8 || size % 2 != 0) throw ConfigError("gallery size must be 4, 6 or 8");
  if (crosshair_row < 0 || crosshair_row >= size || crosshair_col < 0 || crosshair_col >= size) {
    throw ConfigError("gallery crosshairs outside the grid");
  }
  if (!(block_probability >= 0.0 && block_probability < 1.0)) {
    throw ConfigError("gallery block probability must lie in [0, 1)");
  }
}

int neighbour_bit(int dr, int dc) {
  const int k = (dr + 1) * 3 + (dc + 1);
  return k < 4 ? k : k - 1;
}

int block_of(const Params& p, int cell) {
  const int r = cell / p.size, c = cell % p.size;
  return (r / 2) * p.blocks_per_side() + c / 2;
}

bool cell_blocked(const Params& p, std::uint32_t mask, int cell) { return mask >> block_of(p, cell) & 1u; }

namespace {

bool blocked_at(const Params& p, std::uint32_t mask, int cell, int dr, int dc) {
  const int r = cell / p.size + dr, c = cell % p.size + dc;
  if (r < 0 || r >= p.size || c < 0 || c >= p.size) return true;
  return cell_blocked(p, mask, r * p.size + c);
}

}  // namespace

int neighbourhood(const Params& p, std::uint32_t mask, int cell) {
  int nb = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if ((dr != 0 || dc != 0) && blocked_at(p, mask, cell, dr, dc)) nb |= 1 << neighbour_bit(dr, dc);
    }
  }
  return nb;
}

Bounce resolve_bounce(const Params& p, std::uint32_t mask, int cell, int dir) {
  if (cell_blocked(p, mask, cell)) throw ConsistencyError("gallery: target inside an obstacle");
  return resolve_bounce(dir, [&](int dr, int dc) { return blocked_at(p, mask, cell, dr, dc); });
}

int encode_full(const Params& p, bool reset, int pos, std::uint32_t mask) {
  return static_cast<int>(((static_cast<std::uint32_t>(reset ? p.cells() : 0) + static_cast<std::uint32_t>(pos))
                           << p.mask_bits()) |
                          mask);
}

FullFrame decode_full(const Params& p, int code) {
  const std::uint32_t u = static_cast<std::uint32_t>(code);
  const int head = static_cast<int>(u >> p.mask_bits());
  return {head >= p.cells(), head % p.cells(), u & ((1u << p.mask_bits()) - 1u)};
}

int encode_abstract(const Params& p, bool reset, int pos, int nb) {
  return (((reset ? p.cells() : 0) + pos) << kNeighbourBits) | nb;
}

int abstract_of(const Params& p, int full_code) {
  const FullFrame f = decode_full(p, full_code);
  return encode_abstract(p, f.reset, f.pos, neighbourhood(p, f.mask, f.pos));
}

Alphabet full_alphabet(const Params& p) {
  return {SymbolSet({"watch", "shoot"}),
          SymbolSet::generated("g", static_cast<std::size_t>(2 * p.cells()) << p.mask_bits())};
}

Alphabet abstract_alphabet(const Params& p) {
  return {SymbolSet({"watch", "shoot"}),
          SymbolSet::generated("a", static_cast<std::size_t>(2 * p.cells()) << kNeighbourBits)};
}

std::vector<TestOfInterest> full_tests(const Params& p) {
  std::vector<int> accept;
  for (std::uint32_t m = 0; m < (1u << p.mask_bits()); ++m) accept.push_back(encode_full(p, false, p.crosshair(), m));
  return {TestOfInterest::single("watch_target", kWatch, std::move(accept))};
}

std::vector<TestOfInterest> abstract_tests(const Params& p) {
  std::vector<int> accept;
  for (int nb = 0; nb < (1 << kNeighbourBits); ++nb) accept.push_back(encode_abstract(p, false, p.crosshair(), nb));
  return {TestOfInterest::single("watch_target", kWatch, std::move(accept))};
}

State reset_state(const Params& p, Rng& rng) {
  State s;
  const int xblock = block_of(p, p.crosshair());
  do {
    s.mask = 0;
    for (int b = 0; b < p.mask_bits(); ++b) {
      if (uniform01(rng) < p.block_probability) s.mask |= 1u << b;
    }
  } while (s.mask >> xblock & 1u);
  std::vector<int> free;
  for (int c = 0; c < p.cells(); ++c) {
    if (c != p.crosshair() && !cell_blocked(p, s.mask, c)) free.push_back(c);
  }
  s.pos = free[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(free.size())))];
  s.dir = uniform_index(rng, 4);
  s.reset_pending = false;
  return s;
}

std::pair<State, StepResult> step(const Params& p, const State& s, int action, Rng& rng) {
  if (action != kWatch && action != kShoot) throw ConfigError("gallery: unknown action");
  State next = s;
  bool reset = s.reset_pending;
  if (!reset && uniform01(rng) < kResetChance) reset = true;
  if (reset) {
    next = reset_state(p, rng);
  } else if (uniform01(rng) >= kStick) {
    const Bounce b = resolve_bounce(p, s.mask, s.pos, s.dir);
    next.pos = s.pos + b.dr * p.size + b.dc;
    next.dir = b.dir;
  }
  StepResult r;
  r.observation = encode_full(p, reset, next.pos, next.mask);
  if (action == kShoot) {
    const bool hit = !reset && next.pos == p.crosshair();
    r.reward = hit ? kHitReward : kMissReward;
    next.reset_pending = hit;
  }
  return {next, r};
}

void Tracker::reset() {
  pending_ = true;
  pos_ = 0;
  nb_ = 0;
  mask_ = 0;
  w_ = {0.25, 0.25, 0.25, 0.25};
}

Bounce Tracker::bounce(int dir) const {
  return resolve_bounce(dir, [&](int dr, int dc) { return (nb_ >> neighbour_bit(dr, dc) & 1) != 0; });
}

void Tracker::observe(int action, int observation) {
  if (action != kWatch && action != kShoot) malformed("unknown action");
  int code = observation;
  if (full_) {
    const FullFrame f = decode_full(p_, observation);
    if (f.reset) {
      if (cell_blocked(p_, f.mask, p_.crosshair())) malformed("reset layout covers the crosshairs");
      mask_ = f.mask;
    } else if (pending_ || f.mask != mask_) {
      malformed("layout changed without a reset");
    }
    if (cell_blocked(p_, f.mask, f.pos)) malformed("target inside an obstacle");
    code = abstract_of(p_, observation);
  }
  const int head = code >> kNeighbourBits;
  const bool reset_frame = head >= p_.cells();
  const int pos = head % p_.cells();
  const int nb = code & ((1 << kNeighbourBits) - 1);

  if (reset_frame) {
    if (pos == p_.crosshair()) malformed("reset placed the target on the crosshairs");
    w_ = {0.25, 0.25, 0.25, 0.25};
  } else {
    if (pending_) malformed("expected a reset frame");
    std::array<double, 4> next{0.0, 0.0, 0.0, 0.0};
    for (int d = 0; d < 4; ++d) {
      if (w_[static_cast<std::size_t>(d)] <= 0.0) continue;
      const Bounce b = bounce(d);
      const int landed = pos_ + b.dr * p_.size + b.dc;
      if (pos == pos_) next[static_cast<std::size_t>(d)] += w_[static_cast<std::size_t>(d)] * kStick;
      if (landed == pos) next[static_cast<std::size_t>(b.dir)] += w_[static_cast<std::size_t>(d)] * kMove;
    }
    double total = next[0] + next[1] + next[2] + next[3];
    if (total <= 0.0) malformed("target position unreachable");
    for (double& x : next) x /= total;
    w_ = next;
  }
  pos_ = pos;
  nb_ = nb;
  pending_ = action == kShoot && !reset_frame && pos == p_.crosshair();
}

double Tracker::prediction() const {
  if (pending_) return 0.0;
  double move = 0.0;
  for (int d = 0; d < 4; ++d) {
    if (w_[static_cast<std::size_t>(d)] <= 0.0) continue;
    const Bounce b = bounce(d);
    if (pos_ + b.dr * p_.size + b.dc == p_.crosshair()) move += w_[static_cast<std::size_t>(d)];
  }
  const double stick = pos_ == p_.crosshair() ? 1.0 : 0.0;
  return (1.0 - kResetChance) * (kStick * stick + kMove * move);
}

Profile Tracker::profile() const { return {prediction()}; }

bool Tracker::uniform_over_support(double tol) const {
  double level = 0.0;
  for (double x : w_) {
    if (x <= tol) continue;
    if (level == 0.0) level = x;
    if (std::abs(x - level) > tol) return false;
  }
  return level > 0.0;
}

Oracle::Oracle(Params p) : p_(p), alphabet_(full_alphabet(p)) { p_.validate(); }

std::vector<ObservationProbability> Oracle::next_observation(const History& h, int action) const {
  if (action != kWatch && action != kShoot) throw ConfigError("gallery: unknown action");
  Tracker t(p_, true);
  for (const Step& s : h) t.observe(s.action, s.observation);

  std::vector<ObservationProbability> out;
  double reset_mass = 1.0;
  if (!t.reset_pending()) {
    reset_mass = kResetChance;
    std::map<int, double> moves;
    moves[t.pos()] += (1.0 - kResetChance) * kStick;
    for (int d = 0; d < 4; ++d) {
      const double w = t.weights()[static_cast<std::size_t>(d)];
      if (w <= 0.0) continue;
      const Bounce b = resolve_bounce(p_, t.mask(), t.pos(), d);
      moves[t.pos() + b.dr * p_.size + b.dc] += (1.0 - kResetChance) * kMove * w;
    }
    for (const auto& [pos, prob] : moves) out.push_back({encode_full(p_, false, pos, t.mask()), prob});
  }

  static thread_local std::map<std::tuple<int, int, int, double>, ResetTable> cache;
  const auto key = std::make_tuple(p_.size, p_.crosshair_row, p_.crosshair_col, p_.block_probability);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_reset_table(p_)).first;
  const ResetTable& table = it->second;
  for (int pos = 0; pos < p_.cells(); ++pos) {
    if (pos == p_.crosshair()) continue;
    for (std::uint32_t m = 0; m < table.mask_prob.size(); ++m) {
      const double pm = table.mask_prob[m];
      if (pm <= 0.0 || cell_blocked(p_, m, pos)) continue;
      out.push_back({encode_full(p_, true, pos, m), reset_mass * pm / table.free_cells[m]});
    }
  }
  return out;
}

Env::Env(Params p) : p_(p) {
  p_.validate();
  alphabet_ = full_alphabet(p_);
  tests_ = full_tests(p_);
}

StepResult Env::step(int action, Rng& rng) {
  auto [next, r] = gallery::step(p_, state_, action, rng);
  state_ = next;
  return r;
}

Abstraction Env::abstraction(const std::string& id) const {
  if (id != "local") return Environment::abstraction(id);
  const Params p = p_;
  return {"local", abstract_alphabet(p_), [p](int o) { return abstract_of(p, o); }, abstract_tests(p_)};
}

int Env::expert_action(const ProfileTracker& tracker) const {
  return tracker.profile().at(0) > 1.0 / 3.0 ? kShoot : kWatch;
}

}  // namespace ppm::gallery
