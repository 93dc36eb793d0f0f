#include "ppm/ball_bounce.hpp"

#include "ppm/errors.hpp"

namespace ppm::bb {

void Params::validate() const {
  if (length < 3) throw ConfigError("ball bounce needs at least 3 pixels");
  if (target < 1 || target > length - 2) throw ConfigError("ball bounce target must satisfy 1 <= x <= k-2");
}

State advance(const Params& p, State s) {
  if (s.pos + s.dir < 0 || s.pos + s.dir >= p.length) s.dir = -s.dir;
  s.pos += s.dir;
  return s;
}

Alphabet full_alphabet(const Params& p) {
  return {SymbolSet({"step"}), SymbolSet::generated("b", static_cast<std::size_t>(p.length))};
}

Alphabet window_alphabet() { return {SymbolSet({"step"}), SymbolSet::generated("w", 8)}; }

int window_of(const Params& p, int pos) {
  const int off = pos - p.target + 1;
  return off >= 0 && off <= 2 ? 1 << off : 0;
}

std::vector<TestOfInterest> full_tests(const Params& p) {
  return {TestOfInterest::single("step_x", kStep, {p.target})};
}

std::vector<TestOfInterest> window_tests() { return {TestOfInterest::single("step_x", kStep, {2})}; }

void Tracker::observe(int action, int observation) {
  if (action != kStep) throw MalformedHistoryError("ball bounce: unknown action");
  const State next = advance(p_, s_);
  if (observation != next.pos) throw MalformedHistoryError("ball bounce: observation off the deterministic walk");
  s_ = next;
}

Profile Tracker::profile() const { return {advance(p_, s_).pos == p_.target ? 1.0 : 0.0}; }

Oracle::Oracle(Params p) : p_(p), alphabet_(full_alphabet(p)) { p_.validate(); }

std::vector<ObservationProbability> Oracle::next_observation(const History& h, int action) const {
  if (action != kStep) throw ConfigError("ball bounce: unknown action");
  Tracker t(p_);
  for (const Step& s : h) t.observe(s.action, s.observation);
  return {{advance(p_, t.state()).pos, 1.0}};
}

Env::Env(Params p) : p_(p) {
  p_.validate();
  alphabet_ = full_alphabet(p_);
  tests_ = full_tests(p_);
}

StepResult Env::step(int action, Rng&) {
  if (action != kStep) throw ConfigError("ball bounce: unknown action");
  state_ = advance(p_, state_);
  return {state_.pos, 0.0};
}

Abstraction Env::abstraction(const std::string& id) const {
  if (id != "window") return Environment::abstraction(id);
  const Params p = p_;
  return {"window", window_alphabet(), [p](int o) { return window_of(p, o); }, window_tests()};
}

}  // namespace ppm::bb
