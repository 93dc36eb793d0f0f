#include "ppm/tcm.hpp"

#include <algorithm>

#include "ppm/errors.hpp"

namespace ppm::tcm {

namespace {

constexpr std::array<std::array<int, 2>, 3> kPairs{{{1, 2}, {1, 3}, {2, 3}}};

int flip_card(int action) { return action - kFlip1 + 1; }

int reveal(int card, int ace) { return card == ace ? kAce : kNotAce; }

[[noreturn]] void malformed(const char* what) { throw MalformedHistoryError(std::string("three card monte: ") + what); }

}  // namespace

const Alphabet& alphabet() {
  static const Alphabet a{
      SymbolSet({"watch", "flip1", "flip2", "flip3"}),
      SymbolSet({"pos1", "pos2", "pos3", "swap12", "swap13", "swap23", "guess", "ace", "notace", "ended"})};
  return a;
}

const std::vector<TestOfInterest>& tests() {
  static const std::vector<TestOfInterest> t{
      TestOfInterest::single("flip1_ace", kFlip1, {kAce, kPos1}),
      TestOfInterest::single("flip2_ace", kFlip2, {kAce, kPos2}),
      TestOfInterest::single("flip3_ace", kFlip3, {kAce, kPos3}),
  };
  return t;
}

int apply_swap(int ace, int pair) {
  const auto& p = kPairs[static_cast<std::size_t>(pair)];
  if (ace == p[0]) return p[1];
  if (ace == p[1]) return p[0];
  return ace;
}

DealerOdds dealer_odds(const std::array<int, 3>& counts) {
  DealerOdds odds;
  const int least = *std::min_element(counts.begin(), counts.end());
  const int n_least = static_cast<int>(std::count(counts.begin(), counts.end(), least));
  for (std::size_t i = 0; i < 3; ++i) {
    if (n_least == 3) {
      odds.swap[i] = 0.9 / 3.0;
    } else if (counts[i] == least) {
      odds.swap[i] = 0.5 / n_least;
    } else {
      odds.swap[i] = 0.4 / (3 - n_least);
    }
  }
  return odds;
}

std::pair<State, StepResult> step(const State& s, int action, Rng& rng) {
  if (action < 0 || action >= kActionCount) throw ConfigError("three card monte: unknown action");
  State next = s;
  StepResult r;
  switch (s.phase) {
    case Phase::dealing:
      r.observation = kPos1 + s.ace - 1;
      next.phase = Phase::mixing;
      break;
    case Phase::mixing:
      if (action == kWatch) {
        const DealerOdds odds = dealer_odds(s.swap_counts);
        double u = uniform01(rng);
        int chosen = -1;
        for (int i = 0; i < 3; ++i) {
          if (u < odds.swap[static_cast<std::size_t>(i)]) {
            chosen = i;
            break;
          }
          u -= odds.swap[static_cast<std::size_t>(i)];
        }
        if (chosen < 0) {
          r.observation = kGuess;
          next.phase = Phase::guess_prompted;
        } else {
          r.observation = kSwap12 + chosen;
          next.ace = apply_swap(s.ace, chosen);
          ++next.swap_counts[static_cast<std::size_t>(chosen)];
        }
      } else {
        r.observation = reveal(flip_card(action), s.ace);
        r.reward = -1.0;
      }
      break;
    case Phase::guess_prompted:
      if (action == kWatch) {
        r.observation = kEnded;
        r.reward = -1.0;
      } else {
        r.observation = reveal(flip_card(action), s.ace);
        r.reward = flip_card(action) == s.ace ? 1.0 : -1.0;
      }
      next = State{};
      break;
  }
  return {next, r};
}

State replay(const History& h) {
  State s;
  for (const Step& st : h) {
    if (st.action < 0 || st.action >= kActionCount) malformed("unknown action");
    switch (s.phase) {
      case Phase::dealing:
        if (st.observation != kPos1 + s.ace - 1) malformed("deal must show the ace");
        s.phase = Phase::mixing;
        break;
      case Phase::mixing:
        if (st.action == kWatch) {
          if (st.observation == kGuess) {
            s.phase = Phase::guess_prompted;
          } else if (st.observation >= kSwap12 && st.observation <= kSwap23) {
            const int pair = st.observation - kSwap12;
            s.ace = apply_swap(s.ace, pair);
            ++s.swap_counts[static_cast<std::size_t>(pair)];
          } else {
            malformed("watch while mixing must show a swap or a prompt");
          }
        } else if (st.observation != reveal(flip_card(st.action), s.ace)) {
          malformed("flip outcome contradicts the ace position");
        }
        break;
      case Phase::guess_prompted:
        if (st.action == kWatch ? st.observation != kEnded
                                : st.observation != reveal(flip_card(st.action), s.ace)) {
          malformed("guess outcome contradicts the ace position");
        }
        s = State{};
        break;
    }
  }
  return s;
}

std::vector<ObservationProbability> Oracle::next_observation(const History& h, int action) const {
  if (action < 0 || action >= kActionCount) throw ConfigError("three card monte: unknown action");
  const State s = replay(h);
  switch (s.phase) {
    case Phase::dealing:
      return {{kPos1 + s.ace - 1, 1.0}};
    case Phase::mixing:
      if (action == kWatch) {
        const DealerOdds odds = dealer_odds(s.swap_counts);
        return {{kSwap12, odds.swap[0]}, {kSwap13, odds.swap[1]}, {kSwap23, odds.swap[2]}, {kGuess, odds.guess}};
      }
      return {{reveal(flip_card(action), s.ace), 1.0}};
    case Phase::guess_prompted:
      if (action == kWatch) return {{kEnded, 1.0}};
      return {{reveal(flip_card(action), s.ace), 1.0}};
  }
  return {};
}

void Tracker::reset() {
  ace_ = 2;
  phase_ = Phase::dealing;
}

void Tracker::observe(int action, int observation) {
  switch (phase_) {
    case Phase::dealing:
      if (observation != kPos1 + ace_ - 1) malformed("deal must show the ace");
      phase_ = Phase::mixing;
      break;
    case Phase::mixing:
      if (action == kWatch) {
        if (observation == kGuess) {
          phase_ = Phase::guess_prompted;
        } else if (observation >= kSwap12 && observation <= kSwap23) {
          ace_ = apply_swap(ace_, observation - kSwap12);
        } else {
          malformed("watch while mixing must show a swap or a prompt");
        }
      } else if (observation != reveal(flip_card(action), ace_)) {
        malformed("flip outcome contradicts the ace position");
      }
      break;
    case Phase::guess_prompted:
      if (action == kWatch ? observation != kEnded : observation != reveal(flip_card(action), ace_)) {
        malformed("guess outcome contradicts the ace position");
      }
      reset();
      break;
  }
}

Profile Tracker::profile() const {
  Profile p(3, 0.0);
  p[static_cast<std::size_t>(ace_ - 1)] = 1.0;
  return p;
}

Profile oracle(const History& h) {
  Tracker t;
  for (const Step& s : h) t.observe(s.action, s.observation);
  return t.profile();
}

StepResult Env::step(int action, Rng& rng) {
  auto [next, r] = tcm::step(state_, action, rng);
  state_ = next;
  return r;
}

int Env::expert_action(const ProfileTracker& tracker) const {
  const auto* t = dynamic_cast<const Tracker*>(&tracker);
  if (t == nullptr) throw ConfigError("three card monte expert needs its own tracker");
  return t->guess_prompted() ? kFlip1 + t->ace() - 1 : kWatch;
}

}  // namespace ppm::tcm
