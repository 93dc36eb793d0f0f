#include <doctest.h>

#include <cmath>
#include <set>

#include "ppm/ball_bounce.hpp"
#include "ppm/environment.hpp"
#include "ppm/errors.hpp"
#include "ppm/gallery.hpp"
#include "ppm/tcm.hpp"
#include "reference.hpp"

using namespace ppm;

namespace {

Profile oh(int k) {
  Profile p(3, 0.0);
  p[static_cast<std::size_t>(k - 1)] = 1.0;
  return p;
}

}  // namespace

TEST_CASE("tcm dealer odds on a fresh game") {
  const auto odds = tcm::dealer_odds({0, 0, 0});
  for (double s : odds.swap) CHECK(s == doctest::Approx(0.3));
  CHECK(odds.guess == doctest::Approx(0.1));
  const auto skew = tcm::dealer_odds({1, 0, 0});
  CHECK(skew.swap[1] == doctest::Approx(0.25));
  CHECK(skew.swap[0] == doctest::Approx(0.4));
}

TEST_CASE("tcm dealer frequencies match the odds") {
  Rng rng(3);
  tcm::State s;
  s.phase = tcm::Phase::mixing;
  std::array<int, 4> hits{};
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto [next, r] = tcm::step(s, tcm::kWatch, rng);
    ++hits[r.observation == tcm::kGuess ? 3 : r.observation - tcm::kSwap12];
  }
  // 5 standard errors at n = 1e6
  for (int i = 0; i < 3; ++i) CHECK(std::abs(hits[i] / double(n) - 0.3) < 5 * std::sqrt(0.21 / n));
  CHECK(std::abs(hits[3] / double(n) - 0.1) < 5 * std::sqrt(0.09 / n));
}

TEST_CASE("tcm rewards") {
  Rng rng(1);
  tcm::State s;
  s.phase = tcm::Phase::guess_prompted;
  s.ace = 3;
  auto [n1, r1] = tcm::step(s, tcm::kFlip3, rng);
  CHECK(r1.reward == 1.0);
  CHECK(n1 == tcm::State{});
  s.phase = tcm::Phase::mixing;
  s.ace = 1;
  auto [n2, r2] = tcm::step(s, tcm::kFlip1, rng);
  CHECK(r2.observation == tcm::kAce);
  CHECK(r2.reward == -1.0);
  CHECK(n2 == s);
  s.phase = tcm::Phase::guess_prompted;
  CHECK(tcm::step(s, tcm::kWatch, rng).second.reward == -1.0);
  CHECK(tcm::step(s, tcm::kFlip2, rng).second.reward == -1.0);
}

TEST_CASE("tcm oracle on hand-built histories") {
  using namespace tcm;
  History h{{kWatch, kPos2}};
  CHECK(oracle(h) == oh(2));
  h.push_back({kWatch, kSwap12});
  CHECK(oracle(h) == oh(1));
  h.push_back({kWatch, kSwap13});
  CHECK(oracle(h) == oh(3));
  CHECK(oracle({}) == oh(2));
  CHECK_THROWS_AS(oracle({{kWatch, kPos1}}), MalformedHistoryError);
  CHECK_THROWS_AS(oracle({{kWatch, kPos2}, {kFlip1, kSwap12}}), MalformedHistoryError);
}

TEST_CASE("tcm swaps are involutions on profiles") {
  using namespace tcm;
  for (int pair = 0; pair < 3; ++pair) {
    for (int ace = 1; ace <= 3; ++ace) CHECK(apply_swap(apply_swap(ace, pair), pair) == ace);
  }
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Env env;
    env.reset();
    History h;
    for (int t = 0; t < 12; ++t) {
      const int a = uniform_index(rng, kActionCount);
      h.push_back({a, env.step(a, rng).observation});
    }
    const Profile p = oracle(h);
    if (env.state().phase != Phase::mixing) continue;
    // Force two identical swaps through the tracker.
    Tracker t;
    for (const auto& s : h) t.observe(s.action, s.observation);
    t.observe(kWatch, kSwap13);
    t.observe(kWatch, kSwap13);
    CHECK(t.profile() == p);
  }
}

TEST_CASE("tcm oracle agrees with the rule-based reference to depth 5") {
  tcm::Oracle oracle;
  long n = 0;
  ref::tcm_enumerate(5, [&](const History& h, const ref::TcmState& s) {
    ++n;
    CHECK(tcm::oracle(h) == ref::tcm_profile(s));
    for (int a = 0; a < tcm::kActionCount; ++a) {
      const auto got = oracle.next_observation(h, a);
      auto want = ref::tcm_outcomes(s, a);
      std::sort(want.begin(), want.end(), [](auto& x, auto& y) { return x.observation < y.observation; });
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].observation == want[i].observation);
        CHECK(got[i].probability == doctest::Approx(want[i].probability).epsilon(1e-15));
      }
    }
  });
  CHECK(n > 1000);
}

TEST_CASE("tcm has exactly three distinct profiles") {
  std::set<Profile> seen;
  ref::tcm_enumerate(6, [&](const History& h, const ref::TcmState&) { seen.insert(tcm::oracle(h)); });
  CHECK(seen == std::set<Profile>{oh(1), oh(2), oh(3)});
}

TEST_CASE("gallery bounce rule") {
  gallery::Params p;
  const auto at = [&](int r, int c) { return r * p.size + c; };
  // Interior, nothing in the way.
  auto b = gallery::resolve_bounce(p, 0, at(3, 3), gallery::direction_index(1, 1));
  CHECK(b.dr == 1);
  CHECK(b.dc == 1);
  // Top row heading up-right: the row component flips.
  b = gallery::resolve_bounce(p, 0, at(0, 3), gallery::direction_index(-1, 1));
  CHECK(b.dr == 1);
  CHECK(b.dc == 1);
  CHECK(b.dir == gallery::direction_index(1, 1));
  // Into the top-left corner: both flip.
  b = gallery::resolve_bounce(p, 0, at(0, 0), gallery::direction_index(-1, -1));
  CHECK(b.dr == 1);
  CHECK(b.dc == 1);
  // An obstacle block below-right of (1,1) covers (2,2),(2,3),(3,2),(3,3).
  const std::uint32_t mask = 1u << gallery::block_of(p, at(2, 2));
  CHECK(gallery::cell_blocked(p, mask, at(3, 3)));
  b = gallery::resolve_bounce(p, mask, at(1, 1), gallery::direction_index(1, 1));
  CHECK(b.dr == -1);
  CHECK(b.dc == -1);
}

TEST_CASE("gallery bounce always lands on a free cell") {
  gallery::Params p;
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    std::uint32_t mask = 0;
    for (int k = 0; k < p.mask_bits(); ++k) {
      if (uniform01(rng) < 0.3) mask |= 1u << k;
    }
    const int cell = uniform_index(rng, p.cells());
    if (gallery::cell_blocked(p, mask, cell)) continue;
    const int dir = uniform_index(rng, 4);
    const auto b = gallery::resolve_bounce(p, mask, cell, dir);
    const int r = cell / p.size + b.dr, c = cell % p.size + b.dc;
    REQUIRE((r >= 0 && r < p.size && c >= 0 && c < p.size));
    CHECK_FALSE(gallery::cell_blocked(p, mask, r * p.size + c));
    if (b.dr == 0 && b.dc == 0) CHECK(b.dir == dir);
  }
}

TEST_CASE("gallery rewards") {
  gallery::Params p;
  Rng rng(2);
  gallery::State s;
  s.pos = p.crosshair();
  s.reset_pending = false;
  s.dir = 0;
  int hits = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const auto r = gallery::step(p, s, gallery::kShoot, rng).second;
    CHECK((r.reward == 10.0 || r.reward == -5.0));
    hits += r.reward == 10.0;
  }
  CHECK(std::abs(hits / double(n) - 0.297) < 5 * std::sqrt(0.297 * 0.703 / n));
  s.pos = 0;
  s.dir = gallery::direction_index(1, 1);
  for (int i = 0; i < 1000; ++i) CHECK(gallery::step(p, s, gallery::kShoot, rng).second.reward == -5.0);
  for (int i = 0; i < 1000; ++i) CHECK(gallery::step(p, s, gallery::kWatch, rng).second.reward == 0.0);
}

TEST_CASE("gallery oracle anchor values") {
  gallery::Params p;
  const auto at = [&](int r, int c) { return r * p.size + c; };
  gallery::Tracker t(p, true);
  t.reset();
  CHECK(t.prediction() == 0.0);
  gallery::Tracker fresh(p, true);
  fresh.reset();
  fresh.observe(gallery::kWatch, gallery::encode_full(p, true, at(3, 3), 0));
  // Uniform direction, one of four leads onto the crosshair.
  CHECK(fresh.prediction() == doctest::Approx(0.99 * 0.7 * 0.25));
  t.observe(gallery::kWatch, gallery::encode_full(p, true, at(2, 2), 0));
  CHECK(t.prediction() == 0.0);
  t.observe(gallery::kWatch, gallery::encode_full(p, false, at(3, 3), 0));
  CHECK(t.prediction() == doctest::Approx(0.693));
  t.observe(gallery::kWatch, gallery::encode_full(p, false, at(4, 4), 0));
  CHECK(t.prediction() == doctest::Approx(0.297));
  t.observe(gallery::kWatch, gallery::encode_full(p, true, at(0, 7), 0));
  CHECK(t.prediction() == 0.0);
  CHECK_THROWS_AS(t.observe(gallery::kWatch, gallery::encode_full(p, false, at(5, 5), 0)), MalformedHistoryError);
}

TEST_CASE("gallery abstraction keeps only the local neighbourhood") {
  gallery::Params p;
  const auto at = [&](int r, int c) { return r * p.size + c; };
  const std::uint32_t far = 1u << gallery::block_of(p, at(7, 7));
  CHECK(gallery::abstract_of(p, gallery::encode_full(p, false, at(1, 1), 0)) ==
        gallery::abstract_of(p, gallery::encode_full(p, false, at(1, 1), far)));
  const std::uint32_t near = 1u << gallery::block_of(p, at(2, 2));
  CHECK(gallery::abstract_of(p, gallery::encode_full(p, false, at(1, 1), 0)) !=
        gallery::abstract_of(p, gallery::encode_full(p, false, at(1, 1), near)));
  // Corner: the five out-of-bounds neighbours read as blocked.
  const int nb = gallery::neighbourhood(p, 0, at(0, 0));
  CHECK(__builtin_popcount(static_cast<unsigned>(nb)) == 5);
  const Alphabet al = gallery::abstract_alphabet(p);
  CHECK(al.actions.size() * al.observations.size() > 2000);
}

TEST_CASE("gallery direction belief stays uniform over its support") {
  gallery::Env env(gallery::Params{});
  Rng rng(21);
  gallery::Tracker t(gallery::Params{}, true);
  long checked = 0, non_uniform = 0;
  for (int ep = 0; ep < 200; ++ep) {
    env.reset();
    t.reset();
    for (int i = 0; i < 200; ++i) {
      const int a = uniform01(rng) < 0.2 ? gallery::kShoot : gallery::kWatch;
      t.observe(a, env.step(a, rng).observation);
      ++checked;
      non_uniform += !t.uniform_over_support();
    }
  }
  MESSAGE("non-uniform beliefs: " << non_uniform << " of " << checked);
  CHECK(non_uniform == 0);
}

TEST_CASE("gallery oracle agrees with Monte Carlo on short histories") {
  gallery::Params p;
  gallery::Env env(p);
  Rng rng(17), mc(18);
  int checked = 0;
  for (int k = 0; k < 40 && checked < 12; ++k) {
    env.reset();
    History h;
    const int len = 2 + uniform_index(rng, 3);
    for (int i = 0; i < len; ++i) {
      const int a = uniform01(rng) < 0.2 ? gallery::kShoot : gallery::kWatch;
      h.push_back({a, env.step(a, rng).observation});
    }
    gallery::Tracker t(p, true);
    t.reset();
    for (const auto& s : h) t.observe(s.action, s.observation);
    if (t.prediction() == 0.0 && k % 3 != 0) continue;  // favour informative histories
    const double est = ref::gallery_monte_carlo(p, h, 20000, mc);
    REQUIRE(!std::isnan(est));
    CHECK(std::abs(est - t.prediction()) < 0.02);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("ball bounce walk, window and oracle") {
  bb::Params p{10, 4};
  bb::State s;
  std::vector<int> path;
  for (int i = 0; i < 20; ++i) {
    s = bb::advance(p, s);
    path.push_back(s.pos);
  }
  CHECK(path[8] == 9);
  CHECK(path[9] == 8);
  CHECK(path[17] == 0);
  CHECK(path[18] == 1);
  CHECK(path[19] == 2);
  CHECK(bb::window_of(p, 3) == 1);
  CHECK(bb::window_of(p, 4) == 2);
  CHECK(bb::window_of(p, 5) == 4);
  CHECK(bb::window_of(p, 8) == 0);
  bb::Tracker t(p);
  t.reset();
  bb::Env env(p);
  env.reset();
  Rng rng(1);
  std::set<Profile> profiles;
  for (int i = 0; i < 40; ++i) {
    const bb::State before = env.state();
    const bb::State after = bb::advance(p, before);
    CHECK(t.profile()[0] == (after.pos == p.target ? 1.0 : 0.0));
    profiles.insert(t.profile());
    t.observe(bb::kStep, env.step(bb::kStep, rng).observation);
  }
  CHECK(profiles.size() == 2);
  CHECK_THROWS_AS((bb::Params{10, 9}.validate()), ConfigError);
  CHECK_THROWS_AS((bb::Params{10, 0}.validate()), ConfigError);
}

TEST_CASE("environment factory and abstractions") {
  EnvironmentParams ep;
  for (std::string id : {"tcm", "gallery", "ballbounce"}) {
    ep.id = id;
    auto env = make_environment(ep);
    CHECK(env->id() == id);
    CHECK(env->abstraction("none").alphabet == env->alphabet());
    CHECK_THROWS_AS(env->abstraction("bogus"), ConfigError);
  }
  ep.id = "chess";
  CHECK_THROWS_AS(make_environment(ep), ConfigError);
  ep.id = "ballbounce";
  const auto a = make_environment(ep)->abstraction("window");
  CHECK(a.alphabet.observations.size() == 8);
  CHECK(a.map(4) == 2);
}
