#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppm/errors.hpp"
#include "ppm/experiment.hpp"
#include "ppm/profile_learn.hpp"
#include "ppm/tcm.hpp"
#include "reference.hpp"

using namespace ppm;

namespace {

struct TcmRun {
  std::vector<Trajectory> data;
  HistoryStats stats{0, 1};
  ProfileSet profiles;
};

const TcmRun& tcm_run() {
  static const TcmRun run = [] {
    ExperimentConfig cfg;
    cfg.episodes = 20000;
    auto env = make_environment(cfg.env);
    TcmRun r;
    r.data = generate_data(cfg, *env);
    r.stats = collect_stats(r.data, tcm::tests(), cfg.max_search_len);
    r.profiles = cluster_profiles(r.stats, cfg.alpha, cfg.min_trials);
    return r;
  }();
  return run;
}

ref::TcmState replay_reference(const History& h) {
  ref::TcmState s;
  for (const auto& st : h) {
    for (const auto& o : ref::tcm_outcomes(s, st.action)) {
      if (o.observation == st.observation) {
        s = o.next;
        break;
      }
    }
  }
  return s;
}

int nearest(const ProfileSet& ps, const Profile& p) {
  int best = -1;
  double best_d = 1e9;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double d = 0;
    for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, std::abs(ps.profiles[i].values[k] - p[k]));
    if (d < best_d) best_d = d, best = static_cast<int>(i);
  }
  return best;
}

ProfileSet one_test_profiles(std::vector<TestCounts> counts) {
  ProfileSet ps;
  for (const auto& c : counts) {
    EstimatedProfile e;
    e.counts = {c};
    e.values = {static_cast<double>(c.successes) / static_cast<double>(c.trials)};
    ps.profiles.push_back(e);
  }
  return ps;
}

}  // namespace

TEST_CASE("history statistics count trials and successes") {
  using namespace tcm;
  const History ep{{kWatch, kPos2}, {kWatch, kSwap12}, {kFlip1, kAce}};
  HistoryStats stats(tests().size(), 10);
  stats.add_episode(ep, tests());
  const int node = stats.find({ep[0], ep[1]});
  REQUIRE(node >= 0);
  CHECK(stats.visits(node) == 1);
  CHECK(stats.trials(node, 0) == 1);
  CHECK(stats.successes(node, 0) == 1);
  CHECK(stats.trials(node, 1) == 0);
  CHECK(stats.visits(0) == 1);
  CHECK(stats.history(node) == History{ep[0], ep[1]});

  HistoryStats short_stats(tests().size(), 1);
  short_stats.add_episode(ep, tests());
  CHECK(short_stats.size() == 2);
  CHECK(short_stats.find({ep[0], ep[1]}) == -1);
}

TEST_CASE("tcm statistics invariants and a concentrated estimate") {
  const auto& r = tcm_run();
  for (std::size_t n = 0; n < r.stats.size(); ++n) {
    const int node = static_cast<int>(n);
    for (std::size_t t = 0; t < r.stats.n_tests(); ++t) {
      CHECK(r.stats.successes(node, t) <= r.stats.trials(node, t));
      CHECK(r.stats.trials(node, t) <= r.stats.visits(node));
    }
  }
  const int node = r.stats.find({{tcm::kFlip2, tcm::kPos2}});
  REQUIRE(node >= 0);
  const auto e = estimate(r.stats, node);
  CHECK(e.values[tcm::kFlip2 - 1] == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("tcm clustering finds three one-hot profiles") {
  const auto& ps = tcm_run().profiles;
  REQUIRE(ps.size() == 3);
  std::vector<int> hot;
  for (const auto& p : ps.profiles) {
    const auto it = std::max_element(p.values.begin(), p.values.end());
    hot.push_back(static_cast<int>(it - p.values.begin()));
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::abs(p.values[k] - (static_cast<int>(k) == hot.back() ? 1.0 : 0.0)) < 0.05);
    }
  }
  std::sort(hot.begin(), hot.end());
  CHECK(hot == std::vector<int>{0, 1, 2});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      CHECK(profiles_differ(ps.profiles[i].counts, ps.profiles[j].counts, ps.alpha));
    }
  }
}

TEST_CASE("clustering of empty data is empty") {
  HistoryStats stats(3, 5);
  CHECK(cluster_profiles(stats, 1e-5, 10).size() == 0);
}

TEST_CASE("profiles_differ guard rules") {
  const std::vector<TestCounts> a{{90, 100}, {10, 100}};
  CHECK_FALSE(profiles_differ(a, a, 1e-5));
  CHECK(profiles_differ(a, {{10, 100}, {10, 100}}, 1e-5));
  CHECK_FALSE(profiles_differ({{90, 100}, {0, 0}}, {{90, 100}, {100, 100}}, 1e-5));
}

TEST_CASE("match_profile kinds") {
  const ProfileSet ps = one_test_profiles({{100, 1000}, {900, 1000}});
  const auto self = match_profile(ps.profiles[0].counts, ps, 1e-5);
  CHECK(self.kind == MatchResult::Kind::unique);
  CHECK(self.candidates == std::vector<int>{0});
  const auto weak = match_profile({{1, 1}}, ps, 1e-5);
  CHECK(weak.kind == MatchResult::Kind::multiple);
  CHECK(weak.candidates.size() == 2);
  const auto none = match_profile({{500, 1000}}, ps, 1e-5);
  CHECK(none.kind == MatchResult::Kind::none);
}

TEST_CASE("kld_match picks the smallest divergence") {
  const ProfileSet ps = one_test_profiles({{3, 10}, {7, 10}});
  CHECK(kld_match({{6, 10}}, {0, 1}, ps) == 1);
  CHECK(kld_match({{3, 10}}, {0, 1}, ps) == 0);
  CHECK(kld_match({{0, 0}}, {1, 0}, ps) == 0);
  CHECK(kld_match({{6, 10}}, {0}, ps) == 0);
  CHECK_THROWS_AS(kld_match({{6, 10}}, {}, ps), ConfigError);
}

TEST_CASE("translation follows the ace") {
  const auto& r = tcm_run();
  using namespace tcm;
  const History ep{{kWatch, kPos2}, {kWatch, kSwap12}};
  const auto pp = translate(ep, r.stats, r.profiles, Strategy::kld, r.profiles.alpha);
  REQUIRE(pp.steps.size() == 2);
  CHECK_FALSE(pp.truncated);
  CHECK(pp.steps[0].action == ep[0]);
  CHECK(r.profiles.profiles[static_cast<std::size_t>(pp.steps[0].profile)].values[1] > 0.95);
  CHECK(r.profiles.profiles[static_cast<std::size_t>(pp.steps[1].profile)].values[0] > 0.95);

  // The deal never shows the ace directly, so this first step is absent from the data.
  const auto cut = translate({{kFlip3, kAce}}, r.stats, r.profiles, Strategy::cut, r.profiles.alpha);
  CHECK(cut.truncated);
  CHECK(cut.reason == "unseen");
  CHECK(cut.steps.empty());
}

TEST_CASE("cut translation agrees with the reference on every emitted label") {
  const auto& r = tcm_run();
  std::size_t emitted = 0, agree = 0;
  for (std::size_t i = 0; i < 2000; ++i) {
    const auto& ep = r.data[i].steps;
    const auto pp = translate(ep, r.stats, r.profiles, Strategy::cut, r.profiles.alpha);
    for (std::size_t k = 0; k < pp.steps.size(); ++k) {
      const History prefix(ep.begin(), ep.begin() + static_cast<std::ptrdiff_t>(k + 1));
      ++emitted;
      agree += pp.steps[k].profile == nearest(r.profiles, ref::tcm_profile(replay_reference(prefix)));
    }
    if (pp.truncated) CHECK(pp.reason == "ambiguous");
  }
  CHECK(emitted > 0);
  CHECK(static_cast<double>(agree) >= 0.99 * static_cast<double>(emitted));
}

TEST_CASE("translation is deterministic") {
  const auto& r = tcm_run();
  for (std::size_t i = 0; i < 50; ++i) {
    const auto a = translate(r.data[i].steps, r.stats, r.profiles, Strategy::kld, 1e-5);
    const auto b = translate(r.data[i].steps, r.stats, r.profiles, Strategy::kld, 1e-5);
    CHECK(a.initial == b.initial);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) CHECK(a.steps[k].profile == b.steps[k].profile);
  }
}

TEST_CASE("profile set and pp trajectory files round trip") {
  const auto& r = tcm_run();
  std::stringstream ss;
  write_profile_set(ss, r.profiles, tcm::tests(), tcm::alphabet());
  const auto back = read_profile_set(ss, tcm::tests(), tcm::alphabet());
  REQUIRE(back.size() == r.profiles.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.profiles[i].exemplar == r.profiles.profiles[i].exemplar);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(back.profiles[i].counts[t].successes == r.profiles.profiles[i].counts[t].successes);
      CHECK(back.profiles[i].values[t] == doctest::Approx(r.profiles.profiles[i].values[t]));
    }
  }
  CHECK(back.alpha == r.profiles.alpha);

  std::vector<PpTrajectory> pp;
  for (std::size_t i = 0; i < 20; ++i) {
    pp.push_back(translate(r.data[i].steps, r.stats, r.profiles, Strategy::cut, 1e-5));
  }
  std::stringstream ps;
  write_pp_trajectories(ps, pp, tcm::alphabet());
  const auto pp_back = read_pp_trajectories(ps, tcm::alphabet(), r.profiles.size());
  REQUIRE(pp_back.size() == pp.size());
  for (std::size_t i = 0; i < pp.size(); ++i) {
    CHECK(pp_back[i].initial == pp[i].initial);
    CHECK(pp_back[i].truncated == pp[i].truncated);
    CHECK(pp_back[i].reason == pp[i].reason);
    REQUIRE(pp_back[i].steps.size() == pp[i].steps.size());
    for (std::size_t k = 0; k < pp[i].steps.size(); ++k) {
      CHECK(pp_back[i].steps[k].action == pp[i].steps[k].action);
      CHECK(pp_back[i].steps[k].profile == pp[i].steps[k].profile);
    }
  }
  std::istringstream bad("0 watch/pos2 7\n");
  CHECK_THROWS(read_pp_trajectories(bad, tcm::alphabet(), 3));
}

TEST_CASE("estimator concentrates on synthetic Bernoulli data") {
  // One action, observation 1 with a per-step probability that depends on the previous observation.
  const Alphabet al{SymbolSet({"go"}), SymbolSet({"lo", "hi"})};
  const TestOfInterest t = TestOfInterest::single("hi", 0, {1});
  const double p_after[2] = {0.2, 0.65};
  Rng rng(5);
  std::vector<Trajectory> data;
  for (int i = 0; i < 4000; ++i) {
    Trajectory tr{"toy", static_cast<std::uint64_t>(i), {}};
    int prev = 0;
    for (int k = 0; k < 4; ++k) {
      prev = uniform01(rng) < p_after[prev] ? 1 : 0;
      tr.steps.push_back({0, prev});
    }
    data.push_back(tr);
  }
  const auto stats = collect_stats(data, {t}, 3);
  int checked = 0, good = 0;
  for (std::size_t n = 1; n < stats.size(); ++n) {
    const int node = static_cast<int>(n);
    const auto trials = stats.trials(node, 0);
    if (trials < 100) continue;
    const double truth = p_after[stats.history(node).back().observation];
    const double est = static_cast<double>(stats.successes(node, 0)) / static_cast<double>(trials);
    ++checked;
    good += std::abs(est - truth) < 5.0 / std::sqrt(static_cast<double>(trials));
  }
  CHECK(checked >= 6);
  CHECK(good >= 0.95 * checked);
}
