#include "ppm/evaluate.hpp"

#include <cmath>
#include <memory>

#include "ppm/errors.hpp"
#include "ppm/lpst.hpp"

namespace ppm {

FeatureSource parse_feature_source(const std::string& s) {
  if (s == "oracle") return FeatureSource::oracle;
  if (s == "pp") return FeatureSource::pp;
  if (s == "flat") return FeatureSource::flat;
  if (s == "som") return FeatureSource::som;
  if (s == "expert") return FeatureSource::expert;
  throw ConfigError("unknown feature source '" + s + "'");
}

std::string feature_source_name(FeatureSource s) {
  switch (s) {
    case FeatureSource::oracle: return "oracle";
    case FeatureSource::pp: return "pp";
    case FeatureSource::flat: return "flat";
    case FeatureSource::som: return "som";
    case FeatureSource::expert: return "expert";
  }
  return "?";
}

EvalRecord evaluate(Environment& env, const Abstraction& abstraction, const FeatureProvider& provider,
                    const EvalOptions& opt) {
  if (opt.steps < 0) throw ConfigError("evaluation steps must be non-negative");
  const FeatureSource src = provider.source;
  if (src == FeatureSource::pp && provider.pp == nullptr) throw ConfigError("pp features need a trained PP model");
  if (src == FeatureSource::flat && provider.flat == nullptr) throw ConfigError("flat features need a trained POMDP");
  const int n_actions = static_cast<int>(env.alphabet().actions.size());
  const int n_obs = static_cast<int>(abstraction.alphabet.observations.size());
  const std::size_t m = env.tests().size();
  if (abstraction.alphabet.actions.size() != env.alphabet().actions.size() || abstraction.tests.size() != m) {
    throw ConfigError("abstraction does not match the environment");
  }
  if (provider.flat != nullptr && src == FeatureSource::flat &&
      (provider.flat->actions() != n_actions || provider.flat->observations() != n_obs)) {
    throw ConfigError("flat POMDP alphabet does not match the environment abstraction");
  }

  EvalRecord rec;
  rec.source = feature_source_name(src);
  rec.steps = opt.steps;
  rec.per_test_rmse.assign(m, 0.0);
  const bool som = src == FeatureSource::som;
  const FeatureSpace space(som ? (opt.som_joint ? FeatureMode::som_joint : FeatureMode::som) : FeatureMode::predictive,
                           static_cast<int>(m), n_obs, n_actions);
  SoftmaxPolicy policy(space.size(), n_actions);
  Olgarb learner(space.size(), n_actions, opt.olgarb);
  Rng rng(opt.seed);

  env.reset();
  auto tracker = env.make_tracker();
  tracker->reset();
  std::unique_ptr<PomdpPredictor> flat;
  if (src == FeatureSource::flat) flat = std::make_unique<PomdpPredictor>(*provider.flat, abstraction.tests);
  if (src == FeatureSource::pp) provider.pp->reset();

  int last_obs = -1, prev_obs = -1, prev_action = -1;
  double total_reward = 0.0, window_reward = 0.0;
  std::vector<double> sq(m, 0.0);
  std::int64_t window_len = 0;
  const std::int64_t window = opt.curve_points > 0 ? std::max<std::int64_t>(1, opt.steps / opt.curve_points) : 0;

  for (std::int64_t t = 0; t < opt.steps; ++t) {
    const Profile truth = tracker->profile();
    Profile current;
    bool have_profile = true;
    switch (src) {
      case FeatureSource::oracle:
      case FeatureSource::expert:
        current = truth;
        break;
      case FeatureSource::pp:
        current = provider.pp->profile();
        break;
      case FeatureSource::flat:
        current = flat->profile();
        break;
      case FeatureSource::som:
        have_profile = false;
        break;
    }
    if (have_profile) {
      for (std::size_t i = 0; i < m; ++i) sq[i] += (current[i] - truth[i]) * (current[i] - truth[i]);
    }

    std::vector<int> active;
    int action;
    if (src == FeatureSource::expert) {
      action = env.expert_action(*tracker);
    } else {
      active = space.build(have_profile ? &current : nullptr, last_obs, prev_obs, prev_action);
      action = policy.sample(active, rng);
    }
    const StepResult r = env.step(action, rng);
    if (src != FeatureSource::expert && opt.learn) learner.step(policy, active, action, r.reward);

    const int abs_obs = abstraction.map(r.observation);
    tracker->observe(action, r.observation);
    if (src == FeatureSource::pp) provider.pp->observe({action, abs_obs});
    if (flat) flat->observe(action, abs_obs);
    prev_obs = last_obs;
    prev_action = action;
    last_obs = abs_obs;

    total_reward += r.reward;
    window_reward += r.reward;
    if (window > 0 && ++window_len == window) {
      rec.curve.push_back(window_reward / static_cast<double>(window_len));
      window_reward = 0.0;
      window_len = 0;
    }
  }

  if (opt.steps > 0) {
    rec.avg_reward = total_reward / static_cast<double>(opt.steps);
    if (src != FeatureSource::som) {
      rec.has_rmse = true;
      double joint = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        rec.per_test_rmse[i] = std::sqrt(sq[i] / static_cast<double>(opt.steps));
        joint += sq[i];
      }
      rec.rmse = std::sqrt(joint / (static_cast<double>(opt.steps) * static_cast<double>(m)));
    }
  }
  if (src == FeatureSource::pp) {
    rec.fallbacks = provider.pp->unknown_actions();
    if (auto* pomdp = dynamic_cast<const PpPomdpRuntime*>(provider.pp)) rec.fallbacks += pomdp->impossible_events();
    if (auto* lpst = dynamic_cast<const LpstRuntime*>(provider.pp)) rec.fallbacks += lpst->fallbacks();
  }
  if (flat) rec.fallbacks = flat->impossible_events();
  rec.clamped = space.clamped();
  return rec;
}

}  // namespace ppm
