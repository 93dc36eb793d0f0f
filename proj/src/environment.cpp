#include "ppm/environment.hpp"

#include "ppm/ball_bounce.hpp"
#include "ppm/errors.hpp"
#include "ppm/gallery.hpp"
#include "ppm/tcm.hpp"

namespace ppm {

Abstraction Environment::abstraction(const std::string& id) const {
  if (id != "none") throw ConfigError("environment '" + this->id() + "' has no abstraction '" + id + "'");
  return {"none", alphabet(), [](int o) { return o; }, tests()};
}

std::unique_ptr<Environment> make_environment(const EnvironmentParams& params) {
  if (params.id == "tcm") return std::make_unique<tcm::Env>();
  if (params.id == "gallery") {
    gallery::Params p;
    p.size = params.gallery_size;
    p.crosshair_row = params.crosshair_row;
    p.crosshair_col = params.crosshair_col;
    p.block_probability = params.block_probability;
    return std::make_unique<gallery::Env>(p);
  }
  if (params.id == "ballbounce") return std::make_unique<bb::Env>(bb::Params{params.bb_length, params.bb_target});
  throw ConfigError("unknown environment '" + params.id + "'");
}

Trajectory sample_episode(Environment& env, int length, Rng& rng, std::uint64_t seed_tag) {
  Trajectory t;
  t.env_id = env.id();
  t.seed = seed_tag;
  env.reset();
  const int n_actions = static_cast<int>(env.alphabet().actions.size());
  t.steps.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    const int a = uniform_index(rng, n_actions);
    t.steps.push_back({a, env.step(a, rng).observation});
  }
  return t;
}

Profile tracked_profile(const Environment& env, const History& h) {
  auto tracker = env.make_tracker();
  tracker->reset();
  for (const Step& s : h) tracker->observe(s.action, s.observation);
  return tracker->profile();
}

}  // namespace ppm
