#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "ppm/errors.hpp"
#include "ppm/pomdp.hpp"

namespace ppm {

namespace {

// Dirichlet(1) draw of length n.
Eigen::VectorXd dirichlet(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log1p(-uniform01(rng));
  return v / v.sum();
}

struct Pair {
  int a;
  int o;
};

TabularPomdp random_model(int n, int n_actions, int n_obs, const std::vector<std::vector<int>>& seen, Rng& rng) {
  TabularPomdp m(n, n_actions, n_obs);
  m.initial() = dirichlet(n, rng);
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n; ++s) m.transition(a).row(s) = dirichlet(n, rng).transpose();
    const auto& obs = seen[static_cast<std::size_t>(a)];
    if (obs.empty()) continue;
    std::vector<Eigen::MatrixXd*> slots;
    for (int o : obs) slots.push_back(&m.emission_slot(a, o));
    for (int s = 0; s < n; ++s) {
      for (int s2 = 0; s2 < n; ++s2) {
        const Eigen::VectorXd d = dirichlet(static_cast<int>(obs.size()), rng);
        for (std::size_t k = 0; k < obs.size(); ++k) (*slots[k])(s, s2) = d(static_cast<Eigen::Index>(k));
      }
    }
  }
  return m;
}

}  // namespace

EmResult em_train(const std::vector<History>& data, int n_actions, int n_observations, const EmOptions& opt,
                  Rng& rng) {
  if (opt.states < 1) throw ConfigError("EM needs at least one hidden state");
  if (opt.max_iters < 0 || opt.restarts < 1) throw ConfigError("EM needs max_iters >= 0 and restarts >= 1");
  if (data.empty()) throw DataError("EM needs training data");

  std::map<History, double> weighted;
  std::vector<std::set<int>> seen_sets(static_cast<std::size_t>(n_actions));
  for (const auto& h : data) {
    for (const Step& s : h) {
      if (s.action < 0 || s.action >= n_actions || s.observation < 0 || s.observation >= n_observations) {
        throw DataError("training symbol outside the model alphabet");
      }
      seen_sets[static_cast<std::size_t>(s.action)].insert(s.observation);
    }
    weighted[h] += 1.0;
  }
  std::vector<std::vector<int>> seen;
  std::vector<Pair> pairs;
  std::map<std::pair<int, int>, std::size_t> pair_index;
  for (int a = 0; a < n_actions; ++a) {
    seen.emplace_back(seen_sets[static_cast<std::size_t>(a)].begin(), seen_sets[static_cast<std::size_t>(a)].end());
    for (int o : seen.back()) {
      pair_index[{a, o}] = pairs.size();
      pairs.push_back({a, o});
    }
  }
  const int n = opt.states;

  EmResult best;
  best.report.log_likelihood = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (int r = 0; r < opt.restarts; ++r) {
    TabularPomdp m = random_model(n, n_actions, n_observations, seen, rng);
    std::vector<double> trace;
    int m_steps = 0;
    std::vector<Eigen::VectorXd> alpha;
    std::vector<double> scale;
    for (int iter = 0;; ++iter) {
      Eigen::VectorXd init_acc = Eigen::VectorXd::Zero(n);
      std::vector<Eigen::MatrixXd> acc(pairs.size(), Eigen::MatrixXd::Zero(n, n));
      double ll = 0.0;
      for (const auto& [h, w] : weighted) {
        const std::size_t len = h.size();
        alpha.assign(len + 1, Eigen::VectorXd());
        scale.assign(len + 1, 1.0);
        alpha[0] = m.initial();
        bool ok = true;
        for (std::size_t t = 1; t <= len && ok; ++t) {
          const Eigen::MatrixXd* j = m.joint(h[t - 1].action, h[t - 1].observation);
          Eigen::VectorXd next = j == nullptr ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(j->transpose() * alpha[t - 1]);
          const double z = next.sum();
          if (!(z > 0.0)) {
            ok = false;
            break;
          }
          scale[t] = z;
          alpha[t] = next / z;
          ll += w * std::log(z);
        }
        if (!ok) throw ConsistencyError("EM reached a model that gives a training trajectory zero probability");
        Eigen::VectorXd beta = Eigen::VectorXd::Ones(n);
        for (std::size_t t = len; t >= 1; --t) {
          const Step& s = h[t - 1];
          const Eigen::MatrixXd& j = *m.joint(s.action, s.observation);
          acc[pair_index.at({s.action, s.observation})] +=
              (w / scale[t]) * (alpha[t - 1].asDiagonal() * j * beta.asDiagonal());
          beta = (j * beta) / scale[t];
        }
        init_acc += w * alpha[0].cwiseProduct(beta);
      }
      const bool converged = iter > 0 && ll - trace.back() < opt.tolerance;
      trace.push_back(ll);
      if (converged || iter == opt.max_iters) break;

      // M-step; distributions without expected counts keep their old values.
      if (init_acc.sum() > 0.0) m.initial() = init_acc / init_acc.sum();
      for (int a = 0; a < n_actions; ++a) {
        Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
        for (int o : seen[static_cast<std::size_t>(a)]) total += acc[pair_index.at({a, o})];
        for (int s = 0; s < n; ++s) {
          const double row = total.row(s).sum();
          if (row > 0.0) m.transition(a).row(s) = total.row(s) / row;
        }
        for (int o : seen[static_cast<std::size_t>(a)]) {
          const Eigen::MatrixXd& c = acc[pair_index.at({a, o})];
          Eigen::MatrixXd& e = m.emission_slot(a, o);
          for (int s = 0; s < n; ++s) {
            for (int s2 = 0; s2 < n; ++s2) {
              if (total(s, s2) > 0.0) e(s, s2) = c(s, s2) / total(s, s2);
            }
          }
        }
      }
      m.invalidate_cache();
      ++m_steps;
    }
    best.report.traces.push_back(trace);
    if (!have_best || trace.back() > best.report.log_likelihood) {
      have_best = true;
      best.model = std::move(m);
      best.report.best_restart = r;
      best.report.iterations = m_steps;
      best.report.log_likelihood = trace.back();
    }
  }
  best.model.invalidate_cache();
  return best;
}

}  // namespace ppm
