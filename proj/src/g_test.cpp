#include "ppm/g_test.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "ppm/errors.hpp"

namespace ppm {

double chi_square_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("significance level must lie in (0, 1)");
  thread_local double last_alpha = -1.0;
  thread_local double last_value = 0.0;
  if (alpha != last_alpha) {
    last_value = boost::math::quantile(boost::math::complement(boost::math::chi_squared(1.0), alpha));
    last_alpha = alpha;
  }
  return last_value;
}

namespace {

double cell(double observed, double expected) {
  return observed > 0.0 ? observed * std::log(observed / expected) : 0.0;
}

}  // namespace

GTestResult g_test(std::int64_t success1, std::int64_t trial1, std::int64_t success2, std::int64_t trial2,
                   double alpha, std::int64_t min_trials) {
  if (success1 < 0 || success2 < 0 || trial1 < success1 || trial2 < success2) {
    throw DataError("g-test counts must satisfy 0 <= successes <= trials");
  }
  GTestResult r;
  r.low_data = trial1 < min_trials || trial2 < min_trials;
  if (trial1 == 0 || trial2 == 0) {
    r.low_data = true;
    return r;
  }
  const double n1 = static_cast<double>(trial1), n2 = static_cast<double>(trial2);
  const double s1 = static_cast<double>(success1), s2 = static_cast<double>(success2);
  const double pooled = (s1 + s2) / (n1 + n2);
  double g = 0.0;
  if (pooled > 0.0 && pooled < 1.0) {
    g = cell(s1, n1 * pooled) + cell(n1 - s1, n1 * (1.0 - pooled)) + cell(s2, n2 * pooled) +
        cell(n2 - s2, n2 * (1.0 - pooled));
    g = std::max(0.0, 2.0 * g);
  }
  r.statistic = g;
  r.rejected = g > chi_square_critical(alpha);
  return r;
}

}  // namespace ppm
