#pragma once

#include <cstdint>

namespace ppm {

struct GTestResult {
  bool rejected = false;
  double statistic = 0.0;
  bool low_data = false;  // a side has zero trials or fewer than the minimum
};

// Likelihood-ratio homogeneity test on a 2x2 table of (successes, failures);
// one degree of freedom, rejects when G exceeds the chi-square (1 - alpha) quantile.
GTestResult g_test(std::int64_t success1, std::int64_t trial1, std::int64_t success2, std::int64_t trial2,
                   double alpha, std::int64_t min_trials = 0);

double chi_square_critical(double alpha);

}  // namespace ppm
