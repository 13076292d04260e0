#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include "mdma/types.hpp"

namespace mdma {

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpResult {
  Vec x;
  double objective = 0.0;
  int pivots = 0;
  bool stopped_early = false;
};

/// max c'x s.t. A x <= b, x >= 0, with b >= 0 so the origin is a basic feasible start.
/// Dense tableau simplex with Bland's rule. Stops once the objective reaches `good_enough`.
/// Throws LpError when unbounded or when the pivot budget runs out.
LpResult simplex_maximize(const Vec& c, const Mat& a, const Vec& b,
                          double good_enough = std::numeric_limits<double>::infinity());

}  // namespace mdma
