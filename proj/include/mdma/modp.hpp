#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mdma/result.hpp"
#include "mdma/scenario.hpp"
#include "mdma/subframe.hpp"
#include "mdma/types.hpp"

namespace mdma {

struct PolyblockOptions {
  double eps = 0.05;         ///< relative certificate: Ub - Lb <= eps |Lb| + abs_tol
  double abs_tol = 1e-6;
  double bisect_tol = 1e-4;  ///< width of the final delta interval
  int max_iter = 5000;
  bool prune = true;         ///< drop vertices that cannot beat Lb and dominated children
  bool clip_saturation = true;
  double tiny = 1e-6;        ///< skip children whose coordinate falls below tiny * z0
};

/// Upper corner of the box that contains every feasible z of the sub-frame; K entries.
SinrVector initial_vertex(const SubframeAssignment& a_n, const Scenario& s);

struct Projection {
  double delta = 1.0;     ///< feasible end of the final interval
  double delta_ub = 1.0;  ///< infeasible end (equal to delta when the vertex is feasible)
  SinrVector point;       ///< delta * vertex
  PowerAlloc p;           ///< LP witness at point
  int oracle_calls = 0;
};

/// Largest delta in [0, 1] with delta * vertex feasible, by bisection on the LP oracle.
Projection project(const SinrVector& vertex, const SubframeModel& model, double bisect_tol = 1e-4);

struct PolyblockResult {
  double lower = 0.0;  ///< floored objective of the incumbent (latency included)
  double upper = 0.0;
  SinrVector z;        ///< incumbent, K entries
  PowerAlloc p;        ///< its power witness
  bool certified = false;
  int iterations = 0;
  int oracle_calls = 0;
  std::vector<std::pair<double, double>> history;  ///< (Lb, Ub) per iteration
};

PolyblockResult polyblock_solve(const SubframeAssignment& a_n, const Scenario& s,
                                const PolyblockOptions& opt = {});

/// Every placement of `users` onto sub-bands within the cap, first user most significant.
/// Empty when |users| > M A_max.
std::vector<SubframeAssignment> enumerate_a_n(const std::vector<int>& users, int n, const Scenario& s);

class StateBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModpOptions {
  PolyblockOptions polyblock;
  std::uint64_t state_budget = std::uint64_t{1} << 20;
  std::ostream* trace = nullptr;  ///< one line per evaluated transition
};

/// DP over assigned-service sets with a polyblock solve per sub-frame placement.
/// K > N M A_max gives an infeasible result with nothing assigned.
SolveResult modp_solve(const Scenario& s, const ModpOptions& opt = {});

}  // namespace mdma
