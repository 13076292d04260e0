#pragma once

#include <string>
#include <vector>

#include "mdma/scenario.hpp"
#include "mdma/types.hpp"
#include "mdma/vosmetric.hpp"

namespace mdma {

struct SolverDiagnostics {
  std::string algorithm;
  bool certified = false;    ///< MODP: every polyblock met its (1+eps) certificate
  bool infeasible = false;   ///< more services than RB capacity
  bool below_range = false;  ///< SCA found no anchor above z_min
  int iterations = 0;        ///< polyblock / SCA / swap iterations, summed
  double upper_bound = 0.0;  ///< MODP: sum of the per-transition upper bounds
  double dp_value = 0.0;     ///< MODP: DP value of the chosen path (polyblock lower bounds)
  std::vector<double> trace; ///< SCA objective trace of the final assignment
};

/// Everything a solver returns, recomputed from (a, p) so the stored values are consistent.
struct SolveResult {
  Assignment assignment;
  PowerAlloc p;
  SinrVector z;
  /// Floored objective; each unassigned service contributes LOG_FLOOR per positive-weight KPI.
  double log_objective = 0.0;
  LogValue exact_log;       ///< sentinel when any service is valued zero or unassigned
  double product_vos = 0.0; ///< prod_k V_k
  std::vector<UserValue> users;  ///< empty q/values for unassigned services
  std::vector<int> unassigned;
  double wall_ms = 0.0;
  SolverDiagnostics diag;

  /// Mean VoS over services of one type (0 for unassigned ones); NaN when the type is absent.
  double mean_vos(const Scenario& s, ServiceType t) const;
};

/// Floored penalty of leaving service k unassigned.
double unassigned_penalty(const Scenario& s, int k);

/// Build a result from (a, p): z is the SINR the powers induce.
SolveResult make_result(const Scenario& s, const Assignment& a, const PowerAlloc& p);

/// Largest P1 violation of (a, p): cap, single placement, budget, box and NOMA fairness.
double p1_violation(const Scenario& s, const Assignment& a, const PowerAlloc& p);

}  // namespace mdma
