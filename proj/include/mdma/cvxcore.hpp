#pragma once

#include <optional>
#include <vector>

#include "mdma/barrier.hpp"
#include "mdma/scenario.hpp"
#include "mdma/subframe.hpp"
#include "mdma/types.hpp"

namespace mdma {

inline constexpr double kFeasibilityTol = 1e-9;

struct FeasibilityProblem {
  const Scenario* scenario = nullptr;
  SubframeAssignment a_n;
  SinrVector z;  ///< K entries; only users of a_n are read
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<PowerAlloc> p;  ///< K entries, witness when feasible
  double slack = 0.0;           ///< optimal (or early-stopped) normalized max-min slack
};

/// Decide whether some p_n meets budget, box, NOMA fairness and the SINR rows at z.
/// Max-min-slack LP over p / P_max; feasible iff slack >= -kFeasibilityTol.
FeasibilityResult feasible_power(const FeasibilityProblem& problem);
/// With `exact_slack` the LP runs to optimality instead of stopping at the first nonnegative slack.
FeasibilityResult feasible_power(const SubframeModel& model, const SinrVector& z,
                                 bool exact_slack = false);

/// Convex-quadratic pieces of one SINR row written as a difference, per unit of row noise:
///   J = (I + sigma) / sigma,  A = (z + J)^2,  B = (z - J)^2,  sigma (A - B) / 4 = z (I + sigma).
/// Comm decode pairs give (A, B); sensing users give the same shapes (called C, D).
/// Gradients are over the stacked vector [z (K entries); p (K entries)].
struct DcTerm {
  int target = -1;
  int observer = -1;
  bool sensing = false;
  double interference = 0.0;  ///< I at the evaluation point
  double noise = 0.0;
  double qa = 0.0, qb = 0.0;
  Vec grad_a, grad_b;
};

struct DcTerms {
  std::vector<DcTerm> terms;
};

DcTerms dc_eval(const SinrVector& z, const PowerAlloc& p, const Assignment& a, const Scenario& s);

/// First-order expansion of the subtracted term B at the anchor: B(x_a) + grad_B(x_a)'(x - x_a).
/// `at_anchor` must come from dc_eval at `anchor`; both points are stacked [z; p].
double taylor_lower_bound(const DcTerm& at_anchor, const Vec& anchor, const Vec& query);

/// Stack (z, p) into the 2K vector dc_eval differentiates against.
Vec stack_zp(const SinrVector& z, const PowerAlloc& p);

struct P4Options {
  double tol = 1e-6;  ///< stationarity (duality-gap) target
  BarrierOptions barrier;
};

struct P4Result {
  SinrVector z;
  PowerAlloc p;
  double objective = 0.0;  ///< floored log-objective at the returned z
  double residual = 0.0;   ///< final barrier duality-gap bound
  bool warning = false;    ///< iteration cap hit before the gap target
  bool anchor_returned = false;
  int newton_steps = 0;
};

/// One SCA subproblem: maximize the floored log-objective over (z, p) with B and D replaced by
/// their Taylor bounds at the anchor. Users whose anchor z does not exceed z_min keep z = 0 and
/// impose no SINR row. Throws ConstraintViolation when the anchor breaks a P1 power constraint
/// or an SINR row by more than 1e-7 relative.
P4Result solve_p4(const Assignment& a, const SinrVector& z_anchor, const PowerAlloc& p_anchor,
                  const Scenario& s, const P4Options& opt = {});

/// Floored log-objective of one sub-frame at z, including latency terms.
double subframe_objective(const Scenario& s, const SubframeAssignment& a_n, const SinrVector& z);

}  // namespace mdma
