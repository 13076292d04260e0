#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mdma/cvxcore.hpp"
#include "mdma/result.hpp"
#include "mdma/scenario.hpp"
#include "mdma/types.hpp"

namespace mdma {

/// Distance-proportional powers of the BS-powered users in RB (m, n); the denominator runs over
/// every BS-powered user of sub-frame n. K entries, zero outside the RB.
PowerAlloc fixed_power(const Assignment& a, int m, int n, const Scenario& s);
/// fixed_power over every RB.
PowerAlloc fixed_power(const Assignment& a, const Scenario& s);

struct VosAssignmentStats {
  int iterations = 0;  ///< while-loop rounds, all phases
  int swaps = 0;
  int max_phase_iterations = 0;
};

/// VoS-prioritized greedy placement with per-phase caps A = 1..A_max and full-RB swaps.
/// Users beyond the RB capacity stay unassigned.
Assignment vos_prioritized_assignment(const Scenario& s, std::uint64_t seed,
                                      VosAssignmentStats* stats = nullptr);

struct ScaOptions {
  double eps = 1e-4;  ///< stop when one round gains less than this
  int max_iter = 50;
  double rescue_margin = 1e-3;  ///< rescue anchors aim at z_min (1 + margin)
  P4Options p4;
};

struct ScaResult {
  PowerAlloc p;
  SinrVector z;  ///< induced by p
  double objective = 0.0;     ///< floored, assigned users only
  std::vector<double> trace;  ///< objective after the anchor and after each P4 round
  bool below_range = false;   ///< no anchor put any user above z_min
  int iterations = 0;
  bool warning = false;
};

/// SCA power allocation for a fixed assignment; each sub-frame is solved on its own.
ScaResult sca_power(const Assignment& a, const Scenario& s, const ScaOptions& opt = {});

struct SwapOptions {
  int max_sweeps = 20;
  std::uint64_t seed = 0;
  ScaOptions sca;
};

/// Single-service moves to other RBs, each scored by sca_power, accepted on strict improvement.
SolveResult swap_refine(const Assignment& a0, const Scenario& s, const SwapOptions& opt = {});

}  // namespace mdma
