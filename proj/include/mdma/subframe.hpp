#pragma once

#include <utility>
#include <vector>

#include "mdma/scenario.hpp"
#include "mdma/types.hpp"

namespace mdma {

/// One SINR-type bound  z_target * (sum_j interference_j p_j + noise) <= sum_j signal_j p_j + signal_const.
/// Comm decode pairs, positioning SNRs and sensing SNRs all take this shape.
struct SinrRow {
  int target = -1;    ///< user whose z is bounded
  int observer = -1;  ///< decoding user q for comm rows, target otherwise
  std::vector<std::pair<int, double>> signal;
  double signal_const = 0.0;
  std::vector<std::pair<int, double>> interference;
  double noise = 0.0;

  double signal_at(const PowerAlloc& p) const;
  double interference_at(const PowerAlloc& p) const;
  /// signal - z (interference + noise); >= 0 when satisfied.
  double residual(double z, const PowerAlloc& p) const;
};

/// NOMA ordering p_hi g_hi >= p_lo g_lo seen by one observer.
struct FairnessRow {
  int observer = -1;
  int hi = -1, lo = -1;
  double g_hi = 0.0, g_lo = 0.0;
  double residual(const PowerAlloc& p) const { return p(hi) * g_hi - p(lo) * g_lo; }
};

/// Constraint structure of one sub-frame for fixed a_n.
struct SubframeModel {
  int n = 0;
  SubframeAssignment a_n;
  std::vector<int> powered;  ///< BS-powered users in the sub-frame, ascending
  std::vector<SinrRow> rows;
  std::vector<FairnessRow> fairness;
  double p_max = 1.0;
  int num_users = 0;  ///< K, for sizing full vectors

  bool has_power(int k) const;
  /// Largest violation over budget, box, fairness and SINR rows at (z, p); 0 when feasible.
  double max_violation(const SinrVector& z, const PowerAlloc& p) const;
  /// Same, but only budget, box and fairness (the P1 power constraints).
  double power_violation(const PowerAlloc& p) const;
};

SubframeModel build_subframe_model(const Scenario& s, const SubframeAssignment& a_n);

/// Largest z each user of the sub-frame can claim at powers p (min over its rows); K entries.
SinrVector induced_sinr(const SubframeModel& model, const PowerAlloc& p);

}  // namespace mdma
