#include "mdma/result.hpp"

#include <cmath>
#include <limits>

#include "mdma/kpi.hpp"
#include "mdma/subframe.hpp"

namespace mdma {

double SolveResult::mean_vos(const Scenario& s, ServiceType t) const {
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < s.num_users(); ++k) {
    if (s.user(k).type != t) continue;
    sum += users.at(k).vos;
    ++count;
  }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double unassigned_penalty(const Scenario& s, int k) {
  double out = 0.0;
  for (const auto& spec : s.user(k).kpis)
    if (spec.weight > 0.0) out += kLogFloor;
  return out;
}

SolveResult make_result(const Scenario& s, const Assignment& a, const PowerAlloc& p) {
  SolveResult r;
  r.assignment = a;
  r.p = PowerAlloc::Zero(s.num_users());
  for (int k = 0; k < s.num_users(); ++k)
    if (a.is_assigned(k) && s.user(k).bs_powered()) r.p(k) = p(k);
  r.z = sinr_from_powers(a, r.p, s);
  const ObjectiveValue obj = objective_L(a, r.z, s);
  r.log_objective = obj.floored;
  r.exact_log = obj.exact;
  r.product_vos = 1.0;
  r.users.resize(s.num_users());
  for (int k = 0; k < s.num_users(); ++k) {
    if (!a.rb(k)) {
      r.unassigned.push_back(k);
      r.log_objective += unassigned_penalty(s, k);
      r.exact_log = LogValue::below_range();
      r.product_vos = 0.0;
      continue;
    }
    r.users[k] = evaluate_user(s, k, *a.rb(k), r.z(k));
    r.product_vos *= r.users[k].vos;
  }
  return r;
}

double p1_violation(const Scenario& s, const Assignment& a, const PowerAlloc& p) {
  double worst = a.respects_cap(s.params().a_max) ? 0.0 : 1.0;
  for (int n = 0; n < s.grid().num_frames; ++n) {
    const SubframeModel model = build_subframe_model(s, slice(a, n));
    worst = std::max(worst, model.power_violation(p));
  }
  return worst;
}

}  // namespace mdma
