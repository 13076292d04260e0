#include "mdma/vosmetric.hpp"

#include <limits>
#include <stdexcept>

namespace mdma {

LogValue log_normalize(double q, const KpiSpec& s) {
  const auto lv = log_normalize_t(q, s);
  return lv ? LogValue(*lv) : LogValue::below_range();
}

double user_vos(const std::vector<std::pair<double, double>>& values) {
  double out = 1.0;
  for (const auto& [v, w] : values) {
    if (w == 0.0) continue;
    if (v == 0.0) return 0.0;
    out *= std::pow(v, w);
  }
  return out;
}

double z_min(const Scenario& s, int k, Rb rb, bool assigned) {
  if (!assigned) return 0.0;
  const UserService& u = s.user(k);
  switch (u.type) {
    case ServiceType::Comm: {
      const KpiSpec& r = u.kpis[0];
      return std::exp2(r.beta * r.target) - 1.0;
    }
    case ServiceType::Pos: {
      const CrbConstants& c = s.crb(k, rb.m);
      const double num[3] = {c.angle, c.distance, c.velocity};
      double out = 0.0;
      for (int i = 0; i < 3; ++i) out = std::max(out, u.kpis[i].beta * num[i] / u.kpis[i].target);
      return out;
    }
    case ServiceType::Sense: {
      const KpiSpec& d = u.kpis[0];
      const double floor_prob = d.beta * d.target;
      if (!(floor_prob < 1.0))
        throw std::invalid_argument("z_min: sensing beta * target must be below 1");
      // F^-1(1 - P_FA) / F^-1(1 - beta Q) - 1 with F^-1(p) = -2 ln(1 - p)
      return std::max(0.0, std::log(u.false_alarm) / std::log(floor_prob) - 1.0);
    }
  }
  return 0.0;
}

SinrVector z_min_vector(const Assignment& a, const Scenario& s) {
  SinrVector out = SinrVector::Zero(s.num_users());
  for (int k = 0; k < s.num_users(); ++k)
    if (a.rb(k)) out(k) = z_min(s, k, *a.rb(k), true);
  return out;
}

double z_saturation(const Scenario& s, int k, int m) {
  const UserService& u = s.user(k);
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (u.type) {
    case ServiceType::Comm:
      return u.kpis[0].weight > 0 ? std::exp2(u.kpis[0].target) - 1.0 : 0.0;
    case ServiceType::Pos: {
      const CrbConstants& c = s.crb(k, m);
      const double num[3] = {c.angle, c.distance, c.velocity};
      double out = 0.0;
      for (int i = 0; i < 3; ++i)
        if (u.kpis[i].weight > 0) out = std::max(out, num[i] / u.kpis[i].target);
      return out;
    }
    case ServiceType::Sense: {
      const KpiSpec& d = u.kpis[0];
      if (d.weight == 0) return 0.0;
      if (d.target >= 1.0) return inf;
      return std::max(0.0, std::log(u.false_alarm) / std::log(d.target) - 1.0);
    }
  }
  return inf;
}

double log_value_latency(const Scenario& s, int k, int n) {
  const UserService& u = s.user(k);
  const int i = latency_index(u);
  return floored_term(s.grid().frame_latency(n), u.kpis[i]);
}

UserValue evaluate_user(const Scenario& s, int k, Rb rb, double z) {
  const UserService& u = s.user(k);
  UserValue out;
  out.q = kpi_values(s, k, rb, z);
  std::vector<std::pair<double, double>> vw;
  LogValue exact(0.0);
  double floored = 0.0;
  for (size_t i = 0; i < u.kpis.size(); ++i) {
    const KpiSpec& spec = u.kpis[i];
    const double v = normalize(out.q[i], spec);
    out.values.push_back(v);
    vw.emplace_back(v, spec.weight);
    floored += floored_term(out.q[i], spec);
    if (spec.weight == 0.0) continue;
    const LogValue lv = log_normalize(out.q[i], spec);
    exact = exact + (lv.is_below_range() ? lv : LogValue(spec.weight * lv.value()));
  }
  out.vos = user_vos(vw);
  out.log = {exact, floored};
  return out;
}

ObjectiveValue objective_L(const Assignment& a, const SinrVector& z, const Scenario& s) {
  if (a.num_users() != s.num_users() || a.num_bands() != s.grid().num_bands ||
      a.num_frames() != s.grid().num_frames)
    throw ConstraintViolation("objective_L: assignment shape does not match the scenario");
  if (!a.respects_cap(s.params().a_max))
    throw ConstraintViolation("objective_L: assignment breaks the per-RB cap");
  if (z.size() != s.num_users()) throw ConstraintViolation("objective_L: z has the wrong size");
  ObjectiveValue out{LogValue(0.0), 0.0};
  for (int k = 0; k < s.num_users(); ++k) {
    if (!a.rb(k)) continue;
    if (!(z(k) >= 0.0)) throw ConstraintViolation("objective_L: negative z");
    const UserValue uv = evaluate_user(s, k, *a.rb(k), z(k));
    out.exact = out.exact + uv.log.exact;
    out.floored += uv.log.floored;
  }
  return out;
}

}  // namespace mdma
