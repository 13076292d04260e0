#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "mdma/dual.hpp"
#include "mdma/kpi.hpp"
#include "mdma/scenario.hpp"
#include "mdma/types.hpp"

namespace mdma {

namespace detail {

// sigmoid pieces of the two normalization branches
inline double shift_high(const KpiSpec& s) { return 1.0 / (1.0 + std::exp(-s.alpha * (s.beta - 1.0))); }
inline double shift_low(const KpiSpec& s) { return 1.0 / (1.0 + std::exp(s.alpha * (1.0 / s.beta - 1.0))); }

/// Base of the power alpha inside the middle branch, in (0, 1].
template <class S>
S middle_base(const S& q, const KpiSpec& s) {
  using std::exp;
  const S x = q / s.target - 1.0;
  if (s.direction == Direction::High) {
    const double b = shift_high(s);
    return (1.0 / (1.0 + exp(-s.alpha * x)) - b) / (0.5 - b);
  }
  const double b = shift_low(s);
  return (1.0 / (1.0 + exp(s.alpha * x)) - b) / (0.5 - b);
}

enum class Branch { Full, Middle, Zero };

// The breakpoints themselves resolve to the outer branches, whose values (1 and 0) the
// middle formula also attains there; this keeps them exact in floating point.
inline Branch branch(double q, const KpiSpec& s) {
  if (s.direction == Direction::High) {
    if (q >= s.target) return Branch::Full;
    return q <= s.beta * s.target ? Branch::Zero : Branch::Middle;
  }
  if (q <= s.target) return Branch::Full;
  return q >= s.target / s.beta ? Branch::Zero : Branch::Middle;
}

}  // namespace detail

/// Elastic value of an achieved KPI Q against its spec, in [0, 1].
template <class S>
S normalize(const S& q, const KpiSpec& s) {
  using std::pow;
  switch (detail::branch(value_of(q), s)) {
    case detail::Branch::Full: return S(1.0);
    case detail::Branch::Zero: return S(0.0);
    case detail::Branch::Middle: break;
  }
  const S base = detail::middle_base(q, s);
  if (value_of(base) <= 0.0) return S(0.0);
  return pow(base, s.alpha);
}

/// log of normalize; nullopt when the value is exactly zero.
template <class S>
std::optional<S> log_normalize_t(const S& q, const KpiSpec& s) {
  using std::log;
  switch (detail::branch(value_of(q), s)) {
    case detail::Branch::Full: return S(0.0);
    case detail::Branch::Zero: return std::nullopt;
    case detail::Branch::Middle: break;
  }
  const S base = detail::middle_base(q, s);
  if (value_of(base) <= 0.0) return std::nullopt;
  return s.alpha * log(base);
}

LogValue log_normalize(double q, const KpiSpec& s);

/// w log V with the solver floor; zero-weight terms are neutral.
template <class S>
S floored_term(const S& q, const KpiSpec& s) {
  if (s.weight == 0.0) return S(0.0);
  const auto lv = log_normalize_t(q, s);
  if (!lv) return S(kLogFloor);
  const S t = s.weight * *lv;
  return value_of(t) < kLogFloor ? S(kLogFloor) : t;
}

/// prod value_i^w_i with 0^0 = 1.
double user_vos(const std::vector<std::pair<double, double>>& values);

/// Lower threshold below which user k's value on sub-band rb.m is zero; 0 when unassigned.
/// Throws std::invalid_argument for a sensing spec with beta * target >= 1.
double z_min(const Scenario& s, int k, Rb rb, bool assigned);
SinrVector z_min_vector(const Assignment& a, const Scenario& s);

/// Smallest z at which every positive-weight z-dependent KPI of user k reaches its target
/// (the objective is flat above it); +inf when some target is unreachable.
double z_saturation(const Scenario& s, int k, int m);

/// Floored sum of the z-dependent log terms of user k on sub-band m.
template <class S>
S log_value_z(const Scenario& s, int k, int m, const S& z) {
  const UserService& u = s.user(k);
  const auto q = kpi_values(s, k, Rb{m, 0}, z);
  S total(0.0);
  for (int i = 0; i < latency_index(u); ++i) total += floored_term(q[i], u.kpis[i]);
  return total;
}

/// Floored latency term of user k on sub-frame n.
double log_value_latency(const Scenario& s, int k, int n);

struct ObjectiveValue {
  LogValue exact;  ///< sentinel when any positive-weight term is below range
  double floored = 0.0;
};

/// Per-user breakdown at a given z.
struct UserValue {
  std::vector<double> q;       ///< achieved KPIs
  std::vector<double> values;  ///< normalized values
  double vos = 0.0;
  ObjectiveValue log;
};

UserValue evaluate_user(const Scenario& s, int k, Rb rb, double z);

/// Sum over assigned services of w log V; z is read at each user's own RB.
/// Throws ConstraintViolation when a breaks the cap or the grid bounds.
ObjectiveValue objective_L(const Assignment& a, const SinrVector& z, const Scenario& s);

}  // namespace mdma
