#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "mdma/dual.hpp"
#include "mdma/fim.hpp"
#include "mdma/scenario.hpp"
#include "mdma/types.hpp"

namespace mdma {

/// SIC-decoded SINR of comm user k: min over co-assigned near users q <= k of gamma_qk.
/// Throws std::invalid_argument unless k is a comm user assigned to (m, n).
double comm_sinr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s);

/// log2(1 + z)
template <class S>
S comm_rate(const S& z) {
  using std::log1p;
  return log1p(z) / std::numbers::ln2;
}

/// n L T for sub-frame n counted from 1; throws std::out_of_range outside [1, N].
double latency(int n, const RbGrid& grid);

Fim fim(int k, int m, int n, const Scenario& s);
/// Cached per scenario; n does not enter.
CrbConstants crb_constants(int k, int m, int n, const Scenario& s);

double pos_snr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s);

/// I / z per component; +inf at z = 0.
template <class S>
std::array<S, 3> pos_crb(const S& z, const CrbConstants& c) {
  return {S(c.angle) / z, S(c.distance) / z, S(c.velocity) / z};
}

/// Chi-square with two degrees of freedom.
inline double chi2_cdf(double x) { return -std::expm1(-0.5 * x); }
/// Throws std::invalid_argument unless p in [0, 1).
double chi2_inv(double p);

double sense_snr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s);

/// 1 - F(F^-1(1 - P_FA) / (z + 1)), which reduces to P_FA^(1/(z+1)).
template <class S>
S detect_prob(const S& z, double false_alarm) {
  if constexpr (std::is_same_v<S, double>) {
    return std::pow(false_alarm, 1.0 / (z + 1.0));
  } else {
    using std::exp;
    return exp(std::log(false_alarm) / (z + 1.0));
  }
}

/// z for every assigned user at its RB, zero elsewhere.
SinrVector sinr_from_powers(const Assignment& a, const PowerAlloc& p, const Scenario& s);

/// Achieved KPI values of user k on sub-band m given its auxiliary z; latency from sub-frame n.
/// Ordered like UserService::kpis.
template <class S>
std::vector<S> kpi_values(const Scenario& s, int k, Rb rb, const S& z) {
  const UserService& u = s.user(k);
  const S lat(s.grid().frame_latency(rb.n));
  switch (u.type) {
    case ServiceType::Comm:
      return {comm_rate(z), lat};
    case ServiceType::Pos: {
      const auto q = pos_crb(z, s.crb(k, rb.m));
      return {q[0], q[1], q[2], lat};
    }
    case ServiceType::Sense:
      return {detect_prob(z, u.false_alarm), lat};
  }
  return {};
}

/// Index of the z-independent latency KPI inside UserService::kpis.
inline int latency_index(const UserService& u) { return static_cast<int>(u.kpis.size()) - 1; }

}  // namespace mdma
