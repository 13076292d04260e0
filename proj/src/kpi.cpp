#include "mdma/kpi.hpp"

#include <limits>
#include <stdexcept>

namespace mdma {

namespace {

void require_assigned(const Assignment& a, int m, int n, int k, const Scenario& s, ServiceType t,
                      const char* what) {
  if (k < 0 || k >= s.num_users() || s.user(k).type != t)
    throw std::invalid_argument(std::string(what) + ": user " + std::to_string(k) +
                                " has the wrong service type");
  if (!a.a(k, m, n))
    throw std::invalid_argument(std::string(what) + ": user " + std::to_string(k) +
                                " is not assigned to RB (" + std::to_string(m) + ", " +
                                std::to_string(n) + ")");
}

// received BS power sum_{k' in C u P} a p chi over the RB, for the given gain row
template <class Gain>
double bs_power(const Assignment& a, const PowerAlloc& p, Rb rb, const Scenario& s, Gain gain) {
  double total = 0.0;
  for (int kp : a.users_in(rb.m, rb.n))
    if (s.user(kp).bs_powered()) total += p(kp) * gain(kp);
  return total;
}

}  // namespace

double comm_sinr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s) {
  require_assigned(a, m, n, k, s, ServiceType::Comm, "comm_sinr");
  const Rb rb{m, n};
  std::vector<int> comm;
  for (int j : a.users_in(m, n))
    if (s.user(j).type == ServiceType::Comm) comm.push_back(j);
  double best = std::numeric_limits<double>::infinity();
  for (int q : comm) {
    if (q > k) break;
    double interference = 0.0;
    for (int j : comm)
      if (j < k) interference += p(j) * s.link_gain(q, j, rb);
    best = std::min(best, p(k) * s.link_gain(q, k, rb) / (interference + s.user(q).noise));
  }
  return best;
}

double latency(int n, const RbGrid& grid) {
  if (n < 1 || n > grid.num_frames) throw std::out_of_range("sub-frame index out of range");
  return grid.frame_latency(n - 1);
}

Fim fim(int k, int m, int /*n*/, const Scenario& s) {
  if (s.user(k).type != ServiceType::Pos) throw std::invalid_argument("fim: not a positioning user");
  return fim_matrix(s.params().num_tx, s.grid().subcarriers, s.grid().symbols, s.user(k).angle,
                    s.round_trip(k, m));
}

CrbConstants crb_constants(int k, int m, int /*n*/, const Scenario& s) {
  if (s.user(k).type != ServiceType::Pos)
    throw std::invalid_argument("crb_constants: not a positioning user");
  return s.crb(k, m);
}

double pos_snr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s) {
  require_assigned(a, m, n, k, s, ServiceType::Pos, "pos_snr");
  const Rb rb{m, n};
  return bs_power(a, p, rb, s, [&](int kp) { return s.pos_gain(k, kp, rb); }) / s.pos_noise();
}

double chi2_inv(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("chi2_inv: probability must be in [0, 1)");
  return -2.0 * std::log1p(-p);
}

double sense_snr(const Assignment& a, const PowerAlloc& p, int m, int n, int k, const Scenario& s) {
  require_assigned(a, m, n, k, s, ServiceType::Sense, "sense_snr");
  const Rb rb{m, n};
  const UserService& u = s.user(k);
  const double interference = bs_power(a, p, rb, s, [&](int kp) { return s.link_gain(k, kp, rb); });
  return s.grid().subcarriers * s.grid().symbols * u.sense_power * s.echo_covariance(k, m) /
         (interference + u.noise);
}

SinrVector sinr_from_powers(const Assignment& a, const PowerAlloc& p, const Scenario& s) {
  SinrVector z = SinrVector::Zero(s.num_users());
  for (int k = 0; k < s.num_users(); ++k) {
    const auto& rb = a.rb(k);
    if (!rb) continue;
    switch (s.user(k).type) {
      case ServiceType::Comm: z(k) = comm_sinr(a, p, rb->m, rb->n, k, s); break;
      case ServiceType::Pos: z(k) = pos_snr(a, p, rb->m, rb->n, k, s); break;
      case ServiceType::Sense: z(k) = sense_snr(a, p, rb->m, rb->n, k, s); break;
    }
  }
  return z;
}

}  // namespace mdma
