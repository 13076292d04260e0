#include "mdma/subframe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdma {

double SinrRow::signal_at(const PowerAlloc& p) const {
  double s = signal_const;
  for (const auto& [j, g] : signal) s += g * p(j);
  return s;
}

double SinrRow::interference_at(const PowerAlloc& p) const {
  double s = 0.0;
  for (const auto& [j, g] : interference) s += g * p(j);
  return s;
}

double SinrRow::residual(double z, const PowerAlloc& p) const {
  return signal_at(p) - z * (interference_at(p) + noise);
}

bool SubframeModel::has_power(int k) const {
  return std::binary_search(powered.begin(), powered.end(), k);
}

double SubframeModel::power_violation(const PowerAlloc& p) const {
  double worst = 0.0, total = 0.0;
  for (int k : powered) {
    total += p(k);
    worst = std::max({worst, -p(k) / p_max, (p(k) - p_max) / p_max});
  }
  worst = std::max(worst, (total - p_max) / p_max);
  for (const auto& f : fairness) {
    const double scale = std::max({p(f.hi) * f.g_hi, p(f.lo) * f.g_lo, 1e-300});
    worst = std::max(worst, -f.residual(p) / scale);
  }
  return worst;
}

double SubframeModel::max_violation(const SinrVector& z, const PowerAlloc& p) const {
  double worst = power_violation(p);
  for (const auto& r : rows) {
    // in SINR units, relative to max(1, z)
    const double achievable = r.signal_at(p) / (r.interference_at(p) + r.noise);
    const double zt = z(r.target);
    worst = std::max(worst, (zt - achievable) / std::max(1.0, zt));
  }
  return worst;
}

SubframeModel build_subframe_model(const Scenario& s, const SubframeAssignment& a_n) {
  SubframeModel out;
  out.n = a_n.n;
  out.a_n = a_n;
  out.p_max = s.params().p_max;
  out.num_users = s.num_users();
  for (int k : a_n.users)
    if (s.user(k).bs_powered()) out.powered.push_back(k);

  for (int m = 0; m < s.grid().num_bands; ++m) {
    const Rb rb{m, a_n.n};
    std::vector<int> in_rb, comm, bs;
    for (size_t i = 0; i < a_n.users.size(); ++i)
      if (a_n.bands[i] == m) in_rb.push_back(a_n.users[i]);
    std::sort(in_rb.begin(), in_rb.end());
    for (int k : in_rb) {
      if (s.user(k).type == ServiceType::Comm) comm.push_back(k);
      if (s.user(k).bs_powered()) bs.push_back(k);
    }

    for (int k : in_rb) {
      const UserService& u = s.user(k);
      if (u.type == ServiceType::Comm) {
        for (int q : comm) {
          if (q > k) break;
          SinrRow r;
          r.target = k;
          r.observer = q;
          r.signal = {{k, s.link_gain(q, k, rb)}};
          for (int j : comm)
            if (j < k) r.interference.emplace_back(j, s.link_gain(q, j, rb));
          r.noise = s.user(q).noise;
          out.rows.push_back(std::move(r));
        }
      } else if (u.type == ServiceType::Pos) {
        SinrRow r;
        r.target = r.observer = k;
        for (int j : bs) r.signal.emplace_back(j, s.pos_gain(k, j, rb));
        r.noise = s.pos_noise();
        out.rows.push_back(std::move(r));
      } else {
        SinrRow r;
        r.target = r.observer = k;
        r.signal_const =
            s.grid().subcarriers * s.grid().symbols * u.sense_power * s.echo_covariance(k, m);
        for (int j : bs) r.interference.emplace_back(j, s.link_gain(k, j, rb));
        r.noise = u.noise;
        out.rows.push_back(std::move(r));
      }
    }

    // every observer k, every co-assigned pair j < q
    for (int k : comm)
      for (size_t lo = 0; lo < comm.size(); ++lo)
        for (size_t hi = lo + 1; hi < comm.size(); ++hi) {
          FairnessRow f;
          f.observer = k;
          f.lo = comm[lo];
          f.hi = comm[hi];
          f.g_lo = s.link_gain(k, f.lo, rb);
          f.g_hi = s.link_gain(k, f.hi, rb);
          out.fairness.push_back(f);
        }
  }
  return out;
}

SinrVector induced_sinr(const SubframeModel& model, const PowerAlloc& p) {
  SinrVector z = SinrVector::Constant(model.num_users, std::numeric_limits<double>::infinity());
  for (const auto& r : model.rows)
    z(r.target) = std::min(z(r.target), r.signal_at(p) / (r.interference_at(p) + r.noise));
  for (int k = 0; k < model.num_users; ++k)
    if (!std::isfinite(z(k))) z(k) = 0.0;
  return z;
}

}  // namespace mdma
