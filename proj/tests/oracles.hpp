#pragma once
// Independent reference computations shared by the unit tests and the acceptance binary.
// Nothing here calls the solver modules; objectives are evaluated from (a, p) through kpi and
// vosmetric only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "mdma/fim.hpp"
#include "mdma/kpi.hpp"
#include "mdma/scenario.hpp"
#include "mdma/vosmetric.hpp"

namespace oracle {

using mdma::Assignment;
using mdma::PowerAlloc;
using mdma::Rb;
using mdma::Scenario;

// FIM template summed term by term over antennas, subcarriers and symbols.
inline mdma::Fim fim_loop(int num_tx, int subcarriers, int symbols, double theta, double rho) {
  mdma::Fim j = mdma::Fim::Zero();
  const double c = std::cos(theta);
  for (int l = 0; l < num_tx; ++l)
    for (int b = 0; b < subcarriers; ++b)
      for (int s = 0; s < symbols; ++s) {
        Eigen::Matrix<double, 5, 1> g;
        g << l * c, b, s, 0.0, 1.0;
        mdma::Fim t = rho * rho * g * g.transpose();
        t(3, 3) = 1.0;  // rho^2 * (1 / rho^2)
        j += t;
      }
  return j;
}

inline mdma::CrbConstants crb_loop(int num_tx, int subcarriers, int symbols, double theta,
                                   double rho, double df, double symbol_t, double f_m,
                                   double c_light) {
  // symmetric diagonal scaling first: the amplitude entry and the rho^2 block differ by ~1e18
  const mdma::Fim j = fim_loop(num_tx, subcarriers, symbols, theta, rho);
  const Eigen::Matrix<double, 5, 1> d = j.diagonal().cwiseSqrt().cwiseInverse();
  const mdma::Fim inv = d.asDiagonal() * (d.asDiagonal() * j * d.asDiagonal()).fullPivLu().inverse() *
                        d.asDiagonal();
  const double pi = std::numbers::pi;
  return {0.5 * inv(0, 0), c_light * c_light / (32.0 * pi * pi * df * df) * inv(1, 1),
          c_light * c_light / (32.0 * pi * pi * symbol_t * symbol_t * f_m * f_m) * inv(2, 2)};
}

// (P1) power constraints of one sub-frame written out from the problem statement.
inline bool power_feasible(const Scenario& s, const Assignment& a, int n, const PowerAlloc& p,
                           double tol = 1e-12) {
  const double pm = s.params().p_max;
  double sum = 0.0;
  for (int k : a.users_in_frame(n)) {
    if (!s.user(k).bs_powered()) continue;
    if (p(k) < -tol * pm || p(k) > pm * (1.0 + tol)) return false;
    sum += p(k);
  }
  if (sum > pm * (1.0 + tol)) return false;
  for (int m = 0; m < s.grid().num_bands; ++m) {
    std::vector<int> comm;
    for (int k : a.users_in(m, n))
      if (s.user(k).type == mdma::ServiceType::Comm) comm.push_back(k);
    const Rb rb{m, n};
    for (int k : comm)
      for (size_t x = 0; x < comm.size(); ++x)
        for (size_t y = x + 1; y < comm.size(); ++y) {
          const int j = comm[x], q = comm[y];
          if (p(q) * s.link_gain(k, q, rb) < p(j) * s.link_gain(k, j, rb) * (1.0 - tol) - tol * pm)
            return false;
        }
  }
  return true;
}

// Floored objective of the services of sub-frame n at powers p.
inline double frame_value(const Scenario& s, const Assignment& a, int n, const PowerAlloc& p) {
  Assignment only(s.num_users(), s.grid().num_bands, s.grid().num_frames);
  for (int k : a.users_in_frame(n)) only.assign(k, *a.rb(k));
  return mdma::objective_L(only, mdma::sinr_from_powers(only, p, s), s).floored;
}

struct GridBest {
  double value = -std::numeric_limits<double>::infinity();
  PowerAlloc p;
};

// Exhaustive grid over the powers of the BS-powered services of sub-frame n:
// `steps` levels per dimension on [0, P_max], restricted to the feasible set.
inline GridBest frame_grid_best(const Scenario& s, const Assignment& a, int n, int steps) {
  std::vector<int> powered;
  for (int k : a.users_in_frame(n))
    if (s.user(k).bs_powered()) powered.push_back(k);
  const double pm = s.params().p_max;
  GridBest best;
  PowerAlloc p = PowerAlloc::Zero(s.num_users());
  std::function<void(size_t, double)> walk = [&](size_t i, double used) {
    if (i == powered.size()) {
      if (!power_feasible(s, a, n, p)) return;
      const double v = frame_value(s, a, n, p);
      if (v > best.value) {
        best.value = v;
        best.p = p;
      }
      return;
    }
    for (int g = 0; g < steps; ++g) {
      const double x = pm * g / (steps - 1);
      if (used + x > pm * (1.0 + 1e-12)) break;
      p(powered[i]) = x;
      walk(i + 1, used + x);
    }
    p(powered[i]) = 0.0;
  };
  walk(0, 0.0);
  return best;
}

// Best floored objective over every complete assignment within the RB cap, with the power grid
// per sub-frame. Sub-frames are independent once the assignment is fixed.
inline double brute_force_optimum(const Scenario& s, int steps) {
  const int k_count = s.num_users();
  const int m_count = s.grid().num_bands, n_count = s.grid().num_frames;
  const int rbs = m_count * n_count;
  std::map<std::vector<int>, double> frame_cache;  // key: n then band per user (-1 absent)
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> choice(k_count, 0);
  for (;;) {
    Assignment a(k_count, m_count, n_count);
    for (int k = 0; k < k_count; ++k) a.assign(k, Rb{choice[k] % m_count, choice[k] / m_count});
    if (a.respects_cap(s.params().a_max)) {
      double total = 0.0;
      for (int n = 0; n < n_count; ++n) {
        std::vector<int> key{n};
        for (int k = 0; k < k_count; ++k) key.push_back(a.rb(k)->n == n ? a.rb(k)->m : -1);
        auto it = frame_cache.find(key);
        if (it == frame_cache.end())
          it = frame_cache.emplace(key, frame_grid_best(s, a, n, steps).value).first;
        total += it->second;
      }
      best = std::max(best, total);
    }
    int i = k_count - 1;
    while (i >= 0 && choice[i] == rbs - 1) choice[i--] = 0;
    if (i < 0) break;
    ++choice[i];
  }
  return best;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    for (size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * (i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
