#include "mdma/modp.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "mdma/cvxcore.hpp"
#include "mdma/vosmetric.hpp"

namespace mdma {

SinrVector initial_vertex(const SubframeAssignment& a_n, const Scenario& s) {
  SinrVector z0 = SinrVector::Zero(s.num_users());
  const double pm = s.params().p_max;
  for (size_t i = 0; i < a_n.users.size(); ++i) {
    const int k = a_n.users[i];
    const int m = a_n.bands[i];
    const Rb rb{m, a_n.n};
    const UserService& u = s.user(k);
    double v = 0.0;
    for (size_t j = 0; j < a_n.users.size(); ++j) {
      if (a_n.bands[j] != m) continue;
      const int q = a_n.users[j];
      const UserService& uq = s.user(q);
      if (u.type == ServiceType::Comm && uq.type == ServiceType::Comm && q <= k)
        v = std::max(v, pm * s.link_gain(q, k, rb) / uq.noise);
      if (u.type == ServiceType::Pos && uq.bs_powered()) v += pm * s.pos_gain(k, q, rb);
    }
    if (u.type == ServiceType::Pos) v /= s.pos_noise();
    if (u.type == ServiceType::Sense)
      v = s.grid().subcarriers * s.grid().symbols * u.sense_power * s.echo_covariance(k, m) /
          u.noise;
    z0(k) = v;
  }
  return z0;
}

Projection project(const SinrVector& vertex, const SubframeModel& model, double bisect_tol) {
  Projection out;
  auto feasible_at = [&](double d) {
    ++out.oracle_calls;
    return feasible_power(model, d * vertex).p;
  };
  if (auto p = feasible_at(1.0)) {
    out.point = vertex;
    out.p = *p;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  PowerAlloc plo = PowerAlloc::Zero(model.num_users);
  while (hi - lo > bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    if (auto p = feasible_at(mid)) {
      lo = mid;
      plo = *p;
    } else {
      hi = mid;
    }
  }
  out.delta = lo;
  out.delta_ub = hi;
  out.point = lo * vertex;
  out.p = plo;
  return out;
}

PolyblockResult polyblock_solve(const SubframeAssignment& a_n, const Scenario& s,
                                const PolyblockOptions& opt) {
  const int K = s.num_users();
  PolyblockResult out;
  out.z = SinrVector::Zero(K);
  out.p = PowerAlloc::Zero(K);
  if (a_n.empty()) {
    out.certified = true;
    return out;
  }
  const SubframeModel model = build_subframe_model(s, a_n);
  auto value = [&](const SinrVector& z) { return subframe_objective(s, a_n, z); };

  SinrVector z0 = initial_vertex(a_n, s);
  if (opt.clip_saturation)
    for (size_t i = 0; i < a_n.users.size(); ++i) {
      const int k = a_n.users[i];
      z0(k) = std::min(z0(k), z_saturation(s, k, a_n.bands[i]));
    }

  struct Vertex {
    SinrVector z;
    double f;
  };
  std::vector<Vertex> verts{{z0, value(z0)}};
  double lb = -std::numeric_limits<double>::infinity();
  double ub = verts[0].f;

  for (;;) {
    if (verts.empty()) {
      ub = lb;
      out.certified = true;
      break;
    }
    const auto top = std::max_element(verts.begin(), verts.end(),
                                      [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    ub = top->f;
    out.history.emplace_back(lb, ub);
    if (std::isfinite(lb) && ub - lb <= opt.eps * std::abs(lb) + opt.abs_tol) {
      out.certified = true;
      break;
    }
    if (out.iterations >= opt.max_iter) break;
    ++out.iterations;

    const Vertex v = *top;
    verts.erase(top);
    const Projection pr = project(v.z, model, opt.bisect_tol);
    out.oracle_calls += pr.oracle_calls;

    // the witness powers usually support more than the projected point
    const SinrVector induced = induced_sinr(model, pr.p);
    const double f_point = value(pr.point), f_induced = value(induced);
    const double cand = std::max(f_point, f_induced);
    if (cand > lb) {
      lb = cand;
      out.z = f_induced >= f_point ? induced : pr.point;
      out.p = pr.p;
    }

    if (pr.delta < 1.0) {
      for (int k : a_n.users) {
        if (!(v.z(k) > 0.0)) continue;
        SinrVector c = v.z;
        c(k) = pr.delta_ub * v.z(k);
        if (c(k) < opt.tiny * z0(k)) continue;
        const double f = value(c);
        if (opt.prune) {
          if (f <= lb) continue;
          const bool dominated = std::any_of(verts.begin(), verts.end(), [&](const Vertex& u) {
            return (c.array() <= u.z.array()).all();
          });
          if (dominated) continue;
        }
        verts.push_back({std::move(c), f});
      }
    }
    if (opt.prune)
      std::erase_if(verts, [lb](const Vertex& u) { return u.f <= lb; });
  }
  out.lower = lb;
  out.upper = ub;
  return out;
}

std::vector<SubframeAssignment> enumerate_a_n(const std::vector<int>& users, int n,
                                              const Scenario& s) {
  const int M = s.grid().num_bands;
  const int cap = s.params().a_max;
  const int d = static_cast<int>(users.size());
  std::vector<SubframeAssignment> out;
  if (d > M * cap) return out;
  std::vector<int> sorted = users;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> bands(d, 0);
  for (;;) {
    std::vector<int> count(M, 0);
    bool ok = true;
    for (int b : bands) ok = ok && ++count[b] <= cap;
    if (ok) out.push_back({n, sorted, bands});
    // odometer, last user least significant
    int i = d - 1;
    while (i >= 0 && bands[i] == M - 1) bands[i--] = 0;
    if (i < 0) break;
    ++bands[i];
  }
  return out;
}

namespace {

struct Transition {
  double value = 0.0;
  double upper = 0.0;
  SubframeAssignment a_n;
  SinrVector z;
  PowerAlloc p;
};

struct Cell {
  bool reached = false;
  double value = 0.0;
  double upper = 0.0;
  std::uint64_t prev = 0;
};

std::vector<int> bits_of(std::uint64_t mask) {
  std::vector<int> out;
  for (int k = 0; mask; ++k, mask >>= 1)
    if (mask & 1) out.push_back(k);
  return out;
}

}  // namespace

SolveResult modp_solve(const Scenario& s, const ModpOptions& opt) {
  using clock = std::chrono::steady_clock;
  const int K = s.num_users();
  const int N = s.grid().num_frames;
  const int M = s.grid().num_bands;
  const int cap = M * s.params().a_max;
  if (K > 63) throw StateBudgetExceeded("modp_solve: more than 63 services");
  const long double states = static_cast<long double>(N + 1) * std::ldexp(1.0L, K);
  if (states > static_cast<long double>(opt.state_budget))
    throw StateBudgetExceeded("modp_solve: state count exceeds the budget");

  if (K > N * cap) {
    SolveResult r = make_result(s, Assignment(K, M, N), PowerAlloc::Zero(K));
    r.diag.algorithm = "MODP";
    r.diag.infeasible = true;
    return r;
  }

  const std::uint64_t full = K ? (~std::uint64_t{0} >> (64 - K)) : 0;
  const std::size_t width = std::size_t{1} << K;
  std::vector<std::vector<Cell>> table(N + 1, std::vector<Cell>(width));
  table[0][0].reached = true;
  std::map<std::pair<int, std::uint64_t>, Transition> memo;
  bool certified = true;
  int iterations = 0;

  auto transition = [&](int n, std::uint64_t add) -> const Transition& {
    const auto key = std::make_pair(n, add);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Transition best;
    best.value = -std::numeric_limits<double>::infinity();
    best.upper = best.value;
    best.z = SinrVector::Zero(K);
    best.p = PowerAlloc::Zero(K);
    const auto placements = enumerate_a_n(bits_of(add), n, s);
    for (const auto& a_n : placements) {
      const PolyblockResult pb = polyblock_solve(a_n, s, opt.polyblock);
      certified = certified && pb.certified;
      iterations += pb.iterations;
      best.upper = std::max(best.upper, pb.upper);
      if (pb.lower > best.value) {
        best.value = pb.lower;
        best.a_n = a_n;
        best.z = pb.z;
        best.p = pb.p;
      }
    }
    return memo.emplace(key, std::move(best)).first->second;
  };

  for (int n = 0; n < N; ++n) {
    const int frames_left = N - n - 1;
    for (std::uint64_t S = 0; S <= full; ++S) {
      const Cell& from = table[n][S];
      if (!from.reached) continue;
      const std::uint64_t comp = full & ~S;
      const int left = std::popcount(comp);
      // ascending submasks of comp, starting with the empty set
      std::uint64_t add = 0;
      do {
        const int size = std::popcount(add);
        if (size <= cap && left - size <= frames_left * cap) {
          const auto t0 = clock::now();
          const Transition& tr = transition(n, add);
          if (std::isfinite(tr.value)) {
            const double value = from.value + tr.value;
            const double upper = from.upper + tr.upper;
            Cell& to = table[n + 1][S | add];
            if (!to.reached || value > to.value) {
              to.value = value;
              to.prev = S;
            }
            to.upper = to.reached ? std::max(to.upper, upper) : upper;
            to.reached = true;
            if (opt.trace)
              *opt.trace << "n=" << n + 1 << " prev=" << S << " add=" << add << " dU=" << tr.value
                         << " ub=" << tr.upper << " ms="
                         << std::chrono::duration<double, std::milli>(clock::now() - t0).count()
                         << '\n';
          }
        }
        add = (add - comp) & comp;
      } while (add != 0);
    }
  }

  const Cell& last = table[N][full];
  Assignment a(K, M, N);
  PowerAlloc p = PowerAlloc::Zero(K);
  std::uint64_t S = full;
  for (int n = N; n > 0; --n) {
    const std::uint64_t prev = table[n][S].prev;
    const Transition& tr = memo.at({n - 1, S & ~prev});
    for (size_t i = 0; i < tr.a_n.users.size(); ++i) {
      const int k = tr.a_n.users[i];
      a.assign(k, Rb{tr.a_n.bands[i], n - 1});
      p(k) = tr.p(k);
    }
    S = prev;
  }
  SolveResult r = make_result(s, a, p);
  r.diag.algorithm = "MODP";
  r.diag.certified = certified;
  r.diag.iterations = iterations;
  r.diag.dp_value = last.value;
  r.diag.upper_bound = last.upper;
  return r;
}

}  // namespace mdma
