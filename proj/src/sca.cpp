#include "mdma/sca.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>

#include "mdma/kpi.hpp"
#include "mdma/modp.hpp"
#include "mdma/subframe.hpp"
#include "mdma/vosmetric.hpp"

namespace mdma {

PowerAlloc fixed_power(const Assignment& a, int m, int n, const Scenario& s) {
  PowerAlloc p = PowerAlloc::Zero(s.num_users());
  double den = 0.0;
  for (int j : a.users_in_frame(n))
    if (s.user(j).bs_powered()) den += s.user(j).distance;
  if (!(den > 0.0)) return p;
  for (int q : a.users_in(m, n))
    if (s.user(q).bs_powered()) p(q) = s.user(q).distance * s.params().p_max / den;
  return p;
}

PowerAlloc fixed_power(const Assignment& a, const Scenario& s) {
  PowerAlloc p = PowerAlloc::Zero(s.num_users());
  for (int n = 0; n < s.grid().num_frames; ++n)
    for (int m = 0; m < s.grid().num_bands; ++m) p += fixed_power(a, m, n, s);
  return p;
}

namespace {

void shuffle(std::vector<int>& v, std::mt19937_64& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(uniform01(rng) * (i + 1)));
    std::swap(v[i], v[j]);
  }
}

// Sum of the users' floored log values when only `users` occupy RB r, at fixed power.
double rb_value(const Scenario& s, int r, const std::vector<int>& users) {
  const int M = s.grid().num_bands;
  const Rb rb{r % M, r / M};
  Assignment a(s.num_users(), M, s.grid().num_frames);
  for (int q : users) a.assign(q, rb);
  const PowerAlloc p = fixed_power(a, rb.m, rb.n, s);
  const SinrVector z = sinr_from_powers(a, p, s);
  double v = 0.0;
  for (int q : users) v += evaluate_user(s, q, rb, z(q)).log.floored;
  return v;
}

}  // namespace

Assignment vos_prioritized_assignment(const Scenario& s, std::uint64_t seed,
                                      VosAssignmentStats* stats) {
  const int K = s.num_users();
  const int M = s.grid().num_bands;
  const int N = s.grid().num_frames;
  const int R = M * N;
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> placed(R);
  std::vector<bool> unmatched(K, true);
  int left = K;
  VosAssignmentStats st;

  for (int cap = 1; cap <= s.params().a_max; ++cap) {
    std::vector<std::vector<bool>> avail(K, std::vector<bool>(R, true));
    std::vector<int> order;
    for (int k = 0; k < K; ++k)
      if (unmatched[k]) order.push_back(k);
    shuffle(order, rng);
    std::deque<int> queue(order.begin(), order.end());
    int rounds = 0;

    while (left > std::max(K - cap * R, 0)) {
      if (queue.empty()) throw std::logic_error("vos_prioritized_assignment: queue ran dry");
      const int k = queue.front();
      queue.pop_front();
      if (!unmatched[k]) continue;
      if (++rounds > K * (R + 1))
        throw std::logic_error("vos_prioritized_assignment: phase did not terminate");

      double best = -std::numeric_limits<double>::infinity();
      int best_r = -1, best_out = -1;
      std::vector<int> best_set;
      for (int r = 0; r < R; ++r) {
        if (!avail[k][r]) continue;
        const std::vector<int>& cur = placed[r];
        std::vector<int> cand;
        double v;
        int out = -1;
        if (static_cast<int>(cur.size()) < cap) {
          cand = cur;
          cand.push_back(k);
          v = rb_value(s, r, cand);
        } else {
          const double keep = rb_value(s, r, cur);
          double v_swap = -std::numeric_limits<double>::infinity();
          for (int j : cur) {
            std::vector<int> c = cur;
            std::erase(c, j);
            c.push_back(k);
            const double vj = rb_value(s, r, c);
            if (vj > v_swap) {
              v_swap = vj;
              out = j;
              cand = std::move(c);
            }
          }
          if (keep > v_swap) {
            avail[k][r] = false;
            continue;
          }
          v = v_swap;
          avail[out][r] = false;
        }
        if (v > best) {
          best = v;
          best_r = r;
          best_out = out;
          best_set = std::move(cand);
        }
      }
      if (best_r < 0) throw std::logic_error("vos_prioritized_assignment: no admissible RB");

      std::sort(best_set.begin(), best_set.end());
      placed[best_r] = std::move(best_set);
      unmatched[k] = false;
      if (best_out >= 0) {
        unmatched[best_out] = true;
        queue.push_back(best_out);
        ++st.swaps;
      } else {
        --left;
      }
    }
    st.iterations += rounds;
    st.max_phase_iterations = std::max(st.max_phase_iterations, rounds);
  }

  Assignment a(K, M, N);
  for (int r = 0; r < R; ++r)
    for (int k : placed[r]) a.assign(k, Rb{r % M, r / M});
  if (stats) *stats = st;
  return a;
}

namespace {

Assignment restrict_to(const Assignment& a, int n) {
  Assignment out(a.num_users(), a.num_bands(), a.num_frames());
  for (int k : a.users_in_frame(n)) out.assign(k, *a.rb(k));
  return out;
}

double frame_objective(const Assignment& an, const PowerAlloc& p, const Scenario& s,
                       SinrVector* z_out = nullptr) {
  const SinrVector z = sinr_from_powers(an, p, s);
  if (z_out) *z_out = z;
  return objective_L(an, z, s).floored;
}

// Power witnesses to start SCA from, best first after ranking by the caller.
std::vector<PowerAlloc> anchor_candidates(const Assignment& an, int n, const Scenario& s,
                                          const ScaOptions& opt) {
  const SubframeAssignment a_n = slice(an, n);
  const SubframeModel model = build_subframe_model(s, a_n);
  std::vector<PowerAlloc> out;

  const PowerAlloc p_fix = fixed_power(an, s);
  if (model.power_violation(p_fix) <= 1e-9) out.push_back(p_fix);

  // just above every z_min, dropping the hardest users until the LP agrees
  const SinrVector z0 = initial_vertex(a_n, s);
  std::vector<std::pair<double, int>> hardness;
  SinrVector target = SinrVector::Zero(s.num_users());
  for (size_t i = 0; i < a_n.users.size(); ++i) {
    const int k = a_n.users[i];
    const double zm = z_min(s, k, Rb{a_n.bands[i], n}, true);
    target(k) = zm * (1.0 + opt.rescue_margin);
    hardness.emplace_back(z0(k) > 0.0 ? zm / z0(k) : std::numeric_limits<double>::infinity(), k);
  }
  std::sort(hardness.begin(), hardness.end(), std::greater<>());
  for (size_t drop = 0; drop <= hardness.size(); ++drop) {
    const FeasibilityResult fr = feasible_power(model, target, true);
    if (fr.p) {
      out.push_back(*fr.p);
      break;
    }
    if (drop < hardness.size()) target(hardness[drop].second) = 0.0;
  }

  out.push_back(project(sinr_from_powers(an, p_fix, s), model).p);
  return out;
}

ScaResult sca_frame(const Assignment& an, int n, const Scenario& s, const ScaOptions& opt) {
  ScaResult out;
  const auto cands = anchor_candidates(an, n, s, opt);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : cands) {
    SinrVector z;
    const double f = frame_objective(an, p, s, &z);
    if (f > best) {
      best = f;
      out.p = p;
      out.z = z;
    }
  }
  out.objective = best;
  out.trace.push_back(best);

  const SinrVector zmin = z_min_vector(an, s);
  bool any_active = false;
  for (int k : an.users_in_frame(n)) any_active = any_active || out.z(k) > zmin(k);
  if (!any_active) {
    out.below_range = true;
    return out;
  }

  for (int it = 0; it < opt.max_iter; ++it) {
    const P4Result r = solve_p4(an, out.z, out.p, s, opt.p4);
    ++out.iterations;
    out.warning = out.warning || r.warning;
    SinrVector z;
    const double f = frame_objective(an, r.p, s, &z);
    if (!(f >= out.objective)) break;
    const double gain = f - out.objective;
    out.p = r.p;
    out.z = z;
    out.objective = f;
    out.trace.push_back(f);
    if (gain < opt.eps) break;
  }
  return out;
}

// Sub-frame key: users with their sub-bands.
using FrameKey = std::pair<int, std::vector<std::pair<int, int>>>;

FrameKey frame_key(const Assignment& a, int n) {
  FrameKey key{n, {}};
  for (int k : a.users_in_frame(n)) key.second.emplace_back(k, a.rb(k)->m);
  return key;
}

void merge(ScaResult& total, const ScaResult& f, const std::vector<int>& users) {
  for (int k : users) {
    total.p(k) = f.p(k);
    total.z(k) = f.z(k);
  }
  total.objective += f.objective;
  const size_t len = std::max(total.trace.size(), f.trace.size());
  std::vector<double> tr(len, 0.0);
  for (size_t i = 0; i < len; ++i)
    tr[i] = (total.trace.empty() ? 0.0 : total.trace[std::min(i, total.trace.size() - 1)]) +
            f.trace[std::min(i, f.trace.size() - 1)];
  total.trace = std::move(tr);
  total.iterations += f.iterations;
  total.warning = total.warning || f.warning;
}

}  // namespace

ScaResult sca_power(const Assignment& a, const Scenario& s, const ScaOptions& opt) {
  ScaResult out;
  out.p = PowerAlloc::Zero(s.num_users());
  out.z = SinrVector::Zero(s.num_users());
  out.trace = {0.0};
  bool all_below = true, any = false;
  for (int n = 0; n < s.grid().num_frames; ++n) {
    const auto users = a.users_in_frame(n);
    if (users.empty()) continue;
    const ScaResult f = sca_frame(restrict_to(a, n), n, s, opt);
    merge(out, f, users);
    any = true;
    all_below = all_below && f.below_range;
  }
  out.below_range = any && all_below;
  return out;
}

SolveResult swap_refine(const Assignment& a0, const Scenario& s, const SwapOptions& opt) {
  const int M = s.grid().num_bands;
  const int N = s.grid().num_frames;
  const int R = M * N;
  std::map<FrameKey, ScaResult> cache;
  auto frame = [&](const Assignment& a, int n) -> const ScaResult& {
    FrameKey key = frame_key(a, n);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ScaResult r;
    if (key.second.empty()) {
      r.p = PowerAlloc::Zero(s.num_users());
      r.z = SinrVector::Zero(s.num_users());
      r.trace = {0.0};
    } else {
      r = sca_frame(restrict_to(a, n), n, s, opt.sca);
    }
    return cache.emplace(std::move(key), std::move(r)).first->second;
  };
  auto total = [&](const Assignment& a) {
    double v = 0.0;
    for (int n = 0; n < N; ++n) v += frame(a, n).objective;
    return v;
  };

  Assignment a = a0;
  double cur = total(a);
  std::mt19937_64 rng(opt.seed);
  int accepted = 0;
  for (int sweep = 0; sweep < opt.max_sweeps && R > 1; ++sweep) {
    std::vector<int> moves;
    for (int k = 0; k < s.num_users(); ++k)
      if (a.is_assigned(k))
        for (int r = 0; r < R; ++r) moves.push_back(k * R + r);
    shuffle(moves, rng);
    bool improved = false;
    for (int mv : moves) {
      const int k = mv / R;
      if (!a.is_assigned(k)) continue;
      const Rb to{(mv % R) % M, (mv % R) / M};
      const Rb from = *a.rb(k);
      if (from == to) continue;
      // a full target RB sends one occupant back to k's old slot
      std::vector<int> partners{-1};
      if (a.count_in(to.m, to.n) >= s.params().a_max) partners = a.users_in(to.m, to.n);
      for (int j : partners) {
        Assignment b = a;
        b.assign(k, to);
        if (j >= 0) b.assign(j, from);
        double v = cur - frame(a, from.n).objective + frame(b, from.n).objective;
        if (to.n != from.n) v += frame(b, to.n).objective - frame(a, to.n).objective;
        if (v > cur + 1e-12 * std::max(1.0, std::abs(cur))) {
          a = std::move(b);
          cur = v;
          improved = true;
          ++accepted;
          break;
        }
      }
    }
    if (!improved) break;
  }

  ScaResult combined;
  combined.p = PowerAlloc::Zero(s.num_users());
  combined.z = SinrVector::Zero(s.num_users());
  for (int n = 0; n < N; ++n) merge(combined, frame(a, n), a.users_in_frame(n));
  SolveResult r = make_result(s, a, combined.p);
  r.diag.algorithm = "VoS-SCA";
  r.diag.iterations = accepted;
  r.diag.trace = combined.trace;
  return r;
}

}  // namespace mdma
